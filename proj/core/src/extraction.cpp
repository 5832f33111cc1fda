// Copyright 2026 The jedi Authors
// SPDX-License-Identifier: Apache-2.0

#include "jedi/extraction.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <string>

#include "jedi/errors.hpp"

namespace jedi {

AttentionKind parse_attention_kind(std::string_view name) {
  if (name == "softmaxed") return AttentionKind::softmaxed;
  if (name == "raw_logits") return AttentionKind::raw_logits;
  throw DataError("unknown attention kind '" + std::string(name) + "'");
}

std::string_view to_string(AttentionKind kind) {
  return kind == AttentionKind::softmaxed ? "softmaxed" : "raw_logits";
}

// Row sums of softmaxed matrices must match 1 this closely.
constexpr double kRowSumTolerance = 1e-4;

JointAttentionMatrix::JointAttentionMatrix(std::vector<double> data, std::size_t n,
                                           std::size_t m, AttentionKind kind,
                                           int block_index, int timestep)
    : data_(std::move(data)), n_(n), m_(m), kind_(kind), block_(block_index),
      timestep_(timestep) {
  if (n_ < 1 || m_ < 1) throw DataError("joint attention needs n >= 1 and m >= 1");
  const std::size_t s = n_ + m_;
  if (data_.size() != s * s) {
    throw DataError("joint attention matrix has " + std::to_string(data_.size()) +
                    " entries, expected " + std::to_string(s * s));
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw DataError("joint attention matrix holds a non-finite entry");
  }
  if (kind_ == AttentionKind::softmaxed) {
    for (std::size_t r = 0; r < s; ++r) {
      double total = 0.0;
      for (std::size_t c = 0; c < s; ++c) {
        const double v = data_[r * s + c];
        if (v < 0.0) {
          throw DataError("softmaxed attention has a negative entry in row " +
                          std::to_string(r));
        }
        total += v;
      }
      if (std::abs(total - 1.0) > kRowSumTolerance) {
        throw DataError("softmaxed attention row " + std::to_string(r) +
                        " sums to " + std::to_string(total));
      }
    }
  }
}

std::optional<GridShape> image_grid(std::size_t n) {
  auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  while (side * side > n) --side;
  while ((side + 1) * (side + 1) <= n) ++side;
  if (side * side != n) return std::nullopt;
  return GridShape{side, side};
}

std::vector<double> token_influence(const JointAttentionMatrix& a, std::size_t token) {
  if (token >= a.m()) {
    throw DataError("prompt token " + std::to_string(token) + " out of range (m=" +
                    std::to_string(a.m()) + ")");
  }
  const std::size_t n = a.n();
  const std::size_t row = n + token;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  std::vector<double> v(n);
  for (std::size_t j = 0; j < n; ++j) v[j] = inv_sqrt2 * (a(row, j) + a(j, row));
  return v;
}

ExtractedField extract_token_field(const JointAttentionMatrix& a, std::size_t token) {
  auto v = token_influence(a, token);
  const auto shape = image_grid(a.n());

  if (a.kind() == AttentionKind::raw_logits) {
    std::vector<double> p(v.size());
    softmax(v, p);
    return {ProbField(std::move(p), shape), false};
  }

  double total = 0.0;
  for (double x : v) total += x;
  if (!(total > 0.0)) return {ProbField::uniform(v.size(), shape), true};
  for (double& x : v) x /= total;
  return {ProbField(std::move(v), shape), false};
}

BlockRange parse_range(std::string_view text) {
  auto parse_int = [&](std::string_view s) {
    int v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      throw DataError("malformed range '" + std::string(text) + "'");
    }
    return v;
  };
  const auto colon = text.find(':');
  BlockRange r;
  if (colon == std::string_view::npos) {
    r.lo = r.hi = parse_int(text);
  } else {
    r.lo = parse_int(text.substr(0, colon));
    r.hi = parse_int(text.substr(colon + 1));
  }
  if (r.hi < r.lo) throw DataError("empty range '" + std::string(text) + "'");
  return r;
}

ExtractedPool extract_pool(std::span<const JointAttentionMatrix> blocks,
                           const PromptSpec& token_spec, BlockRange range) {
  if (range.count() == 0) throw DataError("empty block range");

  std::map<int, const JointAttentionMatrix*> by_index;
  for (const auto& b : blocks) by_index.emplace(b.block_index(), &b);

  std::vector<const JointAttentionMatrix*> selected;
  for (int b = range.lo; b <= range.hi; ++b) {
    const auto it = by_index.find(b);
    if (it == by_index.end()) {
      throw DataError("block " + std::to_string(b) + " is missing from the attention set");
    }
    selected.push_back(it->second);
  }
  const std::size_t n = selected.front()->n();
  const std::size_t m = selected.front()->m();
  for (const auto* b : selected) {
    if (b->n() != n || b->m() != m) {
      throw DataError("block " + std::to_string(b->block_index()) +
                      " disagrees on token counts");
    }
  }

  const auto tokens = token_spec.all_indices();
  for (std::size_t t : tokens) {
    if (t >= m) {
      throw DataError("prompt token " + std::to_string(t) + " out of range (m=" +
                      std::to_string(m) + ")");
    }
  }

  std::vector<ProbField> pool;
  pool.reserve(selected.size() * tokens.size());
  std::size_t degenerate = 0;
  for (const auto* b : selected) {
    for (std::size_t t : tokens) {
      auto ext = extract_token_field(*b, t);
      degenerate += ext.degenerate ? 1 : 0;
      pool.push_back(std::move(ext.field));
    }
  }

  // Position of each token inside one block's slice of the pool.
  std::map<std::size_t, std::size_t> slot;
  for (std::size_t k = 0; k < tokens.size(); ++k) slot.emplace(tokens[k], k);

  std::vector<SubjectGroup> groups;
  for (const auto& g : token_spec.subjects()) {
    SubjectGroup pg{g.id, {}};
    for (std::size_t bi = 0; bi < selected.size(); ++bi) {
      for (std::size_t t : g.map_indices) {
        pg.map_indices.push_back(bi * tokens.size() + slot.at(t));
      }
    }
    groups.push_back(std::move(pg));
  }
  return {std::move(pool), PromptSpec(std::move(groups)), degenerate};
}

}  // namespace jedi
