// Copyright 2026 The jedi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "jedi/distributions.hpp"
#include "jedi/objective.hpp"

namespace jedi {

enum class AttentionKind { softmaxed, raw_logits };

/// Parses "softmaxed" / "raw_logits". Throws DataError otherwise.
AttentionKind parse_attention_kind(std::string_view name);
std::string_view to_string(AttentionKind kind);

/// Joint self-attention of one DiT block: n image tokens followed by m
/// prompt tokens, row-major (n+m) x (n+m).
class JointAttentionMatrix {
 public:
  JointAttentionMatrix(std::vector<double> data, std::size_t n, std::size_t m,
                       AttentionKind kind, int block_index = 0, int timestep = 0);

  std::size_t n() const { return n_; }
  std::size_t m() const { return m_; }
  std::size_t side() const { return n_ + m_; }
  AttentionKind kind() const { return kind_; }
  int block_index() const { return block_; }
  int timestep() const { return timestep_; }

  double operator()(std::size_t row, std::size_t col) const {
    return data_[row * side() + col];
  }
  std::span<const double> data() const { return data_; }

 private:
  std::vector<double> data_;
  std::size_t n_;
  std::size_t m_;
  AttentionKind kind_;
  int block_;
  int timestep_;
};

struct ExtractedField {
  ProbField field;
  /// True when renormalization met an all-zero vector and fell back to
  /// uniform.
  bool degenerate = false;
};

/// Square grid when n is a perfect square.
std::optional<GridShape> image_grid(std::size_t n);

/// Pre-normalization symmetrized vector (length n) for prompt token i.
std::vector<double> token_influence(const JointAttentionMatrix& a, std::size_t token);

/// Spatial influence of prompt token i on the image:
///   v = (A[n+i, :n] + A[:n, n+i]^T) / sqrt(2)
/// followed by softmax (raw_logits) or renormalization (softmaxed).
ExtractedField extract_token_field(const JointAttentionMatrix& a, std::size_t token);

/// Inclusive block range lo..hi.
struct BlockRange {
  int lo = 0;
  int hi = 0;

  bool contains(int b) const { return b >= lo && b <= hi; }
  std::size_t count() const { return hi < lo ? 0 : static_cast<std::size_t>(hi - lo + 1); }
};

/// Parses "lo:hi" (inclusive) or a single index. Throws DataError.
BlockRange parse_range(std::string_view text);

struct ExtractedPool {
  std::vector<ProbField> pool;
  /// `token_spec` rewritten onto pool indices.
  PromptSpec spec;
  std::size_t degenerate_count = 0;
};

/// One field per (block, token) for every block in `range`, block-major and
/// then in the token order of `token_spec`. Every block of the range must be
/// present in `blocks`; n and m must agree across blocks.
ExtractedPool extract_pool(std::span<const JointAttentionMatrix> blocks,
                           const PromptSpec& token_spec, BlockRange range);

}  // namespace jedi
