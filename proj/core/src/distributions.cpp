// Copyright 2026 The jedi Authors
// SPDX-License-Identifier: Apache-2.0

#include "jedi/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "jedi/errors.hpp"

namespace jedi {

namespace {

void check_shape(std::size_t d, const std::optional<GridShape>& shape) {
  if (shape && shape->cells() != d) {
    throw DataError("grid shape " + std::to_string(shape->height) + "x" +
                    std::to_string(shape->width) + " does not cover " +
                    std::to_string(d) + " cells");
  }
}

}  // namespace

ProbField::ProbField(std::vector<double> values, std::optional<GridShape> shape)
    : values_(std::move(values)), shape_(shape) {
  if (values_.empty()) throw DataError("probability field must have d >= 1");
  check_shape(values_.size(), shape_);

  double total = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double v = values_[i];
    if (!std::isfinite(v)) {
      throw DataError("non-finite probability at cell " + std::to_string(i));
    }
    if (v < 0.0) {
      throw DataError("negative probability at cell " + std::to_string(i));
    }
    total += v;
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw DataError("probability mass " + std::to_string(total) +
                    " is not 1 within tolerance");
  }
  for (double& v : values_) v /= total;
}

ProbField ProbField::uniform(std::size_t d, std::optional<GridShape> shape) {
  if (d == 0) throw DataError("probability field must have d >= 1");
  return ProbField(std::vector<double>(d, 1.0 / static_cast<double>(d)), shape);
}

ProbField ProbField::from_logits(std::span<const double> logits,
                                 std::optional<GridShape> shape) {
  if (logits.empty()) throw DataError("probability field must have d >= 1");
  std::vector<double> p(logits.size());
  softmax(logits, p);
  return ProbField(std::move(p), shape);
}

void softmax(std::span<const double> logits, std::span<double> out) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double z : logits) {
    if (!std::isfinite(z)) throw NumericalError("non-finite logit in softmax");
    hi = std::max(hi, z);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - hi);
    total += out[i];
  }
  for (double& v : out) v /= total;
}

DistributionSet::DistributionSet(std::vector<ProbField> members)
    : members_(std::move(members)) {
  if (members_.empty()) throw DataError("distribution set must be non-empty");
  const std::size_t d = members_.front().size();
  for (const auto& p : members_) {
    if (p.size() != d) {
      throw DataError("distribution set members disagree on dimension (" +
                      std::to_string(p.size()) + " vs " + std::to_string(d) +
                      ")");
    }
  }
}

double kl_divergence(const ProbField& p, const ProbField& q) {
  if (p.size() != q.size()) {
    throw DataError("kl_divergence: dimension mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = p[i];
    if (pi == 0.0) continue;
    if (q[i] == 0.0) {
      throw DivergenceUndefined("kl_divergence undefined: p[" +
                                std::to_string(i) + "] > 0 but q is 0");
    }
    acc += pi * std::log(pi / q[i]);
  }
  // Gibbs' inequality; negative values are rounding residue.
  return std::max(acc, 0.0);
}

ProbField mixture(const DistributionSet& set) {
  std::vector<double> m(set.dim(), 0.0);
  for (const auto& p : set) {
    for (std::size_t i = 0; i < m.size(); ++i) m[i] += p[i];
  }
  const double inv = 1.0 / static_cast<double>(set.size());
  for (double& v : m) v *= inv;
  return ProbField(std::move(m), set[0].shape());
}

double jsd(const DistributionSet& set) {
  if (set.size() == 1) return 0.0;
  const ProbField m = mixture(set);
  double acc = 0.0;
  for (const auto& p : set) acc += kl_divergence(p, m);
  return acc / static_cast<double>(set.size());
}

double jsd_normalized(const DistributionSet& set) {
  if (set.size() < 2) return 0.0;
  return jsd(set) / std::log(static_cast<double>(set.size()));
}

double entropy(const ProbField& p) {
  double acc = 0.0;
  for (double v : p.values()) {
    if (v > 0.0) acc -= v * std::log(v);
  }
  return std::max(acc, 0.0);
}

double entropy_normalized(const ProbField& p) {
  if (p.size() == 1) return 1.0;
  return entropy(p) / std::log(static_cast<double>(p.size()));
}

}  // namespace jedi
