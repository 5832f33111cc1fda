// Copyright 2026 The jedi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace jedi {

/// Grid metadata for a field that lives on an image lattice.
struct GridShape {
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t cells() const { return height * width; }
  bool operator==(const GridShape&) const = default;
};

/// Inputs whose mass differs from 1 by more than this are rejected.
inline constexpr double kMassTolerance = 1e-3;

/// Floor applied inside logarithms so that log(0) never occurs on the
/// differentiable paths.
inline constexpr double kLogFloor = 1e-12;

/// A discrete probability distribution over d >= 1 cells.
///
/// Construction validates finiteness and non-negativity, and renormalizes
/// inputs whose sum lies within kMassTolerance of 1. Anything further from
/// 1 throws DataError. Once built, a ProbField is immutable.
class ProbField {
 public:
  explicit ProbField(std::vector<double> values,
                     std::optional<GridShape> shape = std::nullopt);

  /// Uniform distribution over d cells.
  static ProbField uniform(std::size_t d,
                           std::optional<GridShape> shape = std::nullopt);

  /// Softmax of unconstrained logits (max-shifted).
  static ProbField from_logits(std::span<const double> logits,
                               std::optional<GridShape> shape = std::nullopt);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  const std::optional<GridShape>& shape() const { return shape_; }

 private:
  std::vector<double> values_;
  std::optional<GridShape> shape_;
};

/// A non-empty collection of ProbFields sharing one dimension.
class DistributionSet {
 public:
  explicit DistributionSet(std::vector<ProbField> members);

  std::size_t size() const { return members_.size(); }
  std::size_t dim() const { return members_.front().size(); }
  const ProbField& operator[](std::size_t k) const { return members_[k]; }
  const std::vector<ProbField>& members() const { return members_; }

  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }

 private:
  std::vector<ProbField> members_;
};

/// KL(p || q) in nats, with 0 * log(0 / q) = 0.
/// Throws DivergenceUndefined when some p_i > 0 meets q_i = 0.
double kl_divergence(const ProbField& p, const ProbField& q);

/// Uniform average of the members.
ProbField mixture(const DistributionSet& set);

/// Generalized Jensen-Shannon divergence: mean KL of each member to the
/// mixture. Lies in [0, log n].
double jsd(const DistributionSet& set);

/// jsd / log n, in [0, 1]. A singleton set has nothing to overlap with and
/// scores 0.
double jsd_normalized(const DistributionSet& set);

/// Shannon entropy in nats, in [0, log d].
double entropy(const ProbField& p);

/// entropy / log d, in [0, 1]. For d = 1 the only distribution is uniform,
/// so this returns 1.
double entropy_normalized(const ProbField& p);

/// Softmax with max-shift, written into `out` (same length as `logits`).
void softmax(std::span<const double> logits, std::span<double> out);

}  // namespace jedi
