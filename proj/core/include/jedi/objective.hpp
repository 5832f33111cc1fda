// Copyright 2026 The jedi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "jedi/distributions.hpp"

namespace jedi {

/// One prompt subject and the pool entries (attention maps) that belong to it.
struct SubjectGroup {
  std::string id;
  std::vector<std::size_t> map_indices;
};

/// Ordered subject groups over a pool of attention maps.
///
/// Groups must be non-empty and may not share pool indices. Index validity
/// against a concrete pool is checked when the spec is resolved.
class PromptSpec {
 public:
  explicit PromptSpec(std::vector<SubjectGroup> subjects);

  std::size_t num_subjects() const { return subjects_.size(); }
  const std::vector<SubjectGroup>& subjects() const { return subjects_; }
  const SubjectGroup& operator[](std::size_t s) const { return subjects_[s]; }

  /// Every referenced index, in group order.
  std::vector<std::size_t> all_indices() const;
  /// Total number of referenced maps.
  std::size_t num_maps() const;
  /// Smallest pool size that makes every index valid.
  std::size_t min_pool_size() const;

 private:
  std::vector<SubjectGroup> subjects_;
};

/// Build one DistributionSet per subject. Throws DataError on out-of-range
/// indices or mismatched dimensions across groups.
std::vector<DistributionSet> resolve_groups(const PromptSpec& spec,
                                            std::span<const ProbField> pool);

/// Default strength of the entropy regularizer.
inline constexpr double kDefaultLambda = 0.01;

struct LossConfig {
  double lambda = kDefaultLambda;
  bool enable_intra = true;
  bool enable_inter = true;
  bool enable_diversity = true;

  /// Throws DataError when lambda is negative or non-finite.
  void validate() const;
};

/// Per-term values of one objective evaluation. Terms are reported even
/// when disabled; only `total` honours the toggles.
struct ObjectiveBreakdown {
  double intra = 0.0;
  double inter = 0.0;
  double diversity = 0.0;
  double lambda = kDefaultLambda;
  double total = 0.0;
};

/// Mean over subjects of the normalized JSD within each group. Singleton
/// groups contribute 0.
double intra_coherence(const PromptSpec& spec, std::span<const ProbField> pool);

/// 1 - normalized JSD of the per-subject mixtures. A single subject has
/// nothing to separate from and yields 0.
double inter_separation(const PromptSpec& spec, std::span<const ProbField> pool);

/// Mean over subjects of 1 - normalized entropy of the subject mixture.
double diversity_penalty(const PromptSpec& spec, std::span<const ProbField> pool);

/// Normalized JSD between subject mixtures; the disentanglement score of
/// one pool. Equals 1 - inter_separation for two or more subjects.
double intergroup_jsd(const PromptSpec& spec, std::span<const ProbField> pool);

ObjectiveBreakdown jedi_loss(const PromptSpec& spec,
                             std::span<const ProbField> pool,
                             const LossConfig& cfg = {});

inline constexpr double kDefaultTemperature = 0.5;

/// NT-Xent over cosine similarities of the referenced maps. Positives are
/// ordered same-group pairs; every other referenced map is in the
/// denominator. Requires at least two maps and one positive pair.
double nt_xent_loss(const PromptSpec& spec, std::span<const ProbField> pool,
                    double temperature = kDefaultTemperature);

}  // namespace jedi
