// Copyright 2026 The jedi Authors
// SPDX-License-Identifier: Apache-2.0

#include "jedi/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "jedi/errors.hpp"

namespace jedi {

PromptSpec::PromptSpec(std::vector<SubjectGroup> subjects)
    : subjects_(std::move(subjects)) {
  if (subjects_.empty()) throw DataError("prompt spec needs at least one subject");
  std::set<std::size_t> seen;
  for (const auto& g : subjects_) {
    if (g.map_indices.empty()) {
      throw DataError("subject '" + g.id + "' has no attention maps");
    }
    for (std::size_t idx : g.map_indices) {
      if (!seen.insert(idx).second) {
        throw DataError("map index " + std::to_string(idx) +
                        " is claimed by more than one subject");
      }
    }
  }
}

std::vector<std::size_t> PromptSpec::all_indices() const {
  std::vector<std::size_t> out;
  for (const auto& g : subjects_) {
    out.insert(out.end(), g.map_indices.begin(), g.map_indices.end());
  }
  return out;
}

std::size_t PromptSpec::num_maps() const {
  std::size_t n = 0;
  for (const auto& g : subjects_) n += g.map_indices.size();
  return n;
}

std::size_t PromptSpec::min_pool_size() const {
  std::size_t hi = 0;
  for (const auto& g : subjects_) {
    for (std::size_t idx : g.map_indices) hi = std::max(hi, idx + 1);
  }
  return hi;
}

std::vector<DistributionSet> resolve_groups(const PromptSpec& spec,
                                            std::span<const ProbField> pool) {
  if (spec.min_pool_size() > pool.size()) {
    throw DataError("prompt spec references map " +
                    std::to_string(spec.min_pool_size() - 1) +
                    " but the pool holds " + std::to_string(pool.size()));
  }
  std::vector<DistributionSet> groups;
  groups.reserve(spec.num_subjects());
  for (const auto& g : spec.subjects()) {
    std::vector<ProbField> members;
    members.reserve(g.map_indices.size());
    for (std::size_t idx : g.map_indices) members.push_back(pool[idx]);
    groups.emplace_back(std::move(members));
  }
  const std::size_t d = groups.front().dim();
  for (const auto& g : groups) {
    if (g.dim() != d) throw DataError("subject groups disagree on map dimension");
  }
  return groups;
}

void LossConfig::validate() const {
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw DataError("lambda must be finite and non-negative");
  }
}

namespace {

std::vector<ProbField> subject_mixtures(const std::vector<DistributionSet>& groups) {
  std::vector<ProbField> out;
  out.reserve(groups.size());
  for (const auto& g : groups) out.push_back(mixture(g));
  return out;
}

double intra_of(const std::vector<DistributionSet>& groups) {
  double acc = 0.0;
  for (const auto& g : groups) acc += jsd_normalized(g);
  return acc / static_cast<double>(groups.size());
}

double intergroup_of(const std::vector<DistributionSet>& groups) {
  if (groups.size() < 2) return 0.0;
  return jsd_normalized(DistributionSet(subject_mixtures(groups)));
}

double diversity_of(const std::vector<DistributionSet>& groups) {
  double acc = 0.0;
  for (const auto& m : subject_mixtures(groups)) acc += 1.0 - entropy_normalized(m);
  return acc / static_cast<double>(groups.size());
}

}  // namespace

double intra_coherence(const PromptSpec& spec, std::span<const ProbField> pool) {
  return intra_of(resolve_groups(spec, pool));
}

double inter_separation(const PromptSpec& spec, std::span<const ProbField> pool) {
  if (spec.num_subjects() < 2) {
    resolve_groups(spec, pool);
    return 0.0;
  }
  return 1.0 - intergroup_of(resolve_groups(spec, pool));
}

double diversity_penalty(const PromptSpec& spec, std::span<const ProbField> pool) {
  return diversity_of(resolve_groups(spec, pool));
}

double intergroup_jsd(const PromptSpec& spec, std::span<const ProbField> pool) {
  return intergroup_of(resolve_groups(spec, pool));
}

ObjectiveBreakdown jedi_loss(const PromptSpec& spec,
                             std::span<const ProbField> pool,
                             const LossConfig& cfg) {
  cfg.validate();
  const auto groups = resolve_groups(spec, pool);

  ObjectiveBreakdown out;
  out.lambda = cfg.lambda;
  out.intra = intra_of(groups);
  out.inter = groups.size() < 2 ? 0.0 : 1.0 - intergroup_of(groups);
  out.diversity = diversity_of(groups);
  out.total = (cfg.enable_intra ? out.intra : 0.0) +
              (cfg.enable_inter ? out.inter : 0.0) +
              (cfg.enable_diversity ? cfg.lambda * out.diversity : 0.0);
  return out;
}

double nt_xent_loss(const PromptSpec& spec, std::span<const ProbField> pool,
                    double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw DataError("nt_xent temperature must be positive and finite");
  }
  resolve_groups(spec, pool);

  std::vector<std::size_t> idx;
  std::vector<std::size_t> group_of;
  for (std::size_t s = 0; s < spec.num_subjects(); ++s) {
    for (std::size_t i : spec[s].map_indices) {
      idx.push_back(i);
      group_of.push_back(s);
    }
  }
  const std::size_t n = idx.size();
  if (n < 2) throw DataError("nt_xent needs at least two maps");

  std::vector<double> norm(n);
  for (std::size_t a = 0; a < n; ++a) {
    double sq = 0.0;
    for (double v : pool[idx[a]].values()) sq += v * v;
    norm[a] = std::sqrt(sq);
    if (norm[a] == 0.0) throw NumericalError("nt_xent: zero-norm map");
  }
  auto cosine = [&](std::size_t a, std::size_t b) {
    const auto pa = pool[idx[a]].values();
    const auto pb = pool[idx[b]].values();
    double dot = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) dot += pa[i] * pb[i];
    return dot / (norm[a] * norm[b]);
  };

  double acc = 0.0;
  std::size_t pairs = 0;
  std::vector<double> logits(n);
  for (std::size_t a = 0; a < n; ++a) {
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < n; ++b) {
      if (b == a) continue;
      logits[b] = cosine(a, b) / temperature;
      hi = std::max(hi, logits[b]);
    }
    double denom = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      if (b != a) denom += std::exp(logits[b] - hi);
    }
    const double log_denom = hi + std::log(denom);
    for (std::size_t b = 0; b < n; ++b) {
      if (b == a || group_of[b] != group_of[a]) continue;
      acc += log_denom - logits[b];
      ++pairs;
    }
  }
  if (pairs == 0) throw DataError("nt_xent needs at least one positive pair");
  return acc / static_cast<double>(pairs);
}

}  // namespace jedi
