// Copyright 2026 The jedi Authors
// SPDX-License-Identifier: Apache-2.0

#include "jedi/synthetic_model.hpp"

#include <cmath>
#include <random>
#include <string>

#include "jedi/errors.hpp"

namespace jedi {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Independent streams for construction, x_0 and each timestep's drift.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t purpose,
                       std::uint64_t index = 0) {
  return std::mt19937_64(splitmix64(splitmix64(seed ^ (purpose << 56)) + index));
}

constexpr std::uint64_t kLayoutStream = 1;
constexpr std::uint64_t kInitStream = 2;
constexpr std::uint64_t kDriftStream = 3;

}  // namespace

SyntheticModel::SyntheticModel(SyntheticModelConfig cfg)
    : cfg_(cfg), num_maps_(cfg.num_subjects * cfg.maps_per_subject) {
  if (cfg_.num_subjects < 1) throw DataError("synthetic model needs >= 1 subject");
  if (cfg_.maps_per_subject < 1) throw DataError("synthetic model needs >= 1 map per subject");
  if (cfg_.grid.cells() < 4) throw DataError("synthetic model grid needs >= 4 cells");
  if (!(cfg_.blob_sigma > 0.0)) throw DataError("blob_sigma must be positive");
  if (cfg_.contraction < 0.0 || cfg_.contraction >= 1.0) {
    throw DataError("contraction must lie in [0, 1)");
  }

  const std::size_t h = cfg_.grid.height;
  const std::size_t w = cfg_.grid.width;
  cell_u_.resize(h * w);
  cell_v_.resize(h * w);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      cell_u_[r * w + c] = (static_cast<double>(c) + 0.5) / static_cast<double>(w);
      cell_v_[r * w + c] = (static_cast<double>(r) + 0.5) / static_cast<double>(h);
    }
  }

  auto rng = stream(cfg_.seed, kLayoutStream);
  std::uniform_real_distribution<double> box(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  equilibrium_.reserve(num_maps_ * kParamsPerMap);
  for (std::size_t s = 0; s < cfg_.num_subjects; ++s) {
    const double sx = 0.5 + cfg_.subject_spread * box(rng);
    const double sy = 0.5 + cfg_.subject_spread * box(rng);
    for (std::size_t k = 0; k < cfg_.maps_per_subject; ++k) {
      equilibrium_.push_back(sx + cfg_.map_jitter * normal(rng));
      equilibrium_.push_back(sy + cfg_.map_jitter * normal(rng));
      equilibrium_.push_back(std::log(cfg_.blob_sigma) + 0.1 * normal(rng));
      equilibrium_.push_back(cfg_.blob_amplitude * (1.0 + 0.1 * normal(rng)));
    }
  }
}

void SyntheticModel::check_latent(const LatentState& x) const {
  if (x.x.size() != equilibrium_.size()) {
    throw DataError("latent has " + std::to_string(x.x.size()) +
                    " entries, model expects " + std::to_string(equilibrium_.size()));
  }
  for (double v : x.x) {
    if (!std::isfinite(v)) throw NumericalError("non-finite latent entry");
  }
}

LatentState SyntheticModel::initial_state(std::uint64_t seed) const {
  auto rng = stream(seed, kInitStream);
  std::normal_distribution<double> normal(0.0, cfg_.init_noise);
  LatentState x{equilibrium_, 0};
  for (double& v : x.x) v += normal(rng);
  return x;
}

std::vector<std::vector<double>> SyntheticModel::attention_logits(
    const LatentState& x) const {
  check_latent(x);
  const std::size_t d = cell_u_.size();
  std::vector<std::vector<double>> logits(num_maps_, std::vector<double>(d));
  for (std::size_t j = 0; j < num_maps_; ++j) {
    const double* p = &x.x[j * kParamsPerMap];
    const double sigma = std::exp(p[2]);
    const double inv2s2 = 0.5 / (sigma * sigma);
    for (std::size_t i = 0; i < d; ++i) {
      const double du = cell_u_[i] - p[0];
      const double dv = cell_v_[i] - p[1];
      logits[j][i] = p[3] * std::exp(-(du * du + dv * dv) * inv2s2);
    }
  }
  return logits;
}

std::vector<ProbField> SyntheticModel::attention(const LatentState& x) const {
  std::vector<ProbField> pool;
  pool.reserve(num_maps_);
  for (const auto& z : attention_logits(x)) pool.push_back(ProbField::from_logits(z, cfg_.grid));
  return pool;
}

std::vector<double> SyntheticModel::pullback(
    const LatentState& x, std::span<const std::vector<double>> d_logits) const {
  check_latent(x);
  if (d_logits.size() != num_maps_) throw DataError("pullback: pool size mismatch");
  const std::size_t d = cell_u_.size();
  std::vector<double> grad(equilibrium_.size(), 0.0);
  for (std::size_t j = 0; j < num_maps_; ++j) {
    if (d_logits[j].empty()) continue;
    if (d_logits[j].size() != d) throw DataError("pullback: map dimension mismatch");
    const double* p = &x.x[j * kParamsPerMap];
    double* g = &grad[j * kParamsPerMap];
    const double sigma = std::exp(p[2]);
    const double inv_s2 = 1.0 / (sigma * sigma);
    for (std::size_t i = 0; i < d; ++i) {
      const double du = cell_u_[i] - p[0];
      const double dv = cell_v_[i] - p[1];
      const double dist2 = du * du + dv * dv;
      const double blob = std::exp(-0.5 * dist2 * inv_s2);
      const double up = d_logits[j][i];
      const double scaled = up * p[3] * blob;
      g[0] += scaled * du * inv_s2;
      g[1] += scaled * dv * inv_s2;
      g[2] += scaled * dist2 * inv_s2;
      g[3] += up * blob;
    }
  }
  return grad;
}

StepOutput SyntheticModel::step(const LatentState& x, std::uint64_t seed) const {
  StepOutput out;
  out.attention = attention(x);
  auto rng = stream(seed, kDriftStream, x.timestep);
  std::normal_distribution<double> normal(0.0, cfg_.step_noise);
  out.next.timestep = x.timestep + 1;
  out.next.x.resize(x.x.size());
  for (std::size_t i = 0; i < x.x.size(); ++i) {
    out.next.x[i] = x.x[i] + cfg_.contraction * (equilibrium_[i] - x.x[i]) + normal(rng);
  }
  return out;
}

PromptSpec SyntheticModel::prompt() const {
  std::vector<SubjectGroup> groups;
  for (std::size_t s = 0; s < cfg_.num_subjects; ++s) {
    SubjectGroup g{"subject_" + std::to_string(s), {}};
    for (std::size_t k = 0; k < cfg_.maps_per_subject; ++k) {
      g.map_indices.push_back(s * cfg_.maps_per_subject + k);
    }
    groups.push_back(std::move(g));
  }
  return PromptSpec(std::move(groups));
}

SyntheticModel synthetic_model(std::size_t num_subjects,
                               std::size_t maps_per_subject, GridShape grid,
                               std::uint64_t seed) {
  SyntheticModelConfig cfg;
  cfg.num_subjects = num_subjects;
  cfg.maps_per_subject = maps_per_subject;
  cfg.grid = grid;
  cfg.seed = seed;
  return SyntheticModel(cfg);
}

}  // namespace jedi
