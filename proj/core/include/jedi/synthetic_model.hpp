// Copyright 2026 The jedi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "jedi/adaptation.hpp"

namespace jedi {

struct SyntheticModelConfig {
  std::size_t num_subjects = 2;
  std::size_t maps_per_subject = 2;
  GridShape grid{16, 16};
  std::uint64_t seed = 0;

  /// Half-width of the box (in unit grid coordinates) that subject centers
  /// are drawn from. 0 stacks every subject on the grid centre.
  double subject_spread = 0.08;
  /// Std-dev of map centres around their subject centre.
  double map_jitter = 0.04;
  double blob_sigma = 0.2;
  double blob_amplitude = 4.0;

  /// Std-dev of x_0 around the equilibrium parameters.
  double init_noise = 0.02;
  /// Fraction of the distance to equilibrium removed per denoising step.
  double contraction = 0.05;
  /// Std-dev of the per-step seeded drift.
  double step_noise = 2e-3;
};

/// Desk-scale stand-in for a diffusion sampler.
///
/// The latent holds four parameters per attention map,
///   [centre_x, centre_y, log_sigma, amplitude],
/// and map j is softmax over grid cells of
///   amplitude * exp(-|cell - centre|^2 / (2 sigma^2)),
/// with cell centres in [0, 1]^2. Maps are laid out subject-major.
class SyntheticModel final : public DiffusionModel {
 public:
  explicit SyntheticModel(SyntheticModelConfig cfg);

  std::size_t latent_dim() const override { return equilibrium_.size(); }
  std::size_t pool_size() const override { return num_maps_; }
  LatentState initial_state(std::uint64_t seed) const override;
  StepOutput step(const LatentState& x, std::uint64_t seed) const override;
  std::vector<std::vector<double>> attention_logits(
      const LatentState& x) const override;
  std::vector<double> pullback(
      const LatentState& x,
      std::span<const std::vector<double>> d_logits) const override;

  /// Subject groups over the pool (subject s owns maps
  /// s*maps_per_subject .. (s+1)*maps_per_subject - 1).
  PromptSpec prompt() const;
  std::vector<ProbField> attention(const LatentState& x) const;
  const SyntheticModelConfig& config() const { return cfg_; }
  const std::vector<double>& equilibrium() const { return equilibrium_; }

  static constexpr std::size_t kParamsPerMap = 4;

 private:
  void check_latent(const LatentState& x) const;

  SyntheticModelConfig cfg_;
  std::size_t num_maps_;
  std::vector<double> cell_u_;
  std::vector<double> cell_v_;
  std::vector<double> equilibrium_;
};

/// Convenience factory mirroring the common experiment knobs.
SyntheticModel synthetic_model(std::size_t num_subjects,
                               std::size_t maps_per_subject, GridShape grid,
                               std::uint64_t seed);

}  // namespace jedi
