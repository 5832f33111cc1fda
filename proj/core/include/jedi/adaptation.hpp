// Copyright 2026 The jedi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jedi/gradient.hpp"
#include "jedi/objective.hpp"

namespace jedi {

struct LatentState {
  std::vector<double> x;
  std::size_t timestep = 0;

  bool operator==(const LatentState&) const = default;
};

/// One denoising call: the next latent and the attention pool observed at
/// the input latent.
struct StepOutput {
  LatentState next;
  std::vector<ProbField> attention;
};

/// Contract a sampler must satisfy to be driven by run_adaptation.
///
/// Attention maps are softmax(logits) with logits a differentiable function
/// of the latent. Implementations must be deterministic in (x, t, seed) and
/// must not keep mutable state across calls, so one instance can serve
/// concurrent runs.
class DiffusionModel {
 public:
  virtual ~DiffusionModel() = default;

  virtual std::size_t latent_dim() const = 0;
  virtual std::size_t pool_size() const = 0;

  /// x_0 for a given seed.
  virtual LatentState initial_state(std::uint64_t seed) const = 0;

  /// Denoising step x_t -> x_{t+1}, returning A_t alongside.
  virtual StepOutput step(const LatentState& x, std::uint64_t seed) const = 0;

  /// Attention logits at x, one vector per pool entry.
  virtual std::vector<std::vector<double>> attention_logits(
      const LatentState& x) const = 0;

  /// Vector-Jacobian product: maps d(loss)/d(logits) at x to d(loss)/dx.
  virtual std::vector<double> pullback(
      const LatentState& x,
      std::span<const std::vector<double>> d_logits) const = 0;
};

inline constexpr double kDefaultAlpha = 3e-3;
inline constexpr std::size_t kDefaultOptimizedSteps = 18;
inline constexpr std::size_t kDefaultTotalSteps = 28;

struct LoopConfig {
  double alpha = kDefaultAlpha;
  std::size_t optimized_steps = kDefaultOptimizedSteps;  // K
  std::size_t total_steps = kDefaultTotalSteps;          // T
  std::size_t inner_iterations = 1;
  ObjectiveConfig objective{};
  std::uint64_t seed = 0;

  /// Throws DataError on alpha < 0, K > T or zero inner iterations.
  void validate() const;
};

/// x' = x - alpha * sign(grad) with sign(0) = 0. Non-finite gradient
/// entries throw NumericalError.
LatentState fgsm_update(const LatentState& x, std::span<const double> grad,
                        double alpha);

struct TraceEntry {
  std::size_t timestep = 0;
  ObjectiveBreakdown breakdown;
  double intergroup_jsd = 0.0;
  std::size_t updates_so_far = 0;
};

struct AdaptationResult {
  LatentState final_state;
  std::vector<TraceEntry> trace;
  std::size_t updates = 0;
  std::size_t model_evaluations = 0;
  /// Set when a model call threw; trace holds the steps completed before it.
  std::optional<std::string> failure;
};

/// Test-time adaptation loop. For t < K the latent receives
/// `inner_iterations` sign-gradient updates computed from a separate
/// attention evaluation; every step then denoises with model.step.
AdaptationResult run_adaptation(const DiffusionModel& model,
                                const PromptSpec& prompt, const LoopConfig& cfg);

/// Writes timestep,intra,inter,diversity,total,intergroup_jsd.
void write_trace_csv(std::ostream& out, std::span<const TraceEntry> trace);

struct SweepPoint {
  double alpha = 0.0;
  double final_total = 0.0;
  double final_intergroup_jsd = 0.0;
  double displacement_inf = 0.0;  // |x_final - x_final(K=0)|_inf
  std::size_t updates = 0;
};

/// The nine learning rates of the published sweep, largest first.
std::vector<double> default_sweep_alphas();

/// One run per alpha on a shared seed, compared against the K = 0 run.
std::vector<SweepPoint> alpha_sweep(const DiffusionModel& model,
                                    const PromptSpec& prompt,
                                    const LoopConfig& cfg,
                                    std::span<const double> alphas);

/// Writes alpha,final_total,final_intergroup_jsd,displacement_inf,updates.
void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> points);

}  // namespace jedi
