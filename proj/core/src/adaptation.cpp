// Copyright 2026 The jedi Authors
// SPDX-License-Identifier: Apache-2.0

#include "jedi/adaptation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "jedi/csv.hpp"
#include "jedi/errors.hpp"

namespace jedi {

void LoopConfig::validate() const {
  if (!std::isfinite(alpha) || alpha < 0.0) {
    throw DataError("alpha must be finite and non-negative");
  }
  if (optimized_steps > total_steps) {
    throw DataError("optimization horizon K=" + std::to_string(optimized_steps) +
                    " exceeds total steps T=" + std::to_string(total_steps));
  }
  if (inner_iterations == 0) throw DataError("inner_iterations must be >= 1");
  if (objective.kind == LossKind::jedi) objective.loss.validate();
  if (objective.kind == LossKind::nt_xent &&
      (!(objective.temperature > 0.0) || !std::isfinite(objective.temperature))) {
    throw DataError("nt_xent temperature must be positive and finite");
  }
}

LatentState fgsm_update(const LatentState& x, std::span<const double> grad,
                        double alpha) {
  if (grad.size() != x.x.size()) {
    throw DataError("gradient has " + std::to_string(grad.size()) +
                    " entries, latent has " + std::to_string(x.x.size()));
  }
  LatentState out = x;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double g = grad[i];
    if (!std::isfinite(g)) {
      throw NumericalError("non-finite gradient entry at index " + std::to_string(i));
    }
    if (g > 0.0) {
      out.x[i] -= alpha;
    } else if (g < 0.0) {
      out.x[i] += alpha;
    }
  }
  return out;
}

AdaptationResult run_adaptation(const DiffusionModel& model,
                                const PromptSpec& prompt, const LoopConfig& cfg) {
  cfg.validate();
  if (prompt.min_pool_size() > model.pool_size()) {
    throw DataError("prompt spec references maps the model does not produce");
  }

  AdaptationResult result;
  result.trace.reserve(cfg.total_steps);
  LatentState x = model.initial_state(cfg.seed);
  x.timestep = 0;

  try {
    for (std::size_t t = 0; t < cfg.total_steps; ++t) {
      x.timestep = t;
      if (t < cfg.optimized_steps) {
        for (std::size_t it = 0; it < cfg.inner_iterations; ++it) {
          const auto logits = model.attention_logits(x);
          ++result.model_evaluations;
          const auto grad = loss_gradient(prompt, logits, cfg.objective);
          const auto grad_x = model.pullback(x, grad.d_logits);
          x = fgsm_update(x, grad_x, cfg.alpha);
          ++result.updates;
        }
      }
      StepOutput out = model.step(x, cfg.seed);
      ++result.model_evaluations;

      TraceEntry entry;
      entry.timestep = t;
      entry.breakdown = jedi_loss(prompt, out.attention, cfg.objective.loss);
      entry.intergroup_jsd = intergroup_jsd(prompt, out.attention);
      entry.updates_so_far = result.updates;
      result.trace.push_back(entry);

      x = std::move(out.next);
      x.timestep = t + 1;
    }
  } catch (const std::exception& e) {
    result.failure = "step " + std::to_string(x.timestep) + ": " + e.what();
  }
  result.final_state = std::move(x);
  return result;
}

void write_trace_csv(std::ostream& out, std::span<const TraceEntry> trace) {
  out << "timestep,intra,inter,diversity,total,intergroup_jsd\n";
  for (const auto& e : trace) {
    out << e.timestep << ',' << csv::format(e.breakdown.intra) << ','
        << csv::format(e.breakdown.inter) << ','
        << csv::format(e.breakdown.diversity) << ','
        << csv::format(e.breakdown.total) << ','
        << csv::format(e.intergroup_jsd) << '\n';
  }
}

std::vector<double> default_sweep_alphas() {
  return {5e-1, 3e-1, 1e-1, 5e-2, 3e-2, 1e-2, 5e-3, 3e-3, 1e-3};
}

std::vector<SweepPoint> alpha_sweep(const DiffusionModel& model,
                                    const PromptSpec& prompt,
                                    const LoopConfig& cfg,
                                    std::span<const double> alphas) {
  LoopConfig base_cfg = cfg;
  base_cfg.optimized_steps = 0;
  const auto baseline = run_adaptation(model, prompt, base_cfg);
  if (baseline.failure) throw NumericalError("baseline run failed: " + *baseline.failure);

  std::vector<SweepPoint> points;
  points.reserve(alphas.size());
  for (double alpha : alphas) {
    LoopConfig run_cfg = cfg;
    run_cfg.alpha = alpha;
    const auto run = run_adaptation(model, prompt, run_cfg);
    if (run.failure) throw NumericalError("sweep run failed: " + *run.failure);

    SweepPoint p;
    p.alpha = alpha;
    p.updates = run.updates;
    if (!run.trace.empty()) {
      p.final_total = run.trace.back().breakdown.total;
      p.final_intergroup_jsd = run.trace.back().intergroup_jsd;
    }
    for (std::size_t i = 0; i < run.final_state.x.size(); ++i) {
      p.displacement_inf = std::max(
          p.displacement_inf, std::abs(run.final_state.x[i] - baseline.final_state.x[i]));
    }
    points.push_back(p);
  }
  return points;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> points) {
  out << "alpha,final_total,final_intergroup_jsd,displacement_inf,updates\n";
  for (const auto& p : points) {
    out << csv::format(p.alpha) << ',' << csv::format(p.final_total) << ','
        << csv::format(p.final_intergroup_jsd) << ','
        << csv::format(p.displacement_inf) << ',' << p.updates << '\n';
  }
}

}  // namespace jedi
