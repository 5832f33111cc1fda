// Copyright 2026 The jedi Authors
// SPDX-License-Identifier: Apache-2.0

#include "jedi/toy.hpp"

#include <array>
#include <cmath>
#include <ostream>
#include <random>

#include "jedi/csv.hpp"
#include "jedi/errors.hpp"

namespace jedi {

namespace {

std::vector<ProbField> to_fields(const std::vector<std::vector<double>>& logits) {
  std::vector<ProbField> maps;
  maps.reserve(logits.size());
  for (const auto& z : logits) maps.push_back(ProbField::from_logits(z));
  return maps;
}

}  // namespace

PromptSpec toy_prompt() {
  return PromptSpec({{"first", {0, 1}}, {"second", {2, 3}}});
}

std::vector<std::vector<double>> toy_initial_logits(const ToyConfig& cfg) {
  if (cfg.cells < 2) throw DataError("toy problem needs at least two cells");
  std::mt19937_64 rng(cfg.seed * 0x9e3779b97f4a7c15ULL + 17);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);

  std::vector<std::vector<double>> logits;
  for (double centre : cfg.centres) {
    const double mu = centre + cfg.centre_jitter * jitter(rng);
    const double sigma = cfg.width * (1.0 + cfg.width_jitter * jitter(rng));
    std::vector<double> z(cfg.cells);
    for (std::size_t i = 0; i < cfg.cells; ++i) {
      const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(cfg.cells);
      z[i] = -0.5 * (u - mu) * (u - mu) / (sigma * sigma);
    }
    logits.push_back(std::move(z));
  }
  return logits;
}

ToyMetrics toy_metrics(std::span<const ProbField> maps, std::size_t iteration,
                       double loss) {
  const PromptSpec spec = toy_prompt();
  const auto groups = resolve_groups(spec, maps);
  ToyMetrics m;
  m.iteration = iteration;
  m.loss = loss;
  m.within_jsd = intra_coherence(spec, maps);
  m.between_jsd = intergroup_jsd(spec, maps);
  for (const auto& g : groups) m.mixture_entropy.push_back(entropy_normalized(mixture(g)));
  return m;
}

ToyResult run_toy(const ToyConfig& cfg) {
  if (cfg.frame_every == 0) throw DataError("frame_every must be >= 1");
  if (!(cfg.step >= 0.0) || !std::isfinite(cfg.step)) {
    throw DataError("toy step must be finite and non-negative");
  }
  const PromptSpec spec = toy_prompt();
  auto logits = toy_initial_logits(cfg);

  ToyResult result;
  auto record = [&](std::size_t iteration, double loss) {
    auto maps = to_fields(logits);
    result.metrics.push_back(toy_metrics(maps, iteration, loss));
    result.frames.push_back({iteration, std::move(maps)});
  };

  for (std::size_t it = 0; it <= cfg.iterations; ++it) {
    const auto grad = loss_gradient(spec, logits, cfg.objective);
    if (it % cfg.frame_every == 0 || it == cfg.iterations) record(it, grad.loss);
    if (it == cfg.iterations) break;
    for (std::size_t j = 0; j < logits.size(); ++j) {
      for (std::size_t i = 0; i < logits[j].size(); ++i) {
        const double g = grad.d_logits[j][i];
        if (!std::isfinite(g)) throw NumericalError("non-finite toy gradient");
        if (cfg.sign_updates) {
          logits[j][i] -= cfg.step * static_cast<double>((g > 0.0) - (g < 0.0));
        } else {
          logits[j][i] -= cfg.step * g;
        }
      }
    }
  }
  return result;
}

void write_toy_frames_csv(std::ostream& out, std::span<const ToyFrame> frames) {
  out << "iteration,cell";
  const std::size_t maps = frames.empty() ? 0 : frames.front().maps.size();
  for (std::size_t j = 0; j < maps; ++j) out << ",dist_" << j;
  out << '\n';
  for (const auto& f : frames) {
    const std::size_t d = f.maps.front().size();
    for (std::size_t i = 0; i < d; ++i) {
      out << f.iteration << ',' << i;
      for (const auto& p : f.maps) out << ',' << csv::format(p[i]);
      out << '\n';
    }
  }
}

void write_toy_metrics_csv(std::ostream& out, std::span<const ToyMetrics> metrics) {
  out << "iteration,loss,within_jsd,between_jsd";
  const std::size_t groups = metrics.empty() ? 0 : metrics.front().mixture_entropy.size();
  for (std::size_t s = 0; s < groups; ++s) out << ",entropy_" << s;
  out << '\n';
  for (const auto& m : metrics) {
    out << m.iteration << ',' << csv::format(m.loss) << ','
        << csv::format(m.within_jsd) << ',' << csv::format(m.between_jsd);
    for (double h : m.mixture_entropy) out << ',' << csv::format(h);
    out << '\n';
  }
}

}  // namespace jedi
