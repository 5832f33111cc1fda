// Copyright 2026 The jedi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "jedi/gradient.hpp"

namespace jedi {

/// Four overlapping discretized 1-D Gaussians in two groups, optimized
/// directly in logit space. Maps 0,1 form the first group and maps 2,3 the
/// second.
struct ToyConfig {
  std::size_t cells = 64;
  /// Centres (in [0, 1]) of the four Gaussians before jitter.
  std::array<double, 4> centres{0.42, 0.45, 0.55, 0.58};
  double width = 0.1;
  /// Uniform jitter half-width for centres; widths get +-10 % of this scale.
  double centre_jitter = 0.02;
  double width_jitter = 0.1;
  std::size_t iterations = 100;
  double step = 1.0;
  bool sign_updates = false;  // true: step along sign(gradient)
  ObjectiveConfig objective{};
  std::uint64_t seed = 0;
  /// Record a frame every `frame_every` iterations (and always the last).
  std::size_t frame_every = 10;
};

struct ToyMetrics {
  std::size_t iteration = 0;
  double loss = 0.0;
  double within_jsd = 0.0;   // mean normalized JSD inside each group
  double between_jsd = 0.0;  // normalized JSD of the group mixtures
  std::vector<double> mixture_entropy;  // normalized, one per group
};

struct ToyFrame {
  std::size_t iteration = 0;
  std::vector<ProbField> maps;
};

struct ToyResult {
  std::vector<ToyMetrics> metrics;  // one per frame
  std::vector<ToyFrame> frames;

  const ToyMetrics& initial() const { return metrics.front(); }
  const ToyMetrics& final() const { return metrics.back(); }
};

/// The two-group subject layout used by the toy problem.
PromptSpec toy_prompt();

/// Initial logits for a seed: Gaussian centres and widths jittered around
/// a fixed overlapping layout.
std::vector<std::vector<double>> toy_initial_logits(const ToyConfig& cfg);

ToyMetrics toy_metrics(std::span<const ProbField> maps, std::size_t iteration,
                       double loss);

ToyResult run_toy(const ToyConfig& cfg);

/// Long-format frames: iteration,cell,dist_0,dist_1,dist_2,dist_3.
void write_toy_frames_csv(std::ostream& out, std::span<const ToyFrame> frames);

/// iteration,loss,within_jsd,between_jsd,entropy_0,entropy_1.
void write_toy_metrics_csv(std::ostream& out, std::span<const ToyMetrics> metrics);

}  // namespace jedi
