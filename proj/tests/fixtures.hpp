// Copyright 2026 The jedi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "jedi/dump.hpp"

namespace jedi::testing {

inline DumpManifest two_token_manifest(std::size_t n, AttentionKind kind,
                                       std::vector<int> timesteps, std::vector<int> blocks) {
  DumpManifest mf;
  mf.n = n;
  mf.m = 2;
  mf.kind = kind;
  mf.timesteps = std::move(timesteps);
  mf.blocks = std::move(blocks);
  mf.token_labels = {"cat", "dog"};
  mf.subject_groups = {{"cat", {0}}, {"dog", {1}}};
  return mf;
}

inline std::vector<int> iota_ints(int lo, int hi) {
  std::vector<int> v;
  for (int i = lo; i <= hi; ++i) v.push_back(i);
  return v;
}

/// Softmaxed dump where token 0 only touches the first half of the image and
/// token 1 only the second half, at every timestep and block.
inline AttentionDump disjoint_dump(std::size_t n, std::vector<int> timesteps,
                                   std::vector<int> blocks) {
  const DumpManifest mf =
      two_token_manifest(n, AttentionKind::softmaxed, std::move(timesteps), std::move(blocks));
  const std::size_t side = mf.side();
  const std::size_t half = n / 2;
  std::vector<float> a(side * side, 0.0f);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t owner = r < half ? 0 : 1;
    a[r * side + n + owner] = 0.5f;
    for (std::size_t c = 0; c < n; ++c) a[r * side + c] = 0.5f / static_cast<float>(n);
  }
  for (std::size_t i = 0; i < 2; ++i) {
    const std::size_t lo = i == 0 ? 0 : half;
    const std::size_t hi = i == 0 ? half : n;
    for (std::size_t c = lo; c < hi; ++c) {
      a[(n + i) * side + c] = 1.0f / static_cast<float>(hi - lo);
    }
  }
  std::vector<float> payload;
  for (std::size_t k = 0; k < mf.num_matrices(); ++k) payload.insert(payload.end(), a.begin(), a.end());
  return AttentionDump(mf, std::move(payload));
}

/// Raw-logit dump where both tokens have the same (random) row and column.
inline AttentionDump identical_dump(std::size_t n, std::vector<int> timesteps,
                                    std::vector<int> blocks, std::uint64_t seed) {
  const DumpManifest mf =
      two_token_manifest(n, AttentionKind::raw_logits, std::move(timesteps), std::move(blocks));
  const std::size_t side = mf.side();
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, 2.0f);
  std::vector<float> payload;
  for (std::size_t k = 0; k < mf.num_matrices(); ++k) {
    std::vector<float> a(side * side);
    for (auto& v : a) v = g(rng);
    for (std::size_t c = 0; c < side; ++c) a[(n + 1) * side + c] = a[n * side + c];
    for (std::size_t r = 0; r < side; ++r) a[r * side + n + 1] = a[r * side + n];
    payload.insert(payload.end(), a.begin(), a.end());
  }
  return AttentionDump(mf, std::move(payload));
}

/// Raw-logit matrix on a g x g grid where token i is a Gaussian bump centred at
/// column position centres[i] (row centre fixed), written into its row only.
inline std::vector<float> blob_matrix(std::size_t g, double c0, double c1, double sigma) {
  const std::size_t n = g * g;
  const std::size_t side = n + 2;
  std::vector<float> a(side * side, 0.0f);
  const double centres[2] = {c0, c1};
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t r = 0; r < g; ++r) {
      for (std::size_t c = 0; c < g; ++c) {
        const double u = (static_cast<double>(c) + 0.5) / static_cast<double>(g);
        const double v = (static_cast<double>(r) + 0.5) / static_cast<double>(g);
        const double d2 = (u - centres[i]) * (u - centres[i]) + (v - 0.5) * (v - 0.5);
        a[(n + i) * side + r * g + c] = static_cast<float>(-0.5 * d2 / (sigma * sigma));
      }
    }
  }
  return a;
}

/// Ten timesteps; at step k the two blobs sit 0.6 * (1 - k/9) apart, so the
/// last step has them on top of each other.
inline AttentionDump overlap_ramp_dump() {
  constexpr std::size_t g = 8;
  const DumpManifest mf =
      two_token_manifest(g * g, AttentionKind::raw_logits, iota_ints(0, 9), {0});
  std::vector<float> payload;
  for (int k = 0; k <= 9; ++k) {
    const double gap = 0.6 * (1.0 - k / 9.0);
    const auto a = blob_matrix(g, 0.5 - gap / 2, 0.5 + gap / 2, 0.12);
    payload.insert(payload.end(), a.begin(), a.end());
  }
  return AttentionDump(mf, std::move(payload));
}

/// Golden pair: 28 timesteps x blocks 7..15 on a 4x4 grid. The adapted
/// run separates the two subjects faster than the baseline.
inline AttentionDump series_dump(bool adapted) {
  constexpr std::size_t g = 4;
  const DumpManifest mf =
      two_token_manifest(g * g, AttentionKind::raw_logits, iota_ints(0, 27), iota_ints(7, 15));
  std::vector<float> payload;
  for (int t = 0; t <= 27; ++t) {
    for (int b = 7; b <= 15; ++b) {
      const double progress = 1.0 - std::exp(-t / (adapted ? 5.0 : 12.0));
      const double gap = (adapted ? 0.55 : 0.3) * progress + 0.02 * ((b * 7 + t) % 5);
      const double sigma = 0.3 - 0.01 * (b - 7);
      const auto a = blob_matrix(g, 0.5 - gap / 2, 0.5 + gap / 2, sigma);
      payload.insert(payload.end(), a.begin(), a.end());
    }
  }
  return AttentionDump(mf, std::move(payload));
}

}  // namespace jedi::testing
