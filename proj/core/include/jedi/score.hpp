// Copyright 2026 The jedi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "jedi/dump.hpp"
#include "jedi/extraction.hpp"

namespace jedi {

/// Blocks the score is read from by default.
inline constexpr BlockRange kScoreBlocks{7, 15};
/// Aggregates restricted to timesteps at or after this one are reported
/// alongside the full-range ones.
inline constexpr int kLateTimestep = 5;

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

/// Mean and population standard deviation. Empty input throws DataError.
MeanStd mean_std(std::span<const double> values);

/// Inter-group normalized JSD per (timestep, block).
class ScoreSeries {
 public:
  ScoreSeries(std::vector<int> timesteps, std::vector<int> blocks,
              std::vector<std::vector<double>> values);

  const std::vector<int>& timesteps() const { return timesteps_; }
  const std::vector<int>& blocks() const { return blocks_; }
  /// values()[ti][bi]
  const std::vector<std::vector<double>>& values() const { return values_; }
  double at(std::size_t ti, std::size_t bi) const { return values_[ti][bi]; }

  /// Across blocks, for one timestep position.
  MeanStd per_timestep(std::size_t ti) const;
  /// Across every (timestep, block) entry.
  MeanStd overall() const;
  /// Across entries with timestep >= from. Throws if none qualify.
  MeanStd overall_from(int from) const;

 private:
  std::vector<int> timesteps_;
  std::vector<int> blocks_;
  std::vector<std::vector<double>> values_;
};

/// Scores every timestep in `timesteps` (inclusive; only those present in
/// the dump are used, at least one must be) against every block in
/// `blocks` (all must be present). Each entry is the normalized JSD of the
/// per-subject mixtures of that block's extracted fields.
ScoreSeries disentanglement_score(const AttentionDump& dump, const PromptSpec& token_spec,
                                  BlockRange blocks, BlockRange timesteps);

/// Per-timestep series with the block mean, one column group per labelled
/// series: timestep, <l0>_0..<l0>_{B-1}, <l1>_0.., <l0>_mean, <l1>_mean.
/// With labels {"jedi", "base"}: timestep, jedi_0.., base_0.., jedi_mean, base_mean.
struct LabelledSeries {
  std::string label;
  const ScoreSeries* series;
};
void write_series_csv(std::ostream& out, std::span<const LabelledSeries> series);
void export_series_csv(const ScoreSeries& jedi, const ScoreSeries& base,
                       const std::filesystem::path& path);

/// JSON summary: overall and late-window mean/std, per-timestep stats.
std::string score_summary_json(const ScoreSeries& series);

}  // namespace jedi
