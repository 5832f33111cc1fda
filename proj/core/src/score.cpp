// Copyright 2026 The jedi Authors
// SPDX-License-Identifier: Apache-2.0

#include "jedi/score.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include <nlohmann/json.hpp>

#include "jedi/csv.hpp"
#include "jedi/errors.hpp"
#include "jedi/objective.hpp"

namespace jedi {

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw DataError("mean/std of an empty set");
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

ScoreSeries::ScoreSeries(std::vector<int> timesteps, std::vector<int> blocks,
                         std::vector<std::vector<double>> values)
    : timesteps_(std::move(timesteps)), blocks_(std::move(blocks)),
      values_(std::move(values)) {
  if (timesteps_.empty() || blocks_.empty()) throw DataError("score series is empty");
  if (values_.size() != timesteps_.size()) throw DataError("score series row count mismatch");
  for (const auto& row : values_) {
    if (row.size() != blocks_.size()) throw DataError("score series column count mismatch");
    for (double v : row) {
      if (!(v >= 0.0 && v <= 1.0 + 1e-9)) {
        throw DataError("score value " + std::to_string(v) + " outside [0, 1]");
      }
    }
  }
}

MeanStd ScoreSeries::per_timestep(std::size_t ti) const { return mean_std(values_.at(ti)); }

MeanStd ScoreSeries::overall() const {
  return overall_from(std::numeric_limits<int>::min());
}

MeanStd ScoreSeries::overall_from(int from) const {
  std::vector<double> flat;
  for (std::size_t ti = 0; ti < timesteps_.size(); ++ti) {
    if (timesteps_[ti] < from) continue;
    flat.insert(flat.end(), values_[ti].begin(), values_[ti].end());
  }
  if (flat.empty()) {
    throw DataError("no timesteps at or after " + std::to_string(from));
  }
  return mean_std(flat);
}

ScoreSeries disentanglement_score(const AttentionDump& dump, const PromptSpec& token_spec,
                                  BlockRange blocks, BlockRange timesteps) {
  if (blocks.count() == 0) throw DataError("empty block range");
  if (timesteps.count() == 0) throw DataError("empty timestep range");

  const auto& mf = dump.manifest();
  std::vector<std::size_t> block_pos;
  std::vector<int> block_ids;
  for (int b = blocks.lo; b <= blocks.hi; ++b) {
    bool found = false;
    for (std::size_t bi = 0; bi < mf.blocks.size(); ++bi) {
      if (mf.blocks[bi] == b) {
        block_pos.push_back(bi);
        found = true;
        break;
      }
    }
    if (!found) throw DataError("block " + std::to_string(b) + " is missing from the dump");
    block_ids.push_back(b);
  }

  std::vector<int> ts_ids;
  std::vector<std::vector<double>> values;
  for (std::size_t ti = 0; ti < mf.timesteps.size(); ++ti) {
    if (!timesteps.contains(mf.timesteps[ti])) continue;
    std::vector<double> row;
    row.reserve(block_pos.size());
    for (std::size_t bi : block_pos) {
      const JointAttentionMatrix a = dump.matrix_at(ti, bi);
      const auto extracted = extract_pool(std::span(&a, 1), token_spec,
                                          BlockRange{a.block_index(), a.block_index()});
      row.push_back(intergroup_jsd(extracted.spec, extracted.pool));
    }
    ts_ids.push_back(mf.timesteps[ti]);
    values.push_back(std::move(row));
  }
  if (ts_ids.empty()) {
    throw DataError("no dump timesteps fall inside " + std::to_string(timesteps.lo) + ":" +
                    std::to_string(timesteps.hi));
  }
  return ScoreSeries(std::move(ts_ids), std::move(block_ids), std::move(values));
}

void write_series_csv(std::ostream& out, std::span<const LabelledSeries> series) {
  if (series.empty()) throw DataError("no series to export");
  const ScoreSeries& first = *series.front().series;
  for (const auto& s : series) {
    if (s.series->timesteps() != first.timesteps() ||
        s.series->blocks().size() != first.blocks().size()) {
      throw DataError("series '" + s.label + "' does not match the shape of '" +
                      series.front().label + "'");
    }
  }
  const std::size_t num_blocks = first.blocks().size();

  out << "timestep";
  for (const auto& s : series) {
    for (std::size_t b = 0; b < num_blocks; ++b) out << ',' << s.label << '_' << b;
  }
  for (const auto& s : series) out << ',' << s.label << "_mean";
  out << '\n';

  for (std::size_t ti = 0; ti < first.timesteps().size(); ++ti) {
    out << first.timesteps()[ti];
    for (const auto& s : series) {
      for (std::size_t b = 0; b < num_blocks; ++b) out << ',' << csv::format(s.series->at(ti, b));
    }
    for (const auto& s : series) out << ',' << csv::format(s.series->per_timestep(ti).mean);
    out << '\n';
  }
}

void export_series_csv(const ScoreSeries& jedi, const ScoreSeries& base,
                       const std::filesystem::path& path) {
  const LabelledSeries series[] = {{"jedi", &jedi}, {"base", &base}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot create '" + path.string() + "'");
  write_series_csv(out, series);
  if (!out) throw DataError("short write to '" + path.string() + "'");
}

std::string score_summary_json(const ScoreSeries& series) {
  nlohmann::ordered_json j;
  const MeanStd all = series.overall();
  j["overall_mean"] = all.mean;
  j["overall_std"] = all.std;
  j["std_kind"] = "population";
  j["late_from_timestep"] = kLateTimestep;
  bool any_late = false;
  for (int t : series.timesteps()) any_late = any_late || t >= kLateTimestep;
  if (any_late) {
    const MeanStd late = series.overall_from(kLateTimestep);
    j["late_mean"] = late.mean;
    j["late_std"] = late.std;
  } else {
    j["late_mean"] = nullptr;
    j["late_std"] = nullptr;
  }
  j["blocks"] = series.blocks();
  auto per = nlohmann::ordered_json::array();
  for (std::size_t ti = 0; ti < series.timesteps().size(); ++ti) {
    const MeanStd s = series.per_timestep(ti);
    per.push_back({{"timestep", series.timesteps()[ti]}, {"mean", s.mean}, {"std", s.std}});
  }
  j["per_timestep"] = per;
  return j.dump(2) + "\n";
}

}  // namespace jedi
