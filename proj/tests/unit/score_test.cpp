// Copyright 2026 The jedi Authors
// SPDX-License-Identifier: Apache-2.0

#include "jedi/score.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "jedi/csv.hpp"
#include "jedi/errors.hpp"
#include "support.hpp"

namespace jedi {
namespace {

using testing::iota_ints;

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

TEST(MeanStd, Population) {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const MeanStd s = mean_std(v);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.std, std::sqrt(1.25));
  EXPECT_THROW(mean_std(std::vector<double>{}), DataError);
}

TEST(ScoreSeries, Validation) {
  EXPECT_THROW(ScoreSeries({0}, {7}, {{1.5}}), DataError);
  EXPECT_THROW(ScoreSeries({0, 1}, {7}, {{0.5}}), DataError);
  EXPECT_THROW(ScoreSeries({}, {}, {}), DataError);
}

TEST(ScoreSeries, Aggregation) {
  const ScoreSeries s({3, 4, 5, 6}, {7, 8}, {{0.1, 0.3}, {0.2, 0.2}, {0.6, 0.8}, {0.4, 0.4}});
  EXPECT_NEAR(s.overall().mean, 3.0 / 8.0, 1e-12);
  EXPECT_NEAR(s.overall_from(5).mean, 0.55, 1e-12);
  EXPECT_NEAR(s.per_timestep(0).std, 0.1, 1e-12);
  EXPECT_THROW(s.overall_from(7), DataError);
}

TEST(Score, DisjointDumpScoresOne) {
  const auto dump = testing::disjoint_dump(16, iota_ints(0, 4), iota_ints(7, 15));
  const ScoreSeries s = disentanglement_score(dump, dump.token_spec(), kScoreBlocks, {0, 4});
  for (const auto& row : s.values()) {
    for (double v : row) EXPECT_NEAR(v, 1.0, 1e-12);
  }
  EXPECT_NEAR(s.overall().mean, 1.0, 1e-12);
  EXPECT_NEAR(s.overall().std, 0.0, 1e-12);
}

TEST(Score, IdenticalDumpScoresZero) {
  const auto dump = testing::identical_dump(9, iota_ints(0, 3), iota_ints(7, 15), 3);
  const ScoreSeries s = disentanglement_score(dump, dump.token_spec(), kScoreBlocks, {0, 3});
  EXPECT_LT(s.overall().mean, 1e-15);
  EXPECT_LT(s.overall().std, 1e-15);
}

TEST(Score, OverlapRampIsMonotoneAndMatchesOracle) {
  const auto dump = testing::overlap_ramp_dump();
  const ScoreSeries s = disentanglement_score(dump, dump.token_spec(), {0, 0}, {0, 9});
  ASSERT_EQ(s.timesteps().size(), 10u);
  for (std::size_t k = 0; k < 10; ++k) {
    const auto a = dump.matrix_at(k, 0);
    std::vector<std::vector<double>> fields;
    for (std::size_t tok = 0; tok < 2; ++tok) {
      std::vector<double> z(a.n());
      for (std::size_t j = 0; j < a.n(); ++j) z[j] = (a(a.n() + tok, j) + a(j, a.n() + tok)) / std::sqrt(2.0);
      fields.push_back(testing::oracle_softmax(z));
    }
    EXPECT_NEAR(s.at(k, 0), testing::oracle_jsd(fields) / std::log(2.0), 1e-12);
    if (k > 0) EXPECT_LE(s.at(k, 0), s.at(k - 1, 0) + 1e-9);
  }
  EXPECT_GT(s.at(0, 0), 0.5);
  EXPECT_LT(s.at(9, 0), 1e-12);
}

TEST(Score, MissingBlockAndEmptyRange) {
  const auto dump = testing::identical_dump(4, {0}, {7, 8}, 1);
  EXPECT_THROW(disentanglement_score(dump, dump.token_spec(), {7, 9}, {0, 0}), DataError);
  EXPECT_THROW(disentanglement_score(dump, dump.token_spec(), {7, 8}, {3, 5}), DataError);
}

TEST(SeriesCsv, TwoSeriesShape) {
  const auto a = testing::series_dump(true);
  const auto b = testing::series_dump(false);
  const ScoreSeries sa = disentanglement_score(a, a.token_spec(), kScoreBlocks, {0, 27});
  const ScoreSeries sb = disentanglement_score(b, b.token_spec(), kScoreBlocks, {0, 27});
  const LabelledSeries both[] = {{"jedi", &sa}, {"base", &sb}};
  std::ostringstream os;
  write_series_csv(os, both);
  const auto rows = lines(os.str());
  ASSERT_EQ(rows.size(), 29u);
  const auto header = csv::split(rows[0]);
  ASSERT_EQ(header.size(), 2u * 9u + 3u);
  EXPECT_EQ(header[0], "timestep");
  EXPECT_EQ(header[1], "jedi_0");
  EXPECT_EQ(header[9], "jedi_8");
  EXPECT_EQ(header[10], "base_0");
  EXPECT_EQ(header[19], "jedi_mean");
  EXPECT_EQ(header[20], "base_mean");
  for (std::size_t r = 1; r < rows.size(); ++r) EXPECT_EQ(csv::split(rows[r]).size(), 21u);
}

TEST(SeriesCsv, SingleBlockHasFiveColumns) {
  const ScoreSeries a({0, 1}, {7}, {{0.25}, {0.5}});
  const ScoreSeries b({0, 1}, {7}, {{0.125}, {1.0}});
  const LabelledSeries both[] = {{"jedi", &a}, {"base", &b}};
  std::ostringstream os;
  write_series_csv(os, both);
  EXPECT_EQ(os.str(), "timestep,jedi_0,base_0,jedi_mean,base_mean\n"
                      "0,0.25,0.125,0.25,0.125\n"
                      "1,0.5,1,0.5,1\n");
}

TEST(SeriesCsv, ParseBackIsExact) {
  const auto a = testing::series_dump(true);
  const ScoreSeries s = disentanglement_score(a, a.token_spec(), kScoreBlocks, {0, 27});
  const LabelledSeries one[] = {{"jedi", &s}};
  std::ostringstream os;
  write_series_csv(os, one);
  const auto rows = lines(os.str());
  for (std::size_t t = 0; t < 28; ++t) {
    const auto cells = csv::split(rows[t + 1]);
    EXPECT_EQ(std::stoi(cells[0]), s.timesteps()[t]);
    for (std::size_t b = 0; b < 9; ++b) EXPECT_EQ(csv::parse_double(cells[1 + b]), s.at(t, b));
    EXPECT_EQ(csv::parse_double(cells[10]), s.per_timestep(t).mean);
  }
}

TEST(SeriesCsv, MismatchedShapes) {
  const ScoreSeries a({0, 1}, {7}, {{0.25}, {0.5}});
  const ScoreSeries b({0, 2}, {7}, {{0.25}, {0.5}});
  const LabelledSeries both[] = {{"jedi", &a}, {"base", &b}};
  std::ostringstream os;
  EXPECT_THROW(write_series_csv(os, both), DataError);
}

TEST(SummaryJson, Fields) {
  const ScoreSeries s({3, 4, 5, 6}, {7, 8}, {{0.1, 0.3}, {0.2, 0.2}, {0.6, 0.8}, {0.4, 0.4}});
  const auto j = nlohmann::json::parse(score_summary_json(s));
  EXPECT_NEAR(j["overall_mean"].get<double>(), 0.375, 1e-12);
  EXPECT_EQ(j["std_kind"], "population");
  EXPECT_EQ(j["late_from_timestep"], 5);
  EXPECT_NEAR(j["late_mean"].get<double>(), 0.55, 1e-12);
  EXPECT_EQ(j["per_timestep"].size(), 4u);
  EXPECT_EQ(j["blocks"], nlohmann::json::array({7, 8}));

  const ScoreSeries early({0, 1}, {7}, {{0.1}, {0.2}});
  EXPECT_TRUE(nlohmann::json::parse(score_summary_json(early))["late_mean"].is_null());
}

}  // namespace
}  // namespace jedi
