// Copyright 2026 The jedi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "jedi/distributions.hpp"

namespace jedi::testing {

inline std::filesystem::path data_dir() { return JEDI_TEST_DATA_DIR; }

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("jedi-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Point on the simplex with exponentially distributed weights; `sparsity`
/// zeroes that fraction of cells (at least one cell always survives).
inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t d,
                                          double sparsity = 0.0) {
  std::exponential_distribution<double> e(1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(d);
  double sum = 0.0;
  for (auto& v : p) {
    v = u(rng) < sparsity ? 0.0 : e(rng);
    sum += v;
  }
  if (sum == 0.0) {
    p[std::uniform_int_distribution<std::size_t>(0, d - 1)(rng)] = 1.0;
    return p;
  }
  for (auto& v : p) v /= sum;
  return p;
}

inline std::vector<double> random_logits(std::mt19937_64& rng, std::size_t d,
                                         double scale = 2.0) {
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> z(d);
  for (auto& v : z) v = g(rng);
  return z;
}

// Plain-sum oracles, written without reference to the library code.

inline double oracle_entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

inline double oracle_jsd(const std::vector<std::vector<double>>& ps) {
  const std::size_t d = ps.front().size();
  std::vector<double> m(d, 0.0);
  for (const auto& p : ps) {
    for (std::size_t i = 0; i < d; ++i) m[i] += p[i] / static_cast<double>(ps.size());
  }
  double total = 0.0;
  for (const auto& p : ps) {
    for (std::size_t i = 0; i < d; ++i) {
      if (p[i] > 0.0) total += p[i] * std::log(p[i] / m[i]);
    }
  }
  return total / static_cast<double>(ps.size());
}

inline std::vector<double> oracle_softmax(const std::vector<double>& z) {
  double mx = z.front();
  for (double v : z) mx = v > mx ? v : mx;
  std::vector<double> p(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - mx);
    sum += p[i];
  }
  for (auto& v : p) v /= sum;
  return p;
}

}  // namespace jedi::testing
