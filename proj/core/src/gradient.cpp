// Copyright 2026 The jedi Authors
// SPDX-License-Identifier: Apache-2.0

#include "jedi/gradient.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "jedi/errors.hpp"

namespace jedi {

LossKind parse_loss_kind(std::string_view name) {
  if (name == "jedi") return LossKind::jedi;
  if (name == "nt-xent" || name == "nt_xent" || name == "ntxent") {
    return LossKind::nt_xent;
  }
  throw DataError("unknown loss '" + std::string(name) + "'");
}

std::string_view to_string(LossKind kind) {
  return kind == LossKind::jedi ? "jedi" : "nt-xent";
}

namespace {

using Vec = std::vector<double>;

double safe_log(double v) { return std::log(std::max(v, kLogFloor)); }

std::vector<ProbField> materialize(std::span<const Vec> logits) {
  std::vector<ProbField> pool;
  pool.reserve(logits.size());
  for (const auto& z : logits) pool.push_back(ProbField::from_logits(z));
  return pool;
}

void check_pool(const PromptSpec& spec, std::span<const Vec> logits) {
  if (spec.min_pool_size() > logits.size()) {
    throw DataError("prompt spec references more maps than logits supplied");
  }
  const std::size_t d = logits[spec[0].map_indices[0]].size();
  for (std::size_t j : spec.all_indices()) {
    if (logits[j].size() != d) throw DataError("logit vectors disagree on dimension");
  }
  if (d == 0) throw DataError("logit vectors must be non-empty");
}

// dL/dp for the three JEDI terms, accumulated into d_probs.
void jedi_backward(const PromptSpec& spec, const std::vector<Vec>& probs,
                   const LossConfig& cfg, std::vector<Vec>& d_probs) {
  const std::size_t num_s = spec.num_subjects();
  const std::size_t d = probs[spec[0].map_indices[0]].size();
  const double inv_s = 1.0 / static_cast<double>(num_s);

  std::vector<Vec> mix(num_s, Vec(d, 0.0));
  for (std::size_t s = 0; s < num_s; ++s) {
    const auto& members = spec[s].map_indices;
    for (std::size_t j : members) {
      for (std::size_t i = 0; i < d; ++i) mix[s][i] += probs[j][i];
    }
    for (double& v : mix[s]) v /= static_cast<double>(members.size());
  }

  std::vector<Vec> d_mix(num_s, Vec(d, 0.0));

  if (cfg.enable_intra) {
    for (std::size_t s = 0; s < num_s; ++s) {
      const auto& members = spec[s].map_indices;
      const std::size_t n = members.size();
      if (n < 2) continue;
      const double scale =
          inv_s / (std::log(static_cast<double>(n)) * static_cast<double>(n));
      for (std::size_t j : members) {
        for (std::size_t i = 0; i < d; ++i) {
          d_probs[j][i] += scale * (safe_log(probs[j][i]) - safe_log(mix[s][i]));
        }
      }
    }
  }

  if (cfg.enable_inter && num_s >= 2) {
    Vec mbar(d, 0.0);
    for (const auto& m : mix) {
      for (std::size_t i = 0; i < d; ++i) mbar[i] += m[i];
    }
    for (double& v : mbar) v *= inv_s;
    // L = 1 - JSD(M) / log S
    const double scale = -inv_s / std::log(static_cast<double>(num_s));
    for (std::size_t s = 0; s < num_s; ++s) {
      for (std::size_t i = 0; i < d; ++i) {
        d_mix[s][i] += scale * (safe_log(mix[s][i]) - safe_log(mbar[i]));
      }
    }
  }

  if (cfg.enable_diversity && d >= 2 && cfg.lambda != 0.0) {
    // L = lambda / S * sum_s (1 - H(m_s) / log d)
    const double scale = cfg.lambda * inv_s / std::log(static_cast<double>(d));
    for (std::size_t s = 0; s < num_s; ++s) {
      for (std::size_t i = 0; i < d; ++i) {
        d_mix[s][i] += scale * (safe_log(mix[s][i]) + 1.0);
      }
    }
  }

  for (std::size_t s = 0; s < num_s; ++s) {
    const auto& members = spec[s].map_indices;
    const double share = 1.0 / static_cast<double>(members.size());
    for (std::size_t j : members) {
      for (std::size_t i = 0; i < d; ++i) d_probs[j][i] += share * d_mix[s][i];
    }
  }
}

// dL/dp for NT-Xent over cosine similarities. Returns the loss value.
double nt_xent_backward(const PromptSpec& spec, const std::vector<Vec>& probs,
                        double tau, std::vector<Vec>& d_probs) {
  std::vector<std::size_t> idx;
  std::vector<std::size_t> group_of;
  for (std::size_t s = 0; s < spec.num_subjects(); ++s) {
    for (std::size_t j : spec[s].map_indices) {
      idx.push_back(j);
      group_of.push_back(s);
    }
  }
  const std::size_t n = idx.size();
  if (n < 2) throw DataError("nt_xent needs at least two maps");
  const std::size_t d = probs[idx[0]].size();

  Vec norm(n);
  for (std::size_t a = 0; a < n; ++a) {
    double sq = 0.0;
    for (double v : probs[idx[a]]) sq += v * v;
    norm[a] = std::sqrt(sq);
    if (norm[a] == 0.0) throw NumericalError("nt_xent: zero-norm map");
  }
  std::vector<Vec> sim(n, Vec(n, 0.0));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      double dot = 0.0;
      for (std::size_t i = 0; i < d; ++i) dot += probs[idx[a]][i] * probs[idx[b]][i];
      sim[a][b] = sim[b][a] = dot / (norm[a] * norm[b]);
    }
  }

  std::size_t pairs = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a != b && group_of[a] == group_of[b]) ++pairs;
    }
  }
  if (pairs == 0) throw DataError("nt_xent needs at least one positive pair");
  const double inv_pairs = 1.0 / static_cast<double>(pairs);

  // Adjoint of the similarity matrix (row = anchor).
  std::vector<Vec> d_sim(n, Vec(n, 0.0));
  double loss = 0.0;
  Vec w(n);
  for (std::size_t a = 0; a < n; ++a) {
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < n; ++b) {
      if (b != a) hi = std::max(hi, sim[a][b] / tau);
    }
    double denom = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      w[b] = b == a ? 0.0 : std::exp(sim[a][b] / tau - hi);
      denom += w[b];
    }
    const double log_denom = hi + std::log(denom);
    std::size_t positives = 0;
    for (std::size_t b = 0; b < n; ++b) {
      if (b == a || group_of[b] != group_of[a]) continue;
      ++positives;
      loss += log_denom - sim[a][b] / tau;
      d_sim[a][b] -= inv_pairs / tau;
    }
    for (std::size_t b = 0; b < n; ++b) {
      if (b == a) continue;
      d_sim[a][b] += inv_pairs * static_cast<double>(positives) * (w[b] / denom) / tau;
    }
  }

  // cos(u, v) = <u, v> / (|u| |v|);  d/du = v / (|u||v|) - cos * u / |u|^2
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      const double g = d_sim[a][b];
      if (g == 0.0) continue;
      const auto& u = probs[idx[a]];
      const auto& v = probs[idx[b]];
      const double inv_uv = 1.0 / (norm[a] * norm[b]);
      const double c = sim[a][b];
      auto& du = d_probs[idx[a]];
      auto& dv = d_probs[idx[b]];
      for (std::size_t i = 0; i < d; ++i) {
        du[i] += g * (v[i] * inv_uv - c * u[i] / (norm[a] * norm[a]));
        dv[i] += g * (u[i] * inv_uv - c * v[i] / (norm[b] * norm[b]));
      }
    }
  }
  return loss * inv_pairs;
}

}  // namespace

LogitGradient loss_gradient(const PromptSpec& spec, std::span<const Vec> logits,
                            const ObjectiveConfig& cfg) {
  check_pool(spec, logits);

  std::vector<Vec> probs(logits.size());
  std::vector<Vec> d_probs(logits.size());
  for (std::size_t j : spec.all_indices()) {
    probs[j].resize(logits[j].size());
    softmax(logits[j], probs[j]);
    d_probs[j].assign(logits[j].size(), 0.0);
  }

  LogitGradient out;
  if (cfg.kind == LossKind::jedi) {
    cfg.loss.validate();
    jedi_backward(spec, probs, cfg.loss, d_probs);
    std::vector<ProbField> pool;
    pool.reserve(logits.size());
    for (std::size_t j = 0; j < logits.size(); ++j) {
      pool.push_back(probs[j].empty() ? ProbField::uniform(1) : ProbField(probs[j]));
    }
    // Unreferenced slots are placeholders; resolve_groups never touches them.
    out.breakdown = jedi_loss(spec, pool, cfg.loss);
    out.loss = out.breakdown->total;
  } else {
    if (!(cfg.temperature > 0.0) || !std::isfinite(cfg.temperature)) {
      throw DataError("nt_xent temperature must be positive and finite");
    }
    out.loss = nt_xent_backward(spec, probs, cfg.temperature, d_probs);
  }

  // Softmax pullback: dz = p * (g - <g, p>)
  out.d_logits.resize(logits.size());
  for (std::size_t j = 0; j < logits.size(); ++j) {
    auto& dz = out.d_logits[j];
    dz.assign(logits[j].size(), 0.0);
    if (d_probs[j].empty()) continue;
    double inner = 0.0;
    for (std::size_t i = 0; i < dz.size(); ++i) inner += d_probs[j][i] * probs[j][i];
    for (std::size_t i = 0; i < dz.size(); ++i) {
      dz[i] = probs[j][i] * (d_probs[j][i] - inner);
    }
  }
  return out;
}

double objective_value(const PromptSpec& spec, std::span<const Vec> logits,
                       const ObjectiveConfig& cfg) {
  check_pool(spec, logits);
  const auto pool = materialize(logits);
  if (cfg.kind == LossKind::jedi) return jedi_loss(spec, pool, cfg.loss).total;
  return nt_xent_loss(spec, pool, cfg.temperature);
}

}  // namespace jedi
