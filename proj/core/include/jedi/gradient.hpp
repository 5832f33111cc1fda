// Copyright 2026 The jedi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "jedi/objective.hpp"

namespace jedi {

enum class LossKind { jedi, nt_xent };

/// Parses "jedi" / "nt-xent" / "nt_xent". Throws DataError otherwise.
LossKind parse_loss_kind(std::string_view name);
std::string_view to_string(LossKind kind);

struct ObjectiveConfig {
  LossKind kind = LossKind::jedi;
  LossConfig loss{};
  double temperature = kDefaultTemperature;
};

/// Loss value and its gradient with respect to every logit of every pool
/// entry. Pool entries not referenced by the spec get zero gradients.
struct LogitGradient {
  double loss = 0.0;
  std::optional<ObjectiveBreakdown> breakdown;  // set for LossKind::jedi
  std::vector<std::vector<double>> d_logits;
};

/// Reverse-mode pass over softmax -> mixtures -> KL/entropy sums.
///
/// `logits[j]` parameterizes pool entry j as softmax(logits[j]). The
/// adjoints are the closed forms
///   d JSD(P) / d p_k = (log p_k - log m) / n
///   d H(p)   / d p   = -(log p + 1)
/// pushed through the uniform mixture and the softmax Jacobian.
LogitGradient loss_gradient(const PromptSpec& spec,
                            std::span<const std::vector<double>> logits,
                            const ObjectiveConfig& cfg);

/// Forward-only evaluation on logits. Uses the ProbField API, so it is an
/// independent route to the value reported by loss_gradient.
double objective_value(const PromptSpec& spec,
                       std::span<const std::vector<double>> logits,
                       const ObjectiveConfig& cfg);

}  // namespace jedi
