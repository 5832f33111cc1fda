// Copyright 2026 The jedi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace jedi {

/// Input data is malformed: bad distributions, bad indices, broken dumps.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation produced or received a non-finite or undefined value.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// KL(p || q) with p_i > 0 where q_i = 0.
class DivergenceUndefined : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace jedi
