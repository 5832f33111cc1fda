// Copyright 2026 The jedi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace jedi::csv {

/// Shortest decimal text that parses back to exactly `v`.
std::string format(double v);

/// Splits one CSV line on commas. No quoting support; our files never
/// need it.
std::vector<std::string> split(std::string_view line);

/// Strict parse of a number written by format(). Throws DataError.
double parse_double(std::string_view text);

}  // namespace jedi::csv
