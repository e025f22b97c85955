// SPDX-FileCopyrightText: Copyright (c) 2026 The stfilm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace stfilm {

/// Two fields on different grids were combined.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// An operation that requires strictly positive nodal values saw a
/// nonpositive one.
struct PositivityError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Invalid or inconsistent run configuration. The message carries the
/// offending field path (e.g. "noise.lambdas[2]").
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The linear system of an implicit step could not be factorized.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace stfilm
