// SPDX-FileCopyrightText: Copyright (c) 2026 The stfilm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "stfilm/diagnostics.hpp"
#include "stfilm/ensemble.hpp"
#include "stfilm/noise.hpp"
#include "stfilm/physics.hpp"
#include "stfilm/scheme.hpp"

namespace stfilm {

/// A run is fully determined by one JSON document plus the master seed.
struct RunConfig {
  int schema{1};
  std::string mode{"simulate"};  // simulate | verify | mass-study | constants
  ModelParams<double> model;
  Index nodes{64};
  SchemeConfig scheme;
  NoiseSpec noise;
  EnsembleConfig ensemble;
  InitialData u0;
  VerifyOptions verify;
  bool allow_low_s{false};

  GridD grid() const { return GridD(model.length, nodes); }
};

/// Parses and cross-validates a config document. Errors carry the offending
/// field path; parse errors carry the byte offset reported by the parser.
RunConfig parse_run_config(const std::string& text, const std::string& origin);

/// Loads a config file; a missing file is a ConfigError naming the path.
RunConfig load_run_config(const std::string& path);

/// The derived scheme constants as a JSON document: c_strat, c_osc, sigma,
/// e_max_h, s_min, s_opt, and the noise coloring sum.
std::string constants_json(const RunConfig& cfg);

}  // namespace stfilm
