// SPDX-FileCopyrightText: Copyright (c) 2026 The stfilm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "stfilm/ensemble.hpp"

namespace stfilm {

/// Static SVG plots: energy/entropy vs time per path and a stopping-time
/// histogram. Empty reports produce no files.
void emit_plots(const EnsembleReport& report, const std::string& dir);

/// Log-log mass-drift plot with the fitted slope annotated.
void emit_plots(const MassStudyReport& report, const std::string& dir);

}  // namespace stfilm
