// SPDX-FileCopyrightText: Copyright (c) 2026 The stfilm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stfilm/diagnostics.hpp"
#include "stfilm/grid.hpp"
#include "stfilm/noise.hpp"
#include "stfilm/operators.hpp"
#include "stfilm/physics.hpp"

namespace stfilm {

/// Threshold energy E_max_h = (1/2) c_F h^{-(p-2)/(p+2)}.
double e_max(double h, double c_f, double p);

struct SchemeConfig {
  double t_max{1.0};
  double dt{1e-4};
  double e_max{0};  // 0 requests the auto-derived threshold
  double implicit_theta{1.0};
  int max_dt_halvings{30};
  double positivity_guard{1.0};
  int sample_stride{1};

  void validate() const {
    if (!(t_max > 0)) throw ConfigError("scheme.t_max: must be positive");
    if (!(dt > 0)) throw ConfigError("scheme.dt: must be positive");
    if (implicit_theta < 0 || implicit_theta > 1)
      throw ConfigError("scheme.implicit_theta: must lie in [0,1]");
    if (max_dt_halvings < 0)
      throw ConfigError("scheme.max_dt_halvings: must be nonnegative");
    if (!(positivity_guard > 0))
      throw ConfigError("scheme.positivity_guard: must be positive");
    if (sample_stride < 1) throw ConfigError("scheme.sample_stride: must be >= 1");
  }
};

/// Effective threshold for a given grid (config value or auto-derived).
double resolve_e_max(const SchemeConfig& cfg, double h, const ModelParams<double>& mp);

enum class StoppingCause { energy, mass };

struct StoppingRecord {
  double time{0};
  StoppingCause cause{StoppingCause::energy};
};

struct PathState {
  FieldD u;
  double t{0};
  std::optional<StoppingRecord> stopped;
  double initial_mean{0};
};

/// Energy cause once E_h[u] >= E_max_h (inclusive), mass cause once
/// |mean(u) - initial| >= initial/2; energy wins a simultaneous trigger.
std::optional<StoppingCause> check_stopping(const PathState& state,
                                            const SchemeConfig& cfg,
                                            const ModelParams<double>& mp);

/// One path of the semi-discrete system under linearly-implicit
/// Euler-Maruyama stepping, with per-step diagnostics and the frozen state
/// after stopping.
struct PathRecord {
  std::vector<double> sample_times;
  std::vector<ArrayX<double>> sample_fields;
  std::vector<DiagnosticsRecord> diagnostics;
  std::optional<StoppingRecord> stopping;
  double initial_mean{0};
  double sup_r{0};            // sup over accepted states of E + kappa S
  double sup_mass_dev{0};     // sup |mean(u)(t) - mean(u0)|
  double final_time{0};
  // time-integrated dissipation quantities of the accepted trajectory
  double int_q_pressure{0};
  double int_q_entropy_diss{0};
  double int_q_quartic{0};
  double int_q_laplacian{0};
  double int_q_weighted_lap{0};
  double int_q_singular{0};
  double int_q_log{0};
  long steps{0};
  long rejects{0};
  long oscillation_violations{0};
  bool excluded{false};
  std::string error;
};

/// Drives one time step (dt halving retries included) of the implicit
/// fourth-order flux with explicit correction and noise.
class Stepper {
 public:
  Stepper(const GridD& grid, const SchemeConfig& cfg, const ModelParams<double>& mp,
          const NoiseSpec& spec);

  /// Advances the state by (up to) one base time step; freezes the state
  /// with an energy cause when every halved retry is rejected. Returns the
  /// number of rejected attempts.
  int step(PathState& state, std::vector<CounterStream>& streams) const;

  double c_strat_value() const { return c_strat_; }
  double e_max_value() const { return e_max_; }
  double positivity_floor() const { return pos_floor_; }

 private:
  FieldD solve_implicit(const FieldD& u, const FieldD& explicit_rhs, double dt) const;

  GridD grid_;
  SchemeConfig cfg_;
  ModelParams<double> mp_;
  NoiseAssembler assembler_;
  double c_strat_{0};
  double e_max_{0};
  double pos_floor_{0};
};

PathRecord run_path(const FieldD& u0, const SchemeConfig& cfg,
                    const ModelParams<double>& mp, const NoiseSpec& spec,
                    std::uint64_t path_index);

}  // namespace stfilm
