// SPDX-FileCopyrightText: Copyright (c) 2026 The stfilm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

#include "stfilm/scheme.hpp"

namespace stfilm {

struct EnsembleConfig {
  int n_paths{1};
  std::vector<double> moment_orders{1.0};
  std::vector<double> h_list;  // mesh sizes for refinement studies
  int workers{1};
  std::string output_dir{"out"};

  void validate() const {
    if (n_paths < 1) throw ConfigError("ensemble.n_paths: must be >= 1");
    if (moment_orders.empty())
      throw ConfigError("ensemble.moment_orders: must be nonempty");
    for (double p : moment_orders)
      if (!(p >= 1.0)) throw ConfigError("ensemble.moment_orders: orders must be >= 1");
    if (workers < 1) throw ConfigError("ensemble.workers: must be >= 1");
  }
};

/// Default initial-data family u0 = base + amplitude * I_h[cos(2 pi x / L)],
/// smooth and strictly positive for base > amplitude > 0.
struct InitialData {
  double base{1.0};
  double amplitude{0.0};

  void validate() const {
    if (!(base > 0.0)) throw ConfigError("u0.base: must be positive");
    if (amplitude < 0.0 || amplitude >= base)
      throw ConfigError("u0.amplitude: need 0 <= amplitude < base");
  }
};

FieldD make_initial_field(const GridD& grid, const InitialData& init);

struct MomentStats {
  double order{1};
  double mean{0};
  double std_error{0};
};

/// Estimated moments of one path-level scalar (mean and standard error of
/// X^order across independent paths).
struct QuantityEstimate {
  std::string name;
  std::vector<MomentStats> moments;
};

struct EnsembleReport {
  Index nodes{0};
  double h{0};
  long n_paths{0};
  long excluded{0};
  long stopped_energy{0};
  long stopped_mass{0};
  long oscillation_violations{0};
  std::vector<double> stopping_times;
  QuantityEstimate sup_r;
  std::vector<QuantityEstimate> integrals;
  MomentStats mass_drift;  // E[ sup_t |mean(u) - mean(u0)| ]
  std::vector<PathRecord> paths;

  double stopped_fraction() const {
    return n_paths > 0 ? double(stopped_energy + stopped_mass) / double(n_paths) : 0.0;
  }
};

EnsembleReport run_ensemble(const GridD& grid, const EnsembleConfig& ens,
                            const SchemeConfig& scheme, const ModelParams<double>& mp,
                            const NoiseSpec& noise, const InitialData& u0);

struct MassStudyReport {
  std::vector<double> h_values;
  std::vector<MomentStats> drifts;
  double slope{0};
  double intercept{0};
  std::vector<EnsembleReport> runs;
};

/// Refinement study of E[sup_t |mean - mean0|] over the configured h list
/// (>= 3 levels) with a log-log least-squares slope.
MassStudyReport mass_drift_study(const EnsembleConfig& ens, const SchemeConfig& scheme,
                                 const ModelParams<double>& mp, const NoiseSpec& noise,
                                 const InitialData& u0);

/// Writes report.json, trajectories.csv and diagnostics.csv into dir.
void persist(const EnsembleReport& report, const std::string& dir);
void persist(const MassStudyReport& report, const std::string& dir);

std::string report_json(const EnsembleReport& report);
std::string report_json(const MassStudyReport& report);

}  // namespace stfilm
