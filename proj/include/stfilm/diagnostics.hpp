// SPDX-FileCopyrightText: Copyright (c) 2026 The stfilm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "stfilm/grid.hpp"
#include "stfilm/noise.hpp"
#include "stfilm/operators.hpp"
#include "stfilm/physics.hpp"
#include "stfilm/rng.hpp"

namespace stfilm {

/// Snapshot of every functional and dissipation integrand tracked along a
/// trajectory. All q_* are nonnegative for positive fields.
struct DiagnosticsRecord {
  double time{0};
  double energy{0};
  double entropy{0};
  double combined_r{0};
  double osc_ratio{1};
  double min_u{0};
  double mean_u{0};
  double q_pressure{0};      // int M_h(u) |p_x|^2 dx
  double q_laplacian{0};     // || Delta_h u ||_h^2
  double q_quartic{0};       // h sum u^{n-4} |d+ u|^4
  double q_weighted_lap{0};  // h sum u^{n-2} |(Delta_h u)_i|^2
  double q_singular{0};      // h sum u^{n-p-4} |d+ u|^2
  double q_log{0};           // h sum u^{-2} |d+ u|^2
  double q_entropy_diss{0};  // sum_i avg int |tau|^{-p-2} * int_elem |u_x|^2
  double ito_energy{0};      // left side of the second-difference Ito bound
};

/// Integral average of |tau|^{-p-2} between two positive endpoints, with the
/// removable equal-endpoints limit a^{-p-2}.
double avg_singular_integral(double a, double b, double p);

DiagnosticsRecord record(const FieldD& u, const FieldD& p, const ModelParams<double>& mp);
DiagnosticsRecord record(const FieldD& u, const FieldD& p, const ModelParams<double>& mp,
                         const NoiseSpec& spec);

/// Largest lumped Hoelder quotient ||u(t1)-u(t2)||_h^2 / |t1-t2|^{1/2} over
/// sampled pairs; pairs are uniformly subsampled above max_pairs.
double holder_quotient(const std::vector<double>& times,
                       const std::vector<ArrayX<double>>& fields, const GridD& grid,
                       std::size_t max_pairs = 10000);

/// Value of (1/2h) sum_ell lambda_ell^2 sum_i (int d_h^-((M_2^h(u) g_ell)_x) e_{i+1})^2
/// with exact element integrals.
double ito_energy_value(const FieldD& u, const NoiseSpec& spec, double n_exponent);

/// Same evaluation with the per-mode element tables precomputed once, for
/// per-step use along trajectories.
class ItoEvaluator {
 public:
  ItoEvaluator(const GridD& grid, const NoiseSpec& spec, double n_exponent);
  double value(const FieldD& u) const;

 private:
  GridD grid_;
  double n_;
  std::vector<std::pair<double, BasisElementTable>> modes_;
  mutable ArrayX<double> root_, elem_;  // scratch; one owner per path worker
};

/// The same left side together with the explicit-constant right-side groups
/// for given (eps, eta); the two existential-constant groups are reported as
/// raw sums and never asserted.
struct ItoTermReport {
  double eps{1}, eta{1};
  double lhs{0};
  double delta_group{0};    // (1+eta) C_Strat (1 + eps (n-2)/2) C_osc^{n-2} h sum u^{n-2} |lap|^2
  double quartic_group{0};  // (1+eta) C_Strat ((n-2)^2/4 + (n-2)/(2 eps)) C_osc^{4-n} * mixed quartic sum
  double raw_weighted_grad{0};  // h sum u^{n-2} |d+ u|^2 (existential constant)
  double raw_power_n{0};        // h sum u^n (existential constant)
  double margin{0};             // delta_group + quartic_group - lhs
};

ItoTermReport ito_energy_term(const FieldD& u, const NoiseSpec& spec,
                              const ModelParams<double>& mp, double eps, double eta);

enum class CheckKind { identity, inequality, margin };

/// Outcome of one executable lemma check on one field.
struct LemmaCheck {
  std::string name;
  CheckKind kind{CheckKind::identity};
  double residual{0};       // |lhs-rhs| / term scale (identities)
  double margin{0};         // lhs-rhs or reported ratio (inequalities/margins)
  bool hypothesis_ok{true}; // oscillation hypothesis satisfied by the input
  bool pass{true};
};

/// Runs every executable identity and estimate on one positive field.
/// Deterministic auxiliary test fields are derived from `aux_seed`.
std::vector<LemmaCheck> lemma_suite(const FieldD& u, const ModelParams<double>& mp,
                                    double tol_identity = 1e-12,
                                    std::uint64_t aux_seed = 0);

/// Strictly positive field with every neighbor ratio (including the wrap)
/// bounded by c_osc, scaled to the requested mean.
FieldD oscillation_constrained_field(const GridD& grid, double c_osc, double mean_value,
                                     CounterStream& stream);

/// Random field with nodal values uniform in [lo, hi].
FieldD random_uniform_field(const GridD& grid, double lo, double hi,
                            CounterStream& stream);

/// Aggregated outcome of the lemma suite over a generated corpus.
struct VerifySummary {
  struct PerCheck {
    std::string name;
    CheckKind kind{CheckKind::identity};
    double worst_residual{0};
    double worst_margin{0};
    long runs{0};
    long failures{0};
  };
  std::vector<PerCheck> checks;
  long identity_failures{0};
  long sign_failures{0};
  long fields_tested{0};

  bool ok() const { return identity_failures == 0 && sign_failures == 0; }
};

struct VerifyOptions {
  std::vector<Index> grid_sizes{4, 8, 16, 64};
  std::vector<double> n_values{2.1, 2.5, 2.9};
  std::vector<double> c_f_values{0.02, 0.5};
  int samples{1000};
  double tol_identity{1e-12};
  std::uint64_t seed{2026};
};

/// Runs lemma_suite over `samples` constrained and unconstrained random
/// fields for every (grid size, n, c_F) combination.
VerifySummary verify_corpus(const ModelParams<double>& base, const VerifyOptions& opt);

std::string verify_summary_json(const VerifySummary& summary);

}  // namespace stfilm
