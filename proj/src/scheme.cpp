// SPDX-FileCopyrightText: Copyright (c) 2026 The stfilm Authors
// SPDX-License-Identifier: Apache-2.0

#include "stfilm/scheme.hpp"

#include <algorithm>
#include <cmath>

#include "stfilm/pentadiagonal.hpp"

namespace stfilm {

double e_max(double h, double c_f, double p) {
  return 0.5 * c_f * std::pow(h, -(p - 2.0) / (p + 2.0));
}

double resolve_e_max(const SchemeConfig& cfg, double h, const ModelParams<double>& mp) {
  return cfg.e_max > 0 ? cfg.e_max : e_max(h, mp.c_f, mp.p);
}

std::optional<StoppingCause> check_stopping(const PathState& state,
                                            const SchemeConfig& cfg,
                                            const ModelParams<double>& mp) {
  const double threshold = resolve_e_max(cfg, state.u.grid.spacing(), mp);
  if (energy(state.u, mp) >= threshold) return StoppingCause::energy;
  if (std::abs(mean(state.u) - state.initial_mean) >= 0.5 * state.initial_mean)
    return StoppingCause::mass;
  return std::nullopt;
}

Stepper::Stepper(const GridD& grid, const SchemeConfig& cfg,
                 const ModelParams<double>& mp, const NoiseSpec& spec)
    : grid_(grid), cfg_(cfg), mp_(mp), assembler_(grid, spec, mp.n) {
  cfg_.validate();
  mp_.validate();
  spec.validate();
  c_strat_ = c_strat(spec, mp.n);
  e_max_ = resolve_e_max(cfg, grid.spacing(), mp);
  pos_floor_ =
      cfg.positivity_guard * std::pow(grid.spacing(), 2.0 / (mp.p + 2.0));
}

// Solves (I - theta dt J) u_new = rhs where J is the conservative flux
// linearized at u: J v = D_M(-Delta_h v + F''(u) v) with element mobilities
// frozen at u. J is cyclic pentadiagonal, and its rows telescope, so the
// implicit solve moves no mass. Correction and noise stay explicit.
FieldD Stepper::solve_implicit(const FieldD& u, const FieldD& explicit_rhs,
                               double dt) const {
  const Index n = grid_.node_count;
  const double h = grid_.spacing();
  const double h2 = h * h, h4 = h2 * h2;
  const double sigma = cutoff_sigma(h, mp_.p);
  const double theta = cfg_.implicit_theta;

  ArrayX<double> mob(n), f2(n);
  for (Index i = 0; i < n; ++i) {
    mob[i] = mobility_element(u.values[i], u(i + 1), sigma, mp_.n);
    f2[i] = potential_d2(u.values[i], mp_);
  }

  // Bands of J at row i (mp = M_{i+1/2}, mm = M_{i-1/2}):
  //   J(i,i-2) = -mm/h^4
  //   J(i,i-1) = (mp+3mm)/h^4 + mm f2_{i-1}/h^2
  //   J(i,i)   = -3(mp+mm)/h^4 - (mp+mm) f2_i/h^2
  //   J(i,i+1) = (3mp+mm)/h^4 + mp f2_{i+1}/h^2
  //   J(i,i+2) = -mp/h^4
  ArrayX<double> sub2(n), sub1(n), diag(n), sup1(n), sup2(n);
  ArrayX<double> ju(n);
  for (Index i = 0; i < n; ++i) {
    const double mp_elem = mob[i];
    const double mm_elem = mob[grid_.wrap(i - 1)];
    const double jm2 = -mm_elem / h4;
    const double jm1 = (mp_elem + 3.0 * mm_elem) / h4 +
                       mm_elem * f2[grid_.wrap(i - 1)] / h2;
    const double jd = -3.0 * (mp_elem + mm_elem) / h4 - (mp_elem + mm_elem) * f2[i] / h2;
    const double jp1 = (3.0 * mp_elem + mm_elem) / h4 +
                       mp_elem * f2[grid_.wrap(i + 1)] / h2;
    const double jp2 = -mp_elem / h4;
    ju[i] = jm2 * u(i - 2) + jm1 * u(i - 1) + jd * u.values[i] + jp1 * u(i + 1) +
            jp2 * u(i + 2);
    const double s = -theta * dt;
    sub2[i] = s * jm2;
    sub1[i] = s * jm1;
    diag[i] = 1.0 + s * jd;
    sup1[i] = s * jp1;
    sup2[i] = s * jp2;
  }

  // rhs = u + dt * explicit_rhs - theta dt J u
  Eigen::VectorXd b(n);
  for (Index i = 0; i < n; ++i)
    b[i] = u.values[i] + dt * explicit_rhs.values[i] - theta * dt * ju[i];

  const CyclicPentadiagonalSolver<double> solver(sub2, sub1, diag, sup1, sup2);
  const Eigen::VectorXd x = solver.solve(b);
  return FieldD(grid_, x.array());
}

int Stepper::step(PathState& state, std::vector<CounterStream>& streams) const {
  if (state.stopped) return 0;
  if (state.t >= cfg_.t_max) return 0;

  if (auto cause = check_stopping(state, cfg_, mp_)) {
    state.stopped = StoppingRecord{state.t, *cause};
    return 0;
  }

  const FieldD p = pressure(state.u, mp_);
  const FieldD flux = flux_divergence(state.u, p, mp_);
  const FieldD corr = correction_drift(state.u, mp_, c_strat_);
  FieldD drift(grid_, (flux.values + corr.values).eval());

  CompensatedSum<double> u_sum, drift_sum;
  for (Index i = 0; i < grid_.node_count; ++i) {
    u_sum.add(state.u.values[i]);
    drift_sum.add(drift.values[i]);
  }

  double dt = std::min(cfg_.dt, cfg_.t_max - state.t);
  for (int attempt = 0; attempt <= cfg_.max_dt_halvings; ++attempt) {
    const FieldD noise = assembler_.increment(state.u, dt, streams);
    FieldD rhs(grid_, (drift.values + noise.values / dt).eval());
    FieldD candidate = solve_implicit(state.u, rhs, dt);

    // The implicit flux operator telescopes, so in exact arithmetic the
    // mean moves only through the explicit drift and the (telescoping)
    // noise. Restore that invariant against solver roundoff: the shift is
    // at the level of the factorization's own error.
    CompensatedSum<double> noise_sum, cand_sum;
    for (Index i = 0; i < grid_.node_count; ++i) {
      noise_sum.add(noise.values[i]);
      cand_sum.add(candidate.values[i]);
    }
    const double target = u_sum.value() + dt * drift_sum.value() + noise_sum.value();
    candidate.values += (target - cand_sum.value()) / double(grid_.node_count);

    const bool positive = min_value(candidate) > pos_floor_;
    const bool bounded = positive && energy(candidate, mp_) < e_max_;
    if (positive && bounded) {
      state.u = std::move(candidate);
      state.t += dt;
      return attempt;
    }
    dt *= 0.5;
  }
  state.stopped = StoppingRecord{state.t, StoppingCause::energy};
  return cfg_.max_dt_halvings + 1;
}

PathRecord run_path(const FieldD& u0, const SchemeConfig& cfg,
                    const ModelParams<double>& mp, const NoiseSpec& spec,
                    std::uint64_t path_index) {
  PathRecord rec;
  if (!(min_value(u0) > 0.0))
    throw PositivityError("run_path: initial data must be strictly positive");

  const GridD grid = u0.grid;
  const double h = grid.spacing();
  const double osc_bound = mp.oscillation_bound();
  const double osc_energy_gate = 2.0 * e_max(h, mp.c_f, mp.p);  // c_F h^{-(p-2)/(p+2)}
  const double min_gate = std::pow(h, 2.0 / (mp.p + 2.0));

  PathState state{u0, 0.0, std::nullopt, mean(u0)};
  rec.initial_mean = state.initial_mean;

  try {
    const Stepper stepper(grid, cfg, mp, spec);
    const ItoEvaluator ito(grid, spec, mp.n);
    std::vector<CounterStream> streams = make_path_streams(spec, path_index);

    auto observe = [&](bool force_sample) {
      DiagnosticsRecord d = record(state.u, pressure(state.u, mp), mp);
      d.time = state.t;
      rec.sup_r = std::max(rec.sup_r, d.combined_r);
      rec.sup_mass_dev =
          std::max(rec.sup_mass_dev, std::abs(d.mean_u - rec.initial_mean));
      if (d.energy <= osc_energy_gate &&
          (d.min_u < min_gate || d.osc_ratio > osc_bound * (1.0 + 1e-12)))
        ++rec.oscillation_violations;
      if (force_sample || rec.steps % cfg.sample_stride == 0) {
        d.ito_energy = ito.value(state.u);  // only sampled records carry it
        rec.sample_times.push_back(state.t);
        rec.sample_fields.push_back(state.u.values);
        rec.diagnostics.push_back(d);
      }
      return d;
    };

    DiagnosticsRecord current = observe(true);
    while (state.t < cfg.t_max && !state.stopped) {
      const double t_before = state.t;
      rec.rejects += stepper.step(state, streams);
      if (state.stopped) break;
      if (state.t == t_before) break;  // defensive: no progress
      const double dt_used = state.t - t_before;
      ++rec.steps;
      // integrate the dissipation quantities with the pre-step values
      rec.int_q_pressure += current.q_pressure * dt_used;
      rec.int_q_entropy_diss += current.q_entropy_diss * dt_used;
      rec.int_q_quartic += current.q_quartic * dt_used;
      rec.int_q_laplacian += current.q_laplacian * dt_used;
      rec.int_q_weighted_lap += current.q_weighted_lap * dt_used;
      rec.int_q_singular += current.q_singular * dt_used;
      rec.int_q_log += current.q_log * dt_used;
      current = observe(state.t >= cfg.t_max);
    }

    if (state.stopped) {
      rec.stopping = state.stopped;
      // The state is frozen after stopping; emit the remaining samples as
      // copies of the frozen field on the base time grid.
      double t = state.stopped->time;
      while (t < cfg.t_max) {
        t = std::min(t + cfg.dt * cfg.sample_stride, cfg.t_max);
        rec.sample_times.push_back(t);
        rec.sample_fields.push_back(state.u.values);
        DiagnosticsRecord d = rec.diagnostics.empty() ? DiagnosticsRecord{}
                                                      : rec.diagnostics.back();
        d.time = t;
        rec.diagnostics.push_back(d);
      }
    }
    rec.final_time = cfg.t_max;
  } catch (const SolverError& err) {
    rec.excluded = true;
    rec.error = err.what();
  }
  return rec;
}

}  // namespace stfilm
