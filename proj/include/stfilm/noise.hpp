// SPDX-FileCopyrightText: Copyright (c) 2026 The stfilm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "stfilm/errors.hpp"
#include "stfilm/grid.hpp"
#include "stfilm/physics.hpp"
#include "stfilm/rng.hpp"

namespace stfilm {

/// Spectral Q-Wiener noise: amplitudes lambda_ell for |ell| <= cutoff on the
/// trigonometric eigenbasis of the periodic Laplacian.
struct NoiseSpec {
  std::vector<double> lambdas;  // indexed by ell + cutoff, size 2*cutoff+1
  int cutoff{0};
  double length{1};
  std::uint64_t seed{0};
  bool balanced{true};

  static NoiseSpec silent(double domain_length, int n_h, std::uint64_t seed_value) {
    NoiseSpec s;
    s.cutoff = n_h;
    s.length = domain_length;
    s.seed = seed_value;
    s.lambdas.assign(static_cast<size_t>(2 * n_h + 1), 0.0);
    return s;
  }

  double lambda(int ell) const {
    if (std::abs(ell) > cutoff) return 0.0;
    return lambdas[static_cast<size_t>(ell + cutoff)];
  }
  void set_lambda(int ell, double value) {
    lambdas.at(static_cast<size_t>(ell + cutoff)) = value;
  }
  /// Set lambda_ell = lambda_{-ell} = value (frequency-balanced assignment).
  void set_balanced(int ell, double value) {
    set_lambda(ell, value);
    if (ell != 0) set_lambda(-ell, value);
  }

  void validate() const {
    if (cutoff < 0) throw ConfigError("noise.cutoff: must be nonnegative");
    if (lambdas.size() != static_cast<size_t>(2 * cutoff + 1))
      throw ConfigError("noise.lambdas: expected one amplitude per |ell| <= cutoff");
    for (double l : lambdas)
      if (!(l >= 0.0)) throw ConfigError("noise.lambdas: amplitudes must be nonnegative");
    if (balanced)
      for (int ell = 1; ell <= cutoff; ++ell)
        if (lambda(ell) != lambda(-ell))
          throw ConfigError(
              "noise.lambdas: frequency balancing requires lambda_ell == lambda_{-ell}");
  }

  /// Coloring statistic sum_ell ell^4 lambda_ell^2 of the noise.
  double coloring_sum() const {
    CompensatedSum<double> acc;
    for (int ell = -cutoff; ell <= cutoff; ++ell) {
      const double l = lambda(ell);
      const double e2 = double(ell) * double(ell);
      acc.add(e2 * e2 * l * l);
    }
    return acc.value();
  }
};

/// Eigenfunctions of the periodic Laplacian: sine for ell > 0, the constant
/// for ell = 0, cosine for ell < 0; L^2-orthonormal on (0, L).
inline double basis_eval(int ell, double x, double length) {
  if (ell == 0) return 1.0 / std::sqrt(length);
  const double k = 2.0 * std::numbers::pi * std::abs(ell) / length;
  const double amp = std::sqrt(2.0 / length);
  return ell > 0 ? amp * std::sin(k * x) : amp * std::cos(k * x);
}

namespace detail {

/// Exact int_a^b (c0 + c1 x + c2 x^2) cos(w x + phi) dx.
inline double poly_cos_integral(double c0, double c1, double c2, double w,
                                double phi, double a, double b) {
  auto anti = [&](double x) {
    const double s = std::sin(w * x + phi), c = std::cos(w * x + phi);
    double f = c0 * s / w;
    f += c1 * (c / (w * w) + x * s / w);
    f += c2 * (2.0 * x * c / (w * w) + (x * x / w - 2.0 / (w * w * w)) * s);
    return f;
  };
  return anti(b) - anti(a);
}

/// Exact int_a^b (c0 + c1 x + c2 x^2) dx.
inline double poly_integral(double c0, double c1, double c2, double a, double b) {
  auto anti = [&](double x) { return x * (c0 + x * (c1 / 2.0 + x * c2 / 3.0)); };
  return anti(b) - anti(a);
}

/// g_ell written as amp * cos(w x + phi); the constant mode has w = 0.
struct TrigForm {
  double amp, w, phi;
};

inline TrigForm trig_form(int ell, double length) {
  if (ell == 0) return {1.0 / std::sqrt(length), 0.0, 0.0};
  const double k = 2.0 * std::numbers::pi * std::abs(ell) / length;
  const double amp = std::sqrt(2.0 / length);
  // sin(kx) = cos(kx - pi/2)
  return ell > 0 ? TrigForm{amp, k, -std::numbers::pi / 2.0} : TrigForm{amp, k, 0.0};
}

inline double poly_times_basis_integral(int ell, double length, double c0, double c1,
                                        double c2, double a, double b) {
  const TrigForm t = trig_form(ell, length);
  if (t.w == 0.0) return t.amp * poly_integral(c0, c1, c2, a, b);
  return t.amp * poly_cos_integral(c0, c1, c2, t.w, t.phi, a, b);
}

}  // namespace detail

/// Per-element integrals of the two linear hat restrictions against g_ell:
///   left[i]  = int_{I_i} (x_{i+1}-x)/h * g_ell dx,
///   right[i] = int_{I_i} (x-x_i)/h    * g_ell dx,
/// so int_{I_i} I_h[v] g_ell dx = v_i * left[i] + v_{i+1} * right[i].
/// Depends only on (grid, ell); precomputed once per mode.
struct BasisElementTable {
  int ell{0};
  ArrayX<double> left, right;

  BasisElementTable(const GridD& grid, int mode) : ell(mode) {
    const Index n = grid.node_count;
    const double h = grid.spacing();
    left.resize(n);
    right.resize(n);
    for (Index i = 0; i < n; ++i) {
      const double a = double(i) * h, b = a + h;
      left[i] =
          detail::poly_times_basis_integral(ell, grid.length, b / h, -1.0 / h, 0.0, a, b);
      right[i] =
          detail::poly_times_basis_integral(ell, grid.length, -a / h, 1.0 / h, 0.0, a, b);
    }
  }

  /// Element integrals E_i = int_{I_i} I_h[v] g_ell dx for nodal values v.
  ArrayX<double> element_integrals(const ArrayX<double>& v, const GridD& grid) const {
    const Index n = grid.node_count;
    ArrayX<double> e(n);
    for (Index i = 0; i < n; ++i)
      e[i] = v[i] * left[i] + v[grid.wrap(i + 1)] * right[i];
    return e;
  }
};

/// Stochastic coefficient field: node i carries
///   Z_i(lambda_ell g_ell) = (lambda_ell/h) int (M_2^h(u) g_ell)_x e_i dx,
/// integrated by parts with exact element integrals, which collapses to
/// (lambda/h^2) (E_i - E_{i-1}); the lumped sum telescopes exactly.
inline FieldD stochastic_coeff(const FieldD& u, int ell, const NoiseSpec& spec,
                               double n_exponent) {
  if (!(min_value(u) > 0.0))
    throw PositivityError("stochastic_coeff: field has a nonpositive node");
  const BasisElementTable table(u.grid, ell);
  const FieldD root = mobility_root_field(u, n_exponent);
  const ArrayX<double> e = table.element_integrals(root.values, u.grid);
  const double lambda = spec.lambda(ell);
  const double h = u.grid.spacing();
  ArrayX<double> z(u.size());
  for (Index i = 0; i < u.size(); ++i)
    z[i] = lambda * (e[i] - e[u.grid.wrap(i - 1)]) / (h * h);
  return FieldD(u.grid, std::move(z));
}

/// Precomputed-mode noise assembler for repeated increments on one grid.
/// The per-mode hat integrals are stacked into two (modes x N) matrices so
/// one increment is two matrix-vector products. Holds scratch buffers,
/// intended to be owned by a single path worker.
class NoiseAssembler {
 public:
  NoiseAssembler(const GridD& grid, const NoiseSpec& spec, double n_exponent)
      : grid_(grid), n_(n_exponent), cutoff_(spec.cutoff) {
    std::vector<BasisElementTable> tables;
    for (int ell = -spec.cutoff; ell <= spec.cutoff; ++ell)
      if (spec.lambda(ell) != 0.0) {
        tables.emplace_back(grid, ell);
        ells_.push_back(ell);
        lambdas_.push_back(spec.lambda(ell));
      }
    const Index m = static_cast<Index>(tables.size());
    left_.resize(m, grid.node_count);
    right_.resize(m, grid.node_count);
    for (Index k = 0; k < m; ++k) {
      left_.row(k) = tables[static_cast<size_t>(k)].left.transpose();
      right_.row(k) = tables[static_cast<size_t>(k)].right.transpose();
    }
    weights_.resize(m);
    lsum_.resize(grid.node_count);
    rsum_.resize(grid.node_count);
  }

  size_t active_modes() const { return ells_.size(); }

  /// One Euler-Maruyama noise increment sqrt(dt) sum_ell Z(lambda_ell g_ell) xi_ell.
  /// Streams are indexed by ell + cutoff; draws happen in increasing ell order.
  FieldD increment(const FieldD& u, double dt, std::vector<CounterStream>& streams) const {
    if (!(dt > 0.0)) throw ConfigError("noise increment: dt must be positive");
    if (!(min_value(u) > 0.0))
      throw PositivityError("noise increment: field has a nonpositive node");
    const Index n = grid_.node_count;
    const double h = grid_.spacing();
    const double sqrt_dt = std::sqrt(dt);
    for (size_t k = 0; k < ells_.size(); ++k) {
      const size_t sid = static_cast<size_t>(ells_[k] + cutoff_);
      if (sid >= streams.size())
        throw ConfigError("noise increment: stream table does not cover cutoff");
      weights_[static_cast<Index>(k)] = lambdas_[k] * sqrt_dt * streams[sid].normal();
    }
    // element integrals of I_h[|u|^{n/2}] g_ell, summed over modes up front
    lsum_.noalias() = left_.transpose() * weights_;
    rsum_.noalias() = right_.transpose() * weights_;
    ArrayX<double> root(n);
    for (Index i = 0; i < n; ++i) root[i] = std::pow(std::abs(u.values[i]), n_ / 2.0);
    ArrayX<double> out(n);
    double prev = root[n - 1] * lsum_[n - 1] + root[0] * rsum_[n - 1];
    for (Index i = 0; i < n; ++i) {
      const double e = root[i] * lsum_[i] + root[(i + 1) % n] * rsum_[i];
      out[i] = (e - prev) / (h * h);
      prev = e;
    }
    return FieldD(grid_, std::move(out));
  }

 private:
  GridD grid_;
  double n_;
  int cutoff_;
  std::vector<int> ells_;
  std::vector<double> lambdas_;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> left_, right_;
  mutable Eigen::VectorXd weights_, lsum_, rsum_;
};

/// One-shot noise increment (builds the mode tables on the fly).
inline FieldD noise_increment(const FieldD& u, const NoiseSpec& spec, double n_exponent,
                              double dt, std::vector<CounterStream>& streams) {
  NoiseAssembler assembler(u.grid, spec, n_exponent);
  return assembler.increment(u, dt, streams);
}

/// Per-path stream table, one stream per mode index ell + cutoff.
inline std::vector<CounterStream> make_path_streams(const NoiseSpec& spec,
                                                    std::uint64_t path) {
  std::vector<CounterStream> s;
  const int count = 2 * spec.cutoff + 1;
  s.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i)
    s.emplace_back(spec.seed, path, static_cast<std::uint64_t>(i));
  return s;
}

/// Ito-Stratonovich conversion constant of the frequency-balanced noise:
/// C_Strat = 1/2 * n^2/4 * (lambda_0^2/L + sum_{ell>=1} 2 lambda_ell^2 / L).
inline double c_strat(const NoiseSpec& spec, double n_exponent) {
  if (!spec.balanced)
    throw ConfigError("c_strat: requires a frequency-balanced noise spec");
  spec.validate();
  CompensatedSum<double> acc;
  acc.add(spec.lambda(0) * spec.lambda(0) / spec.length);
  for (int ell = 1; ell <= spec.cutoff; ++ell)
    acc.add(2.0 * spec.lambda(ell) * spec.lambda(ell) / spec.length);
  return 0.5 * (n_exponent * n_exponent / 4.0) * acc.value();
}

/// Lower admissible regularization:
///   s_min = C_Strat * [ 3 C_osc^{4-n} / (1+C_osc)^{n-4} * (n-2)/(3-n)
///                       + (C_osc^{n-2} - 1) ],  C_osc = 1 + sqrt(2 c_F).
inline double s_min(const NoiseSpec& spec, double n, double c_f) {
  if (!(n > 2.0 && n < 3.0)) throw ConfigError("s_min: n must lie in (2,3)");
  const double cs = c_strat(spec, n);
  const double cosc = 1.0 + std::sqrt(2.0 * c_f);
  const double first = 3.0 * std::pow(cosc, 4.0 - n) / std::pow(1.0 + cosc, n - 4.0) *
                       (n - 2.0) / (3.0 - n);
  const double second = std::pow(cosc, n - 2.0) - 1.0;
  return cs * first + cs * second;
}

/// Formal continuous-setting optimum S_opt = C_Strat * 9/4 * (n-2)^2 / ((3-n)(2n-3)).
inline double s_opt(const NoiseSpec& spec, double n) {
  if (!(n > 2.0 && n < 3.0)) throw ConfigError("s_opt: n must lie in (2,3)");
  return c_strat(spec, n) * 2.25 * (n - 2.0) * (n - 2.0) /
         ((3.0 - n) * (2.0 * n - 3.0));
}

}  // namespace stfilm
