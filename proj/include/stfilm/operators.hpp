// SPDX-FileCopyrightText: Copyright (c) 2026 The stfilm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>

#include "stfilm/grid.hpp"
#include "stfilm/physics.hpp"

namespace stfilm {

namespace detail {
template <typename Scalar>
void require_positive(const Field<Scalar>& u, const char* who) {
  if (!(min_value(u) > Scalar(0)))
    throw PositivityError(std::string(who) + ": field has a nonpositive node");
}
}  // namespace detail

/// Discrete pressure, the exact lumped-mass solution of the pressure
/// equation: p_i = -(Delta_h u)_i + F'(u_i).
template <typename Scalar>
Field<Scalar> pressure(const Field<Scalar>& u, const ModelParams<Scalar>& mp) {
  detail::require_positive(u, "pressure");
  Field<Scalar> lap = discrete_laplacian(u);
  ArrayX<Scalar> p(u.size());
  for (Index i = 0; i < u.size(); ++i)
    p[i] = -lap.values[i] + potential_d1(u.values[i], mp);
  return Field<Scalar>(u.grid, std::move(p));
}

/// Conservative mobility flux divergence, node i carries L_i/h:
///   (1/h) [ M_{i+1/2} (p_{i+1}-p_i)/h - M_{i-1/2} (p_i-p_{i-1})/h ]
/// with M_{i+1/2} the element mobility between u_i and u_{i+1}.
template <typename Scalar>
Field<Scalar> flux_divergence(const Field<Scalar>& u, const Field<Scalar>& p,
                              const ModelParams<Scalar>& mp) {
  detail::require_same_grid(u, p);
  const Scalar h = u.grid.spacing();
  const Scalar sigma = cutoff_sigma(h, mp.p);
  const Index n = u.size();
  ArrayX<Scalar> mob(n);  // mob[i] = M on element [x_i, x_{i+1}]
  for (Index i = 0; i < n; ++i)
    mob[i] = mobility_element(u.values[i], u(i + 1), sigma, mp.n);
  ArrayX<Scalar> out(n);
  for (Index i = 0; i < n; ++i) {
    const Scalar up = mob[i] * (p(i + 1) - p.values[i]) / h;
    const Scalar dn = mob[u.grid.wrap(i - 1)] * (p.values[i] - p(i - 1)) / h;
    out[i] = (up - dn) / h;
  }
  return Field<Scalar>(u.grid, std::move(out));
}

namespace detail {

// i-th summand of A_Delta^h(u, .) (the coefficient of v_i, without the h).
template <typename Scalar>
Scalar a_delta_coeff(const Field<Scalar>& u, Index i, Scalar n) {
  const Scalar h = u.grid.spacing();
  const Scalar ui = u.values[i], up = u(i + 1), um = u(i - 1);
  const Scalar dp = (up - ui) / h, dm = (ui - um) / h;
  const Scalar wi = std::pow(ui, n - 3), wp = std::pow(up, n - 3),
               wm = std::pow(um, n - 3);
  const Scalar grad_sq = wi * (dm * dm + dp * dp);
  const Scalar cross = ((wi + wp) * dp + (wm + wi) * dm) * (up - um) / (Scalar(2) * h);
  return -(n - Scalar(2)) / Scalar(6) * (grad_sq + cross);
}

// i-th summand of B_Delta^h(u, .).
template <typename Scalar>
Scalar b_delta_coeff(const Field<Scalar>& u, Index i, Scalar n) {
  const Scalar h = u.grid.spacing();
  const Scalar lap = (u(i + 1) - Scalar(2) * u.values[i] + u(i - 1)) / (h * h);
  return -std::pow(u.values[i], n - Scalar(2)) * lap;
}

}  // namespace detail

/// A_Delta^h(u, v), the discrete weak version of -(n-2) u^{n-3} |u_x|^2,
/// evaluated literally as the written double sum.
template <typename Scalar>
Scalar a_delta(const Field<Scalar>& u, const Field<Scalar>& v, Scalar n) {
  detail::require_same_grid(u, v);
  detail::require_positive(u, "a_delta");
  const Scalar h = u.grid.spacing();
  CompensatedSum<Scalar> acc;
  for (Index i = 0; i < u.size(); ++i)
    acc.add(detail::a_delta_coeff(u, i, n) * v.values[i]);
  return h * acc.value();
}

/// A_nabla^h(u, v): the three-sum gradient form. Identical to A_Delta^h
/// for every pair of fields; kept as an independent evaluation route.
template <typename Scalar>
Scalar a_nabla(const Field<Scalar>& u, const Field<Scalar>& v, Scalar n) {
  detail::require_same_grid(u, v);
  detail::require_positive(u, "a_nabla");
  const Scalar h = u.grid.spacing();
  CompensatedSum<Scalar> acc;
  for (Index i = 0; i < u.size(); ++i) {
    const Scalar ui = u.values[i], up = u(i + 1), um = u(i - 1);
    const Scalar dp = (up - ui) / h, dm = (ui - um) / h, dc = (up - um) / h;
    const Scalar wi = std::pow(ui, n - 3), wp = std::pow(up, n - 3),
                 wm = std::pow(um, n - 3);
    const Scalar t1 = (wi + wp) * dp * dp + (wi + wm) * dm * dm;
    const Scalar t2 = (wp + Scalar(2) * wi + wm) * dc * dc;
    const Scalar t3 = (Scalar(2) * wi - wp - wm) * (dp * dp + dm * dm);
    acc.add((-(n - Scalar(2)) / Scalar(12) * t1 -
             (n - Scalar(2)) / Scalar(24) * (t2 + t3)) *
            v.values[i]);
  }
  return h * acc.value();
}

/// B_Delta^h(u, v) = -h sum_i u_i^{n-2} (Delta_h u)_i v_i, the discrete
/// weak version of -u^{n-2} u_xx.
template <typename Scalar>
Scalar b_delta(const Field<Scalar>& u, const Field<Scalar>& v, Scalar n) {
  detail::require_same_grid(u, v);
  detail::require_positive(u, "b_delta");
  CompensatedSum<Scalar> acc;
  for (Index i = 0; i < u.size(); ++i)
    acc.add(detail::b_delta_coeff(u, i, n) * v.values[i]);
  return u.grid.spacing() * acc.value();
}

/// A_Delta^h(u, e_i): testing with the nodal basis function reads off the
/// i-th summand directly, O(1) per node.
template <typename Scalar>
Scalar a_delta_node(const Field<Scalar>& u, Index i, Scalar n) {
  return u.grid.spacing() * detail::a_delta_coeff(u, u.grid.wrap(i), n);
}

template <typename Scalar>
Scalar b_delta_node(const Field<Scalar>& u, Index i, Scalar n) {
  return u.grid.spacing() * detail::b_delta_coeff(u, u.grid.wrap(i), n);
}

/// Nodal drift of the split porous-medium correction: node i carries
/// -(C_Strat + S)/h * [A_Delta^h(u, e_i) + B_Delta^h(u, e_i)].
template <typename Scalar>
Field<Scalar> correction_drift(const Field<Scalar>& u, const ModelParams<Scalar>& mp,
                               Scalar c_strat) {
  detail::require_positive(u, "correction_drift");
  const Scalar pref = -(c_strat + mp.reg_s) / u.grid.spacing();
  ArrayX<Scalar> out(u.size());
  const Scalar h = u.grid.spacing();
  for (Index i = 0; i < u.size(); ++i)
    out[i] = pref * h *
             (detail::a_delta_coeff(u, i, mp.n) + detail::b_delta_coeff(u, i, mp.n));
  return Field<Scalar>(u.grid, std::move(out));
}

/// The three drift ingredients of one semi-discrete time derivative.
template <typename Scalar>
struct DriftParts {
  Field<Scalar> flux_part;        // L_i / h per node
  Field<Scalar> correction_part;  // script-L_i / h per node
  Field<Scalar> pressure;
};

template <typename Scalar>
DriftParts<Scalar> drift_parts(const Field<Scalar>& u, const ModelParams<Scalar>& mp,
                               Scalar c_strat) {
  Field<Scalar> p = pressure(u, mp);
  Field<Scalar> flux = flux_divergence(u, p, mp);
  Field<Scalar> corr = correction_drift(u, mp, c_strat);
  return DriftParts<Scalar>{std::move(flux), std::move(corr), std::move(p)};
}

}  // namespace stfilm
