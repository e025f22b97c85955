// SPDX-FileCopyrightText: Copyright (c) 2026 The stfilm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <limits>

#include "stfilm/errors.hpp"
#include "stfilm/grid.hpp"

namespace stfilm {

/// Physical parameters of the model: mobility exponent n in (2,3),
/// interface potential F(u) = c_F u^{-p} with p > n, entropy weight kappa,
/// and regularization parameter S.
template <typename Scalar>
struct ModelParams {
  Scalar n{2.5};
  Scalar p{4};
  Scalar c_f{0.02};
  Scalar length{1};
  Scalar kappa{0};
  Scalar reg_s{0};

  void validate() const {
    if (!(n > Scalar(2) && n < Scalar(3)))
      throw ConfigError("model.n: mobility exponent must lie in (2,3)");
    if (!(p > n)) throw ConfigError("model.p: potential exponent must exceed n");
    if (!(c_f > Scalar(0))) throw ConfigError("model.c_f: must be positive");
    if (!(length > Scalar(0))) throw ConfigError("model.length: must be positive");
    if (kappa < Scalar(0)) throw ConfigError("model.kappa: must be nonnegative");
    if (reg_s < Scalar(0)) throw ConfigError("model.s: must be nonnegative");
  }

  /// Uniform bound on neighbor ratios below the energy threshold.
  Scalar oscillation_bound() const { return Scalar(1) + std::sqrt(Scalar(2) * c_f); }
};

/// Interface potential F(u) = c_F u^{-p}; +infinity for nonpositive u.
template <typename Scalar>
Scalar potential(Scalar u, const ModelParams<Scalar>& mp) {
  if (!(u > Scalar(0))) return std::numeric_limits<Scalar>::infinity();
  return mp.c_f * std::pow(u, -mp.p);
}

template <typename Scalar>
Scalar potential_d1(Scalar u, const ModelParams<Scalar>& mp) {
  if (!(u > Scalar(0)))
    throw PositivityError("potential_d1: F' queried at nonpositive argument");
  return -mp.p * mp.c_f * std::pow(u, -mp.p - Scalar(1));
}

template <typename Scalar>
Scalar potential_d2(Scalar u, const ModelParams<Scalar>& mp) {
  if (!(u > Scalar(0)))
    throw PositivityError("potential_d2: F'' queried at nonpositive argument");
  return mp.p * (mp.p + Scalar(1)) * mp.c_f * std::pow(u, -mp.p - Scalar(2));
}

/// Mobility cutoff sigma = (1/2) h^{2/(p+2)}.
template <typename Scalar>
Scalar cutoff_sigma(Scalar h, Scalar p) {
  return Scalar(0.5) * std::pow(h, Scalar(2) / (p + Scalar(2)));
}

/// Shifted pointwise mobility m_sigma(s) = max(sigma, s)^n.
template <typename Scalar>
Scalar shifted_mobility(Scalar s, Scalar sigma, Scalar n) {
  return std::pow(std::max(sigma, s), n);
}

// Closed-form antiderivatives of 1/m_sigma = max(sigma,tau)^{-n}, split at
// the cutoff. These must stay closed-form: the entropy consistency of the
// discrete mobility holds elementwise exactly only because the element
// mobility and g_h share the same antiderivative.

/// g_h(s) = int_1^s m_sigma(tau)^{-1} dtau. Total on all reals.
template <typename Scalar>
Scalar entropy_density_d1(Scalar s, Scalar sigma, Scalar n) {
  const auto power_branch = [n](Scalar x) -> Scalar {
    // int_1^x tau^{-n} dtau for x >= sigma (power-law region)
    if (n == Scalar(1)) return std::log(x);
    return (std::pow(x, Scalar(1) - n) - Scalar(1)) / (Scalar(1) - n);
  };
  if (s >= sigma) return power_branch(s);
  return power_branch(sigma) + std::pow(sigma, -n) * (s - sigma);
}

/// G_h(s) = int_1^s g_h(mu) dmu, the nonnegative discrete entropy density.
template <typename Scalar>
Scalar entropy_density(Scalar s, Scalar sigma, Scalar n) {
  const auto power_branch = [n](Scalar x) -> Scalar {
    // int_1^x g dmu within the power-law region
    if (n == Scalar(1)) return x * std::log(x) - x + Scalar(1);
    if (n == Scalar(2)) return (x - Scalar(1)) - std::log(x);
    return (std::pow(x, Scalar(2) - n) - Scalar(1)) /
               ((Scalar(1) - n) * (Scalar(2) - n)) -
           (x - Scalar(1)) / (Scalar(1) - n);
  };
  if (s >= sigma) return power_branch(s);
  const Scalar d = s - sigma;
  return power_branch(sigma) + entropy_density_d1(sigma, sigma, n) * d +
         Scalar(0.5) * std::pow(sigma, -n) * d * d;
}

/// Elementwise discrete mobility: the inverse of the integral average of
/// 1/m_sigma between the two endpoint values, m_sigma(a) when they agree.
/// Closed form via g_h, so M * (g_h(b) - g_h(a)) = b - a holds exactly.
/// Endpoints so close that g_h(b) - g_h(a) underflows to zero are treated
/// as equal.
template <typename Scalar>
Scalar mobility_element(Scalar a, Scalar b, Scalar sigma, Scalar n) {
  if (a == b) return shifted_mobility(a, sigma, n);
  const Scalar dg = entropy_density_d1(b, sigma, n) - entropy_density_d1(a, sigma, n);
  if (dg == Scalar(0)) return shifted_mobility(a, sigma, n);
  return (b - a) / dg;
}

/// Discrete mobility root M_2^h(u) = I_h[|u|^{n/2}].
template <typename Scalar>
Field<Scalar> mobility_root_field(const Field<Scalar>& u, Scalar n) {
  return map_nodal(u, [n](Scalar s) { return std::pow(std::abs(s), n / Scalar(2)); });
}

/// E_h[u] = 1/2 int |u_x|^2 dx + h sum_i F(u_i); +infinity once any nodal
/// value is nonpositive.
template <typename Scalar>
Scalar energy(const Field<Scalar>& u, const ModelParams<Scalar>& mp) {
  if (!(min_value(u) > Scalar(0))) return std::numeric_limits<Scalar>::infinity();
  CompensatedSum<Scalar> pot;
  for (Index i = 0; i < u.size(); ++i) pot.add(potential(u.values[i], mp));
  return Scalar(0.5) * h1_seminorm_sq(u) + u.grid.spacing() * pot.value();
}

/// S_h[u] = h sum_i G_h(u_i).
template <typename Scalar>
Scalar entropy_functional(const Field<Scalar>& u, Scalar sigma, Scalar n) {
  CompensatedSum<Scalar> acc;
  for (Index i = 0; i < u.size(); ++i)
    acc.add(entropy_density(u.values[i], sigma, n));
  return u.grid.spacing() * acc.value();
}

/// R = E_h[u] + kappa S_h[u]; sigma is derived from the grid spacing.
template <typename Scalar>
Scalar combined_quantity(const Field<Scalar>& u, const ModelParams<Scalar>& mp) {
  const Scalar sigma = cutoff_sigma(u.grid.spacing(), mp.p);
  return energy(u, mp) + mp.kappa * entropy_functional(u, sigma, mp.n);
}

}  // namespace stfilm
