// SPDX-FileCopyrightText: Copyright (c) 2026 The stfilm Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "stfilm/diagnostics.hpp"
#include "stfilm/operators.hpp"

using namespace stfilm;
using doctest::Approx;

namespace {

ModelParams<double> params(double n = 2.5, double p = 4.0, double c_f = 0.02,
                           double kappa = 1.0) {
  ModelParams<double> mp;
  mp.n = n;
  mp.p = p;
  mp.c_f = c_f;
  mp.kappa = kappa;
  mp.length = 1.0;
  return mp;
}

FieldD make_field(double length, std::initializer_list<double> vals) {
  const Index n = static_cast<Index>(vals.size());
  ArrayX<double> v(n);
  Index i = 0;
  for (double x : vals) v[i++] = x;
  return FieldD(GridD(length, n), std::move(v));
}

// Refined-quadrature oracle for the second-difference Ito term: assemble
// d_h^- d_h^+ (M_2^h g_ell) pointwise on an nq-times refined sampling of
// each element, integrate with the trapezoid rule, square and sum.
double ito_brute_force(const FieldD& u, int ell, double lambda, double n, int nq) {
  const GridD& g = u.grid;
  const double h = g.spacing();
  const double L = g.length;
  const FieldD root = mobility_root_field(u, n);
  auto m2 = [&](double x) {
    x = std::fmod(x, L);
    if (x < 0) x += L;
    const Index j = std::min<Index>(static_cast<Index>(x / h), g.node_count - 1);
    const double t = (x - double(j) * h) / h;
    return root.values[j] * (1.0 - t) + root(j + 1) * t;
  };
  auto f = [&](double x) { return m2(x) * basis_eval(ell, x, L); };
  auto second = [&](double x) { return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h); };

  double total = 0.0;
  for (Index i = 0; i < g.node_count; ++i) {
    const double a = double(i) * h;
    const double dx = h / nq;
    double integral = second(a) + second(a + h);
    for (int q = 1; q < nq; ++q) integral += second(a + q * dx) * (q % 2 ? 4.0 : 2.0);
    integral *= dx / 3.0;
    total += integral * integral;
  }
  return lambda * lambda * total / (2.0 * h);
}

}  // namespace

TEST_CASE("averaged singular integral") {
  CHECK(avg_singular_integral(1.0, 2.0, 4.0) == Approx(0.19375).epsilon(1e-14));
  CHECK(avg_singular_integral(2.0, 1.0, 4.0) == Approx(0.19375).epsilon(1e-14));
  CHECK(avg_singular_integral(1.3, 1.3, 4.0) ==
        Approx(std::pow(1.3, -6.0)).epsilon(1e-14));
  CHECK(std::isinf(avg_singular_integral(-1.0, 2.0, 4.0)));
}

TEST_CASE("diagnostics record") {
  auto mp = params();
  GridD g(1.0, 8);
  FieldD c = FieldD::constant(g, 1.3);
  DiagnosticsRecord rc = record(c, pressure(c, mp), mp);
  CHECK(rc.q_quartic == 0.0);
  CHECK(rc.q_laplacian == 0.0);
  CHECK(rc.q_weighted_lap == 0.0);
  CHECK(rc.q_singular == 0.0);
  CHECK(rc.q_log == 0.0);
  CHECK(rc.q_pressure <= 1e-20);
  CHECK(rc.osc_ratio == Approx(1.0));
  CHECK(rc.min_u == Approx(1.3));
  CHECK(rc.mean_u == Approx(1.3));

  auto mp0 = params();
  mp0.c_f = 1e-30;  // effectively pure Dirichlet part
  FieldD u = make_field(1.0, {1.0, 2.0, 1.0, 2.0});
  DiagnosticsRecord ru = record(u, pressure(u, mp0), mp0);
  CHECK(ru.q_laplacian == Approx(1024.0).epsilon(1e-12));
  CHECK(ru.energy == Approx(8.0).epsilon(1e-6));
  CHECK(ru.osc_ratio == Approx(2.0));

  // every quantity is invariant under a cyclic shift
  FieldD shifted = make_field(1.0, {2.0, 1.0, 2.0, 1.0});
  DiagnosticsRecord rs = record(shifted, pressure(shifted, mp0), mp0);
  CHECK(rs.q_laplacian == Approx(ru.q_laplacian).epsilon(1e-13));
  CHECK(rs.q_quartic == Approx(ru.q_quartic).epsilon(1e-13));
  CHECK(rs.q_entropy_diss == Approx(ru.q_entropy_diss).epsilon(1e-13));
  CHECK(rs.q_pressure == Approx(ru.q_pressure).epsilon(1e-13));

  FieldD bad = make_field(1.0, {1.0, -2.0, 1.0, 2.0});
  CHECK_THROWS_AS(record(bad, pressure(u, mp0), mp0), PositivityError);
}

TEST_CASE("holder quotient") {
  GridD g(1.0, 8);
  std::vector<double> times{0.0, 0.5, 1.0};
  std::vector<ArrayX<double>> fields(3, ArrayX<double>::Ones(8));
  CHECK(holder_quotient(times, fields, g) == 0.0);

  // two samples differing by delta in one node at times 0 and 1: h delta^2
  const double delta = 0.3;
  std::vector<double> t2{0.0, 1.0};
  std::vector<ArrayX<double>> f2(2, ArrayX<double>::Ones(8));
  f2[1][4] += delta;
  CHECK(holder_quotient(t2, f2, g) == Approx(g.spacing() * delta * delta).epsilon(1e-14));

  // symmetric in the pair order
  std::vector<double> t2r{1.0, 0.0};
  std::vector<ArrayX<double>> f2r{f2[1], f2[0]};
  CHECK(holder_quotient(t2r, f2r, g) == Approx(holder_quotient(t2, f2, g)));

  std::vector<double> t1{0.0};
  std::vector<ArrayX<double>> f1{fields[0]};
  CHECK_THROWS_AS(holder_quotient(t1, f1, g), DimensionError);
}

TEST_CASE("ito energy term") {
  GridD g(1.0, 16);
  CounterStream s(61, 0, 0);
  FieldD u = random_uniform_field(g, 0.5, 1.5, s);

  // constant field with the constant mode only: second differences vanish
  NoiseSpec spec0 = NoiseSpec::silent(1.0, 2, 0);
  spec0.set_lambda(0, 0.8);
  FieldD c = FieldD::constant(g, 1.2);
  CHECK(ito_energy_value(c, spec0, 2.5) <= 1e-22);

  // quadratic scaling in the amplitudes
  NoiseSpec spec1 = NoiseSpec::silent(1.0, 2, 0);
  spec1.set_balanced(1, 0.4);
  NoiseSpec spec2 = spec1;
  for (auto& l : spec2.lambdas) l *= 2.0;
  CHECK(ito_energy_value(u, spec2, 2.5) ==
        Approx(4.0 * ito_energy_value(u, spec1, 2.5)).epsilon(1e-12));

  // single-mode value against the refined-quadrature brute-force oracle
  for (int ell : {1, -2}) {
    NoiseSpec spec = NoiseSpec::silent(1.0, 3, 0);
    spec.set_balanced(std::abs(ell), 0.0);
    spec.set_lambda(ell, 0.7);
    spec.balanced = false;
    const double exact = ito_energy_value(u, spec, 2.5);
    const double brute = ito_brute_force(u, ell, 0.7, 2.5, 100);
    CHECK(exact == Approx(brute).epsilon(1e-6));
  }

  // lambda_0-only: the closed form matches a direct transcription of the
  // piecewise-constant second-difference double sum
  {
    NoiseSpec spec = NoiseSpec::silent(1.0, 2, 0);
    spec.set_lambda(0, 0.9);
    const FieldD root = mobility_root_field(u, 2.5);
    const double h = g.spacing();
    const double inv_sqrt_l = 1.0 / std::sqrt(g.length);
    double total = 0.0;
    for (Index i = 0; i < g.node_count; ++i) {
      const double slope_m = (root(i) - root(i - 1)) / h;
      const double slope_0 = (root(i + 1) - root(i)) / h;
      const double slope_p = (root(i + 2) - root(i + 1)) / h;
      // (M_2 g_0)_x jumps at nodes; d_h^- of it is constant per element and
      // integrates against e_{i+1} over two half elements
      const double j_left = (slope_0 - slope_m) * inv_sqrt_l / h;
      const double j_right = (slope_p - slope_0) * inv_sqrt_l / h;
      const double integral = 0.5 * h * (j_left + j_right);
      total += integral * integral;
    }
    const double direct = 0.9 * 0.9 * total / (2.0 * h);
    CHECK(ito_energy_value(u, spec, 2.5) == Approx(direct).epsilon(1e-10));
  }

  // balanced pair equals doubled one-sided amplitude on constant fields
  for (int ell : {1, 2}) {
    NoiseSpec pair = NoiseSpec::silent(1.0, 3, 0);
    pair.set_balanced(ell, 0.3);
    NoiseSpec one = NoiseSpec::silent(1.0, 3, 0);
    one.set_lambda(ell, 0.3 * std::sqrt(2.0));
    one.balanced = false;
    CHECK(ito_energy_value(c, pair, 2.5) ==
          Approx(ito_energy_value(c, one, 2.5)).epsilon(1e-12));
  }

  // explicit-constant report carries finite groups and raw sums
  auto mp = params();
  NoiseSpec spec = NoiseSpec::silent(1.0, 2, 0);
  spec.set_lambda(0, 0.5);
  spec.set_balanced(1, 0.25);
  const ItoTermReport rep = ito_energy_term(u, spec, mp, 1.0, 1.0);
  CHECK(rep.lhs >= 0.0);
  CHECK(rep.delta_group >= 0.0);
  CHECK(rep.quartic_group >= 0.0);
  CHECK(rep.raw_weighted_grad > 0.0);
  CHECK(rep.raw_power_n > 0.0);
  CHECK(rep.margin == Approx(rep.delta_group + rep.quartic_group - rep.lhs));
}

TEST_CASE("oscillation-constrained generator") {
  GridD g(1.0, 64);
  CounterStream s(62, 0, 0);
  for (double cosc : {1.2, 2.0}) {
    for (int trial = 0; trial < 50; ++trial) {
      FieldD u = oscillation_constrained_field(g, cosc, 1.0, s);
      CHECK(min_value(u) > 0.0);
      CHECK(oscillation_ratio(u) <= cosc * (1.0 + 1e-12));
      CHECK(mean(u) == Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("lemma suite") {
  auto mp = params();
  GridD g(1.0, 16);

  // constant field: all identities and inequalities hold trivially
  FieldD c = FieldD::constant(g, 1.1);
  for (const LemmaCheck& chk : lemma_suite(c, mp)) {
    INFO(chk.name);
    CHECK(chk.pass);
  }

  // random corpus: zero identity and sign failures
  CounterStream s(63, 0, 0);
  for (int trial = 0; trial < 50; ++trial) {
    FieldD free = random_uniform_field(g, 0.2, 2.5, s);
    FieldD osc = oscillation_constrained_field(g, mp.oscillation_bound(), 1.0, s);
    for (const FieldD* f : {&free, &osc}) {
      for (const LemmaCheck& chk : lemma_suite(*f, mp, 1e-12, trial)) {
        INFO(chk.name << " residual=" << chk.residual << " margin=" << chk.margin);
        CHECK(chk.pass);
      }
    }
  }

  // out-of-hypothesis fields are recorded, not failed
  for (int trial = 0; trial < 20; ++trial) {
    FieldD wild = oscillation_constrained_field(g, 10.0 * mp.oscillation_bound(), 1.0, s);
    if (oscillation_ratio(wild) <= mp.oscillation_bound()) continue;
    for (const LemmaCheck& chk : lemma_suite(wild, mp, 1e-12, trial)) {
      if (chk.name == "lemma_6_2_laplacian_lower_bound") {
        CHECK(!chk.hypothesis_ok);
        CHECK(chk.pass);
      }
    }
  }
}

TEST_CASE("verify corpus aggregation and json") {
  auto mp = params();
  VerifyOptions opt;
  opt.grid_sizes = {4, 8};
  opt.n_values = {2.5};
  opt.c_f_values = {0.02};
  opt.samples = 5;
  const VerifySummary summary = verify_corpus(mp, opt);
  CHECK(summary.ok());
  CHECK(summary.fields_tested == 2 * 2 * 5);
  CHECK(!summary.checks.empty());

  const std::string json = verify_summary_json(summary);
  CHECK(json.find("\"identity_failures\": 0") != std::string::npos);
  CHECK(json.find("\"sign_failures\": 0") != std::string::npos);
  CHECK(json.find("lemma_6_1_gradient_forms") != std::string::npos);
  CHECK(json.find("entropy_consistency") != std::string::npos);
}
