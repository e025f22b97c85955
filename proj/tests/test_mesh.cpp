// SPDX-FileCopyrightText: Copyright (c) 2026 The stfilm Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "stfilm/grid.hpp"
#include "stfilm/rng.hpp"

using namespace stfilm;
using doctest::Approx;

namespace {

FieldD make_field(double length, std::initializer_list<double> vals) {
  const Index n = static_cast<Index>(vals.size());
  ArrayX<double> v(n);
  Index i = 0;
  for (double x : vals) v[i++] = x;
  return FieldD(GridD(length, n), std::move(v));
}

FieldD random_field(const GridD& g, CounterStream& s, double lo = -1.0, double hi = 1.0) {
  ArrayX<double> v(g.node_count);
  for (Index i = 0; i < g.node_count; ++i) v[i] = lo + (hi - lo) * s.uniform();
  return FieldD(g, std::move(v));
}

// composite Simpson on a refined grid, independent of the mesh operators
template <typename F>
double simpson(F&& f, double a, double b, int n) {
  double s = f(a) + f(b);
  const double h = (b - a) / n;
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("grid invariants") {
  GridD g(1.0, 4);
  CHECK(g.spacing() == Approx(0.25).epsilon(1e-15));
  CHECK(g.spacing() * double(g.node_count) == Approx(g.length).epsilon(1e-15));
  CHECK_THROWS_AS(GridD(1.0, 2), DimensionError);
  CHECK_THROWS_AS(GridD(-1.0, 8), DimensionError);
  // periodic index access
  FieldD f = make_field(1.0, {1.0, 2.0, 3.0, 4.0});
  for (Index i = 0; i < 4; ++i) CHECK(f(i) == f(i + 4));
  // wrap convention: a_0 and the node at x = L coincide
  CHECK(f(0) == f(4));
}

TEST_CASE("lumped inner product") {
  FieldD f = make_field(1.0, {1.0, 2.0, 1.0, 2.0});
  FieldD g = make_field(1.0, {1.0, 1.0, 1.0, 1.0});
  CHECK(lumped_inner(f, g) == Approx(1.5).epsilon(1e-15));

  FieldD z = FieldD::constant(GridD(1.0, 4), 0.0);
  CHECK(lumped_inner(z, z) == 0.0);

  // (c, 1)_h = c * L for any constant
  for (double c : {0.3, -2.0, 7.5}) {
    FieldD cc = FieldD::constant(GridD(3.0, 5), c);
    FieldD one = FieldD::constant(GridD(3.0, 5), 1.0);
    CHECK(lumped_inner(cc, one) == Approx(c * 3.0).epsilon(1e-14));
  }

  FieldD other(GridD(1.0, 5), ArrayX<double>::Zero(5));
  CHECK_THROWS_AS(lumped_inner(f, other), DimensionError);

  // symmetry and positive definiteness
  CounterStream s(1, 2, 3);
  GridD gr(2.0, 16);
  FieldD a = random_field(gr, s), b = random_field(gr, s);
  CHECK(lumped_inner(a, b) == Approx(lumped_inner(b, a)).epsilon(1e-15));
  CHECK(lumped_inner(a, a) > 0.0);
}

TEST_CASE("difference quotients") {
  FieldD f = make_field(1.0, {1.0, 2.0, 1.0, 2.0});
  ArrayX<double> d = forward_diff(f);
  CHECK(d[0] == Approx(4.0));
  CHECK(d[1] == Approx(-4.0));
  CHECK(d[2] == Approx(4.0));
  CHECK(d[3] == Approx(-4.0));

  ArrayX<double> bd = backward_diff(f);
  for (Index i = 0; i < 4; ++i) CHECK(bd[i] == Approx(d[f.grid.wrap(i - 1)]));

  FieldD c = FieldD::constant(GridD(1.0, 8), 3.0);
  CHECK(forward_diff(c).abs().maxCoeff() == 0.0);

  // I_h[x -> x] is not periodic across the wrap: at the last node the
  // forward quotient sees the jump back to x = 0.
  GridD g(1.0, 4);
  FieldD ramp = interpolate<double>(g, [](double x) { return x; });
  ArrayX<double> dr = forward_diff(ramp);
  const double h = g.spacing();
  CHECK(dr[3] == Approx((ramp.values[0] - ramp.values[3]) / h));
  CHECK(dr[3] == Approx(-(g.length - h) / h));
}

TEST_CASE("discrete laplacian") {
  FieldD f = make_field(1.0, {1.0, 2.0, 1.0, 2.0});
  FieldD lap = discrete_laplacian(f);
  CHECK(lap.values[0] == Approx(32.0));
  CHECK(lap.values[1] == Approx(-32.0));
  CHECK(lap.values[2] == Approx(32.0));
  CHECK(lap.values[3] == Approx(-32.0));

  FieldD c = FieldD::constant(GridD(2.0, 6), 4.2);
  CHECK(discrete_laplacian(c).values.abs().maxCoeff() == 0.0);

  // (Delta_h f, g)_h = -int f_x g_x dx, both sides independent routes
  CounterStream s(4, 5, 6);
  for (Index n : {Index(4), Index(16), Index(64), Index(256)}) {
    GridD g(1.5, n);
    FieldD a = random_field(g, s), b = random_field(g, s);
    const double lhs = lumped_inner(discrete_laplacian(a), b);
    const double h = g.spacing();
    CompensatedSum<double> stiff, scale;
    for (Index i = 0; i < n; ++i) {
      const double da = (a(i + 1) - a.values[i]) / h;
      const double db = (b(i + 1) - b.values[i]) / h;
      stiff.add(da * db);
      scale.add(std::abs(da * db));
    }
    const double rhs = -h * stiff.value();
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, h * scale.value()));
  }
}

TEST_CASE("interpolation") {
  GridD g(1.0, 4);
  FieldD c = interpolate<double>(g, [](double) { return 3.0; });
  CHECK(c.values.minCoeff() == 3.0);
  CHECK(c.values.maxCoeff() == 3.0);

  // sin(2 pi x) at the nodes h, 2h, 3h, 4h = L is (1, 0, -1, 0)
  FieldD s = interpolate<double>(g, [&](double x) {
    return std::sin(2.0 * std::numbers::pi * x / g.length);
  });
  CHECK(s.values[g.wrap(1)] == Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(s.values[g.wrap(2)]) < 1e-14);
  CHECK(s.values[g.wrap(3)] == Approx(-1.0).epsilon(1e-14));
  CHECK(std::abs(s.values[g.wrap(4)]) < 1e-14);
}

TEST_CASE("interpolation mean estimate under refinement") {
  // |mean(I_h v) - mean(v)| <= C h ||v_x||_L2 on a smooth periodic v
  auto v = [](double x) { return std::exp(std::sin(2.0 * std::numbers::pi * x)); };
  auto vx = [](double x) {
    const double w = 2.0 * std::numbers::pi;
    return w * std::cos(w * x) * std::exp(std::sin(w * x));
  };
  const double exact_mean = simpson(v, 0.0, 1.0, 1 << 14);
  const double grad_norm =
      std::sqrt(simpson([&](double x) { return vx(x) * vx(x); }, 0.0, 1.0, 1 << 14));
  for (Index n : {Index(8), Index(16), Index(32), Index(64), Index(128)}) {
    GridD g(1.0, n);
    const double dev = std::abs(mean(interpolate<double>(g, v)) - exact_mean);
    CHECK(dev <= 1.0 * g.spacing() * grad_norm);
  }
}

TEST_CASE("reductions") {
  FieldD f = make_field(1.0, {1.0, 2.0, 1.0, 2.0});
  CHECK(mean(f) == Approx(1.5).epsilon(1e-15));
  // h * sum |(f_{i+1}-f_i)/h|^2 = 0.25 * 4 * 16; equals int |f_x|^2 dx
  CHECK(h1_seminorm_sq(f) == Approx(16.0).epsilon(1e-15));
  CHECK(min_value(f) == 1.0);

  FieldD c = FieldD::constant(GridD(2.0, 7), -0.5);
  CHECK(mean(c) == Approx(-0.5).epsilon(1e-15));
  CHECK(h1_seminorm_sq(c) == 0.0);
  CHECK(min_value(c) == -0.5);

  // cyclic shift invariance of the seminorm
  CounterStream s(7, 8, 9);
  GridD g(1.0, 32);
  FieldD a = random_field(g, s);
  ArrayX<double> shifted(g.node_count);
  for (Index i = 0; i < g.node_count; ++i) shifted[i] = a(i + 5);
  FieldD b(g, std::move(shifted));
  CHECK(h1_seminorm_sq(a) == Approx(h1_seminorm_sq(b)).epsilon(1e-13));
}

TEST_CASE("summation by parts and telescoping") {
  CounterStream s(10, 11, 12);
  for (Index n : {Index(4), Index(16), Index(64), Index(1024), Index(4096)}) {
    GridD g(1.0, n);
    FieldD f = random_field(g, s), v = random_field(g, s);
    const double h = g.spacing();
    CompensatedSum<double> lhs, rhs, scale;
    for (Index i = 0; i < n; ++i) {
      const double df = (f(i + 1) - f.values[i]) / h;
      const double dv = (v(i + 1) - v.values[i]) / h;
      lhs.add(df * v.values[i]);
      rhs.add(f(i + 1) * dv);
      scale.add(std::abs(df * v.values[i]) + std::abs(f(i + 1) * dv));
    }
    CHECK(std::abs(h * lhs.value() + h * rhs.value()) <=
          1e-12 * std::max(1.0, h * scale.value()));

    // self-adjointness of the lumped laplacian
    const double sa1 = lumped_inner(discrete_laplacian(f), v);
    const double sa2 = lumped_inner(f, discrete_laplacian(v));
    CHECK(std::abs(sa1 - sa2) <= 1e-12 * std::max({1.0, std::abs(sa1), std::abs(sa2)}));

    // telescoping: sum_i (Delta_h f)_i = 0
    FieldD lap = discrete_laplacian(f);
    CompensatedSum<double> tot, tscale;
    for (Index i = 0; i < n; ++i) {
      tot.add(lap.values[i]);
      tscale.add(std::abs(lap.values[i]));
    }
    CHECK(std::abs(tot.value()) <= 1e-12 * std::max(1.0, tscale.value()));
  }
}
