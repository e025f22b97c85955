// SPDX-FileCopyrightText: Copyright (c) 2026 The stfilm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>

#include "stfilm/errors.hpp"
#include "stfilm/summation.hpp"

namespace stfilm {

template <typename Scalar>
using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

/// Periodic uniform 1-D mesh underlying the linear finite-element space.
/// Nodes sit at x_i = i*h with h = length/node_count; node 0 and the node
/// at x = length coincide (wrap convention a_0 := a_{L_h}).
template <typename Scalar>
struct Grid {
  Scalar length{1};
  Index node_count{0};

  Grid() = default;
  Grid(Scalar domain_length, Index nodes)
      : length(domain_length), node_count(nodes) {
    if (!(length > Scalar(0))) throw DimensionError("grid: length must be positive");
    if (node_count < 3)
      throw DimensionError("grid: need at least 3 nodes for three-point stencils");
  }

  Scalar spacing() const { return length / Scalar(node_count); }
  Scalar node(Index i) const { return Scalar(wrap(i)) * spacing(); }
  Index wrap(Index i) const {
    const Index m = i % node_count;
    return m < 0 ? m + node_count : m;
  }
  bool operator==(const Grid& o) const {
    return length == o.length && node_count == o.node_count;
  }
};

/// Nodal values of a periodic piecewise-linear function (element of X_h).
template <typename Scalar>
struct Field {
  Grid<Scalar> grid;
  ArrayX<Scalar> values;

  Field() = default;
  Field(Grid<Scalar> g, ArrayX<Scalar> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.node_count)
      throw DimensionError("field: value count does not match grid");
  }
  static Field constant(Grid<Scalar> g, Scalar c) {
    return Field(g, ArrayX<Scalar>::Constant(g.node_count, c));
  }

  Scalar operator()(Index i) const { return values[grid.wrap(i)]; }
  Index size() const { return grid.node_count; }
};

using GridD = Grid<double>;
using FieldD = Field<double>;

namespace detail {
template <typename Scalar>
void require_same_grid(const Field<Scalar>& f, const Field<Scalar>& g) {
  if (!(f.grid == g.grid)) throw DimensionError("fields live on different grids");
}
}  // namespace detail

/// Lumped scalar product (f,g)_h = h * sum_i f_i g_i.
template <typename Scalar>
Scalar lumped_inner(const Field<Scalar>& f, const Field<Scalar>& g) {
  detail::require_same_grid(f, g);
  CompensatedSum<Scalar> acc;
  for (Index i = 0; i < f.size(); ++i) acc.add(f.values[i] * g.values[i]);
  return f.grid.spacing() * acc.value();
}

template <typename Scalar>
Scalar lumped_norm_sq(const Field<Scalar>& f) {
  return lumped_inner(f, f);
}

/// Forward difference quotient per element: d_i = (f_{i+1} - f_i)/h.
/// Entry i is the constant slope of f on the element [x_i, x_{i+1}].
template <typename Scalar>
ArrayX<Scalar> forward_diff(const Field<Scalar>& f) {
  const Index n = f.size();
  const Scalar h = f.grid.spacing();
  ArrayX<Scalar> d(n);
  for (Index i = 0; i < n; ++i) d[i] = (f(i + 1) - f.values[i]) / h;
  return d;
}

/// Backward difference quotient: (d^- f)_i = (f_i - f_{i-1})/h = (d^+ f)_{i-1}.
template <typename Scalar>
ArrayX<Scalar> backward_diff(const Field<Scalar>& f) {
  const Index n = f.size();
  const Scalar h = f.grid.spacing();
  ArrayX<Scalar> d(n);
  for (Index i = 0; i < n; ++i) d[i] = (f.values[i] - f(i - 1)) / h;
  return d;
}

/// Three-point discrete Laplacian, Delta_h f = d^+(d^- f). Satisfies
/// (Delta_h f, g)_h = -int f_x g_x dx for all g on the same grid.
template <typename Scalar>
Field<Scalar> discrete_laplacian(const Field<Scalar>& f) {
  const Index n = f.size();
  const Scalar h2 = f.grid.spacing() * f.grid.spacing();
  ArrayX<Scalar> out(n);
  for (Index i = 0; i < n; ++i)
    out[i] = (f(i + 1) - Scalar(2) * f.values[i] + f(i - 1)) / h2;
  return Field<Scalar>(f.grid, std::move(out));
}

/// Nodal interpolation I_h[psi], (I_h[psi])(ih) = psi(ih).
template <typename Scalar, typename Func>
Field<Scalar> interpolate(const Grid<Scalar>& grid, Func&& psi) {
  ArrayX<Scalar> v(grid.node_count);
  for (Index i = 0; i < grid.node_count; ++i) v[i] = psi(grid.node(i));
  return Field<Scalar>(grid, std::move(v));
}

/// Pointwise image I_h[fn(u)] of a field under a scalar function.
template <typename Scalar, typename Func>
Field<Scalar> map_nodal(const Field<Scalar>& f, Func&& fn) {
  ArrayX<Scalar> v(f.size());
  for (Index i = 0; i < f.size(); ++i) v[i] = fn(f.values[i]);
  return Field<Scalar>(f.grid, std::move(v));
}

template <typename Scalar>
Scalar mean(const Field<Scalar>& f) {
  CompensatedSum<Scalar> acc;
  for (Index i = 0; i < f.size(); ++i) acc.add(f.values[i]);
  return f.grid.spacing() * acc.value() / f.grid.length;
}

/// int |f_x|^2 dx = h * sum_i |(f_{i+1}-f_i)/h|^2 (exact for X_h).
template <typename Scalar>
Scalar h1_seminorm_sq(const Field<Scalar>& f) {
  const Scalar h = f.grid.spacing();
  CompensatedSum<Scalar> acc;
  for (Index i = 0; i < f.size(); ++i) {
    const Scalar d = (f(i + 1) - f.values[i]) / h;
    acc.add(d * d);
  }
  return h * acc.value();
}

template <typename Scalar>
Scalar min_value(const Field<Scalar>& f) {
  return f.values.minCoeff();
}

template <typename Scalar>
Scalar max_value(const Field<Scalar>& f) {
  return f.values.maxCoeff();
}

/// Largest ratio of neighboring nodal values,
/// max_i max{u_i/u_{i+1}, u_i/u_{i-1}}; the oscillation statistic of a
/// strictly positive field.
template <typename Scalar>
Scalar oscillation_ratio(const Field<Scalar>& f) {
  Scalar worst{1};
  for (Index i = 0; i < f.size(); ++i) {
    const Scalar r = f.values[i] / f(i + 1);
    worst = std::max({worst, r, Scalar(1) / r});
  }
  return worst;
}

}  // namespace stfilm
