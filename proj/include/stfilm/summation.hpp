// SPDX-FileCopyrightText: Copyright (c) 2026 The stfilm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>

namespace stfilm {

// Neumaier-compensated accumulator. The discrete identities in the test
// suite are asserted at 1e-12 relative to the term scale, which plain
// left-to-right summation does not reliably reach at L_h = 4096.
template <typename Scalar>
class CompensatedSum {
 public:
  void add(Scalar x) {
    const Scalar t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }

  Scalar value() const { return sum_ + comp_; }

 private:
  Scalar sum_{0};
  Scalar comp_{0};
};

/// Compensated sum of any indexable expression of known size.
template <typename Derived>
auto compensated_sum(const Derived& v) {
  using Scalar = decltype(v[0] + v[0]);
  CompensatedSum<Scalar> acc;
  for (decltype(v.size()) i = 0; i < v.size(); ++i) acc.add(v[i]);
  return acc.value();
}

}  // namespace stfilm
