// SPDX-FileCopyrightText: Copyright (c) 2026 The stfilm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace stfilm {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
}  // namespace detail

// Counter-based normal stream keyed by (master seed, path, substream).
// Draw k is a pure function of (key, k), so ensemble parallelism cannot
// reorder draws; identical keys give bit-identical sequences on any
// platform with IEEE doubles.
class CounterStream {
 public:
  CounterStream() = default;
  CounterStream(std::uint64_t master, std::uint64_t path, std::uint64_t substream) {
    key_ = detail::splitmix64(master + detail::kGamma);
    key_ = detail::splitmix64(key_ ^ detail::splitmix64(path + 0x123456789ABCDEFULL));
    key_ = detail::splitmix64(key_ ^ detail::splitmix64(substream + 0x0F0F0F0F0F0F0F0FULL));
  }

  /// Uniform draw in the open interval (0,1).
  double uniform() {
    const std::uint64_t z = detail::splitmix64(key_ + (++counter_) * detail::kGamma);
    return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (pairs cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t key_{0};
  std::uint64_t counter_{0};
  double spare_{0};
  bool have_spare_{false};
};

}  // namespace stfilm
