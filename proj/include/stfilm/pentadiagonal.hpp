// SPDX-FileCopyrightText: Copyright (c) 2026 The stfilm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <vector>

#include "stfilm/errors.hpp"
#include "stfilm/grid.hpp"

namespace stfilm {

// Direct solver for cyclic pentadiagonal systems: banded LU with partial
// pivoting on the band part, rank-4 Woodbury correction for the periodic
// corner entries. Small systems (N < 7), where the corners overlap the
// band, fall back to a dense factorization.
//
// Bands are passed as five length-N arrays indexed by row i:
//   sub2[i] = A(i, i-2), sub1[i] = A(i, i-1), diag[i] = A(i, i),
//   sup1[i] = A(i, i+1), sup2[i] = A(i, i+2),   all indices mod N.
template <typename Scalar>
class CyclicPentadiagonalSolver {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  static constexpr int kl_ = 2;  // subdiagonals
  static constexpr int ku_ = 2;  // superdiagonals

 public:
  CyclicPentadiagonalSolver(const ArrayX<Scalar>& sub2, const ArrayX<Scalar>& sub1,
                            const ArrayX<Scalar>& diag, const ArrayX<Scalar>& sup1,
                            const ArrayX<Scalar>& sup2)
      : n_(diag.size()) {
    if (sub2.size() != n_ || sub1.size() != n_ || sup1.size() != n_ ||
        sup2.size() != n_)
      throw DimensionError("pentadiagonal: band lengths disagree");
    if (n_ < 3) throw DimensionError("pentadiagonal: system too small");

    if (n_ < 7) {
      // Corners collide with the band; assemble densely (entries add).
      Matrix a = Matrix::Zero(n_, n_);
      for (Index i = 0; i < n_; ++i) {
        a(i, wrap(i - 2)) += sub2[i];
        a(i, wrap(i - 1)) += sub1[i];
        a(i, i) += diag[i];
        a(i, wrap(i + 1)) += sup1[i];
        a(i, wrap(i + 2)) += sup2[i];
      }
      dense_ = Eigen::PartialPivLU<Matrix>(a);
      if (!(std::abs(dense_->determinant()) > Scalar(0)))
        throw SolverError("pentadiagonal: dense factorization is singular");
      return;
    }

    // Band part without the wrap entries.
    const int rows = 2 * kl_ + ku_ + 1;  // kl_ extra rows for pivoting fill
    ab_ = Matrix::Zero(rows, n_);
    ipiv_.assign(static_cast<size_t>(n_), 0);
    auto at = [this](Index i, Index j) -> Scalar& {
      return ab_(kl_ + ku_ + i - j, j);
    };
    for (Index i = 0; i < n_; ++i) {
      if (i - 2 >= 0) at(i, i - 2) = sub2[i];
      if (i - 1 >= 0) at(i, i - 1) = sub1[i];
      at(i, i) = diag[i];
      if (i + 1 < n_) at(i, i + 1) = sup1[i];
      if (i + 2 < n_) at(i, i + 2) = sup2[i];
    }

    // Corner entries A = B + U V^T: rows 0,1 reach columns n-2,n-1 and
    // rows n-2,n-1 reach columns 0,1.
    u_ = Matrix::Zero(n_, 4);
    v_ = Matrix::Zero(n_, 4);
    u_(0, 0) = u_(1, 1) = u_(n_ - 2, 2) = u_(n_ - 1, 3) = Scalar(1);
    v_(n_ - 2, 0) = sub2[0];
    v_(n_ - 1, 0) = sub1[0];
    v_(n_ - 1, 1) = sub2[1];
    v_(0, 2) = sup2[n_ - 2];
    v_(0, 3) = sup1[n_ - 1];
    v_(1, 3) = sup2[n_ - 1];

    factor_band();

    // Capacitance matrix of the Woodbury update.
    Matrix z(n_, 4);
    for (int c = 0; c < 4; ++c) z.col(c) = band_solve(u_.col(c));
    cap_ = Matrix::Identity(4, 4) + v_.transpose() * z;
    cap_lu_ = Eigen::PartialPivLU<Matrix>(cap_);
    if (!(std::abs(cap_lu_->determinant()) > Scalar(0)))
      throw SolverError("pentadiagonal: cyclic correction is singular");
    zcols_ = std::move(z);
  }

  Vector solve(const Vector& rhs) const {
    if (rhs.size() != n_) throw DimensionError("pentadiagonal: rhs size mismatch");
    if (dense_) return dense_->solve(rhs);
    Vector y = band_solve(rhs);
    Eigen::Matrix<Scalar, 4, 1> w = cap_lu_->solve(v_.transpose() * y);
    return y - zcols_ * w;
  }

 private:
  Index wrap(Index i) const { return (i % n_ + n_) % n_; }

  // LAPACK-style unblocked banded LU with partial pivoting (gbtf2).
  void factor_band() {
    const int kv = kl_ + ku_;
    Index ju = 0;
    for (Index j = 0; j < n_; ++j) {
      const Index km = std::min<Index>(kl_, n_ - 1 - j);
      Index jp = 0;
      for (Index i = 1; i <= km; ++i)
        if (std::abs(ab_(kv + i, j)) > std::abs(ab_(kv + jp, j))) jp = i;
      ipiv_[static_cast<size_t>(j)] = j + jp;
      if (ab_(kv + jp, j) == Scalar(0))
        throw SolverError("pentadiagonal: zero pivot in band factorization");
      ju = std::max(ju, std::min<Index>(j + ku_ + jp, n_ - 1));
      if (jp != 0)
        for (Index k = j; k <= ju; ++k)
          std::swap(ab_(kv + j - k, k), ab_(kv + j + jp - k, k));
      if (km > 0) {
        for (Index i = 1; i <= km; ++i) ab_(kv + i, j) /= ab_(kv, j);
        for (Index k = j + 1; k <= ju; ++k) {
          const Scalar top = ab_(kv + j - k, k);
          if (top != Scalar(0))
            for (Index i = 1; i <= km; ++i)
              ab_(kv + j + i - k, k) -= ab_(kv + i, j) * top;
        }
      }
    }
  }

  Vector band_solve(const Vector& rhs) const {
    const int kv = kl_ + ku_;
    Vector b = rhs;
    for (Index j = 0; j < n_ - 1; ++j) {
      const Index pj = ipiv_[static_cast<size_t>(j)];
      if (pj != j) std::swap(b[j], b[pj]);
      const Index km = std::min<Index>(kl_, n_ - 1 - j);
      for (Index i = 1; i <= km; ++i) b[j + i] -= ab_(kv + i, j) * b[j];
    }
    for (Index j = n_ - 1; j >= 0; --j) {
      b[j] /= ab_(kv, j);
      const Index top = std::max<Index>(Index(0), j - kv);
      for (Index i = top; i < j; ++i) b[i] -= ab_(kv + i - j, j) * b[j];
    }
    return b;
  }

  Index n_;
  Matrix ab_;
  std::vector<Index> ipiv_;
  Matrix u_, v_, zcols_, cap_;
  std::optional<Eigen::PartialPivLU<Matrix>> cap_lu_;
  std::optional<Eigen::PartialPivLU<Matrix>> dense_;
};

}  // namespace stfilm
