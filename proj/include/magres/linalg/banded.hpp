// Copyright 2026 The magres Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "magres/common.hpp"
#include "magres/linalg/dual.hpp"

namespace magres::linalg {

/// Square band matrix with kl sub- and ku super-diagonals. Row storage keeps
/// kl extra super-diagonals so that partial pivoting can fill in.
template <class S>
class BandedMatrix {
 public:
  BandedMatrix() = default;
  BandedMatrix(int n, int kl, int ku)
      : n_(n), kl_(kl), ku_(ku), width_(2 * kl + ku + 1),
        data_(static_cast<std::size_t>(n) * (2 * kl + ku + 1), S{}) {}

  [[nodiscard]] int size() const { return n_; }
  [[nodiscard]] int kl() const { return kl_; }
  [[nodiscard]] int ku() const { return ku_; }

  [[nodiscard]] bool in_band(int i, int j) const {
    return j >= i - kl_ && j <= i + ku_ && j >= 0 && j < n_;
  }

  S& operator()(int i, int j) { return data_[index(i, j)]; }
  const S& operator()(int i, int j) const { return data_[index(i, j)]; }

  /// Entry or zero outside the band.
  [[nodiscard]] S at(int i, int j) const {
    return in_band(i, j) ? data_[index(i, j)] : S{};
  }

  /// Adds s to every diagonal entry.
  void shift_diagonal(const S& s) {
    for (int i = 0; i < n_; ++i) (*this)(i, i) += s;
  }

  template <class T, class F>
  [[nodiscard]] BandedMatrix<T> convert(F&& f) const {
    BandedMatrix<T> out(n_, kl_, ku_);
    for (int i = 0; i < n_; ++i)
      for (int j = std::max(0, i - kl_); j <= std::min(n_ - 1, i + ku_); ++j)
        out(i, j) = f((*this)(i, j));
    return out;
  }

  /// y = A x.
  template <class V>
  [[nodiscard]] std::vector<V> apply(const std::vector<V>& x) const {
    std::vector<V> y(static_cast<std::size_t>(n_), V{});
    for (int i = 0; i < n_; ++i)
      for (int j = std::max(0, i - kl_); j <= std::min(n_ - 1, i + ku_); ++j)
        y[i] += (*this)(i, j) * x[j];
    return y;
  }

 private:
  [[nodiscard]] std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * width_ + (j - i + kl_);
  }

  template <class>
  friend class BandedLU;

  int n_ = 0;
  int kl_ = 0;
  int ku_ = 0;
  int width_ = 1;
  std::vector<S> data_;
};

/// LU factorization with partial pivoting of a BandedMatrix. Works over any
/// field-like scalar with log() and pivot_magnitude(), so dual numbers give
/// derivatives of log det in the same sweep.
template <class S>
class BandedLU {
 public:
  explicit BandedLU(BandedMatrix<S> a) : a_(std::move(a)) { factor(); }

  [[nodiscard]] int size() const { return a_.n_; }

  /// log det with the branch fixed by the principal logs of the pivots.
  [[nodiscard]] S log_det() const {
    S acc{};
    for (int k = 0; k < a_.n_; ++k) acc += log(a_(k, k));
    if (swaps_ % 2 != 0) acc += S{Complex{0.0, kPi}};
    return acc;
  }

  /// Ratio of the largest to the smallest pivot magnitude.
  [[nodiscard]] double pivot_ratio() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (int k = 0; k < a_.n_; ++k) {
      const double m = pivot_magnitude(a_(k, k));
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
    return hi / lo;
  }

  template <class V>
  [[nodiscard]] std::vector<V> solve(std::vector<V> b) const {
    const int n = a_.n_;
    const int kl = a_.kl_;
    const int reach = a_.kl_ + a_.ku_;
    for (int k = 0; k < n; ++k) {
      if (piv_[k] != k) std::swap(b[k], b[piv_[k]]);
      const int last = std::min(n - 1, k + kl);
      for (int i = k + 1; i <= last; ++i) b[i] -= mult_[lidx(k, i)] * b[k];
    }
    for (int k = n - 1; k >= 0; --k) {
      V s = b[k];
      const int last = std::min(n - 1, k + reach);
      for (int j = k + 1; j <= last; ++j) s -= a_(k, j) * b[j];
      b[k] = s / a_(k, k);
    }
    return b;
  }

 private:
  [[nodiscard]] std::size_t lidx(int k, int i) const {
    return static_cast<std::size_t>(k) * std::max(a_.kl_, 1) + (i - k - 1);
  }

  void factor() {
    const int n = a_.n_;
    const int kl = a_.kl_;
    const int reach = a_.kl_ + a_.ku_;
    piv_.assign(static_cast<std::size_t>(n), 0);
    mult_.assign(static_cast<std::size_t>(n) * std::max(kl, 1), S{});
    for (int k = 0; k < n; ++k) {
      const int last = std::min(n - 1, k + kl);
      int p = k;
      double best = pivot_magnitude(a_(k, k));
      for (int i = k + 1; i <= last; ++i) {
        const double m = pivot_magnitude(a_(i, k));
        if (m > best) {
          best = m;
          p = i;
        }
      }
      if (!(best > 0.0) || !std::isfinite(best))
        throw NumericalError("banded LU: singular pivot at row " +
                             std::to_string(k));
      piv_[k] = p;
      const int jend = std::min(n - 1, k + reach);
      if (p != k) {
        ++swaps_;
        for (int j = k; j <= jend; ++j) std::swap(a_(k, j), a_(p, j));
      }
      const S inv_pivot = S{Complex{1.0, 0.0}} / a_(k, k);
      for (int i = k + 1; i <= last; ++i) {
        const S l = a_(i, k) * inv_pivot;
        mult_[lidx(k, i)] = l;
        a_(i, k) = S{};
        for (int j = k + 1; j <= jend; ++j) a_(i, j) -= l * a_(k, j);
      }
    }
  }

  BandedMatrix<S> a_;
  std::vector<int> piv_;
  std::vector<S> mult_;
  int swaps_ = 0;
};

}  // namespace magres::linalg
