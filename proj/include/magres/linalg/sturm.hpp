// Copyright 2026 The magres Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "magres/common.hpp"
#include "magres/linalg/banded.hpp"

namespace magres::linalg {

/// Real symmetric band matrix, lower storage: entry (i, i - d) for d = 0..kd.
class SymmetricBand {
 public:
  SymmetricBand(int n, int kd)
      : n_(n), kd_(kd), a_(static_cast<std::size_t>(n) * (kd + 1), 0.0) {}

  /// Real parts of the lower band of a (assumed symmetric).
  static SymmetricBand from(const BandedMatrix<Complex>& a, int kd) {
    SymmetricBand s(a.size(), kd);
    for (int i = 0; i < s.n_; ++i)
      for (int d = 0; d <= kd && i - d >= 0; ++d) s(i, d) = a.at(i, i - d).real();
    return s;
  }

  [[nodiscard]] int size() const { return n_; }
  [[nodiscard]] int kd() const { return kd_; }
  double& operator()(int i, int d) { return a_[static_cast<std::size_t>(i) * (kd_ + 1) + d]; }
  double operator()(int i, int d) const {
    return a_[static_cast<std::size_t>(i) * (kd_ + 1) + d];
  }

  /// Number of eigenvalues below x, from the inertia of an LDL^T
  /// factorization of A - x (Sylvester's law).
  [[nodiscard]] int count_below(double x) const {
    const int w = kd_ + 1;
    std::vector<double> l(a_.size(), 0.0);
    std::vector<double> d(static_cast<std::size_t>(n_), 0.0);
    int negative = 0;
    for (int i = 0; i < n_; ++i) {
      const std::size_t ri = static_cast<std::size_t>(i) * w;
      for (int o = kd_; o >= 1; --o) {
        const int j = i - o;
        if (j < 0) continue;
        const std::size_t rj = static_cast<std::size_t>(j) * w;
        double v = (*this)(i, o);
        for (int k = std::max(0, i - kd_); k < j; ++k) v -= l[ri + (i - k)] * l[rj + (j - k)] * d[k];
        l[ri + o] = v / d[j];
      }
      double v = (*this)(i, 0) - x;
      for (int k = std::max(0, i - kd_); k < i; ++k) v -= l[ri + (i - k)] * l[ri + (i - k)] * d[k];
      if (v == 0.0) v = -1e-300;
      d[i] = v;
      if (v < 0.0) ++negative;
    }
    return negative;
  }

  /// Eigenvalues in [lo, hi) by bisection on the inertia count.
  [[nodiscard]] std::vector<double> eigenvalues_in(double lo, double hi, double tol = 1e-13) const {
    struct Interval {
      double a, b;
      int ca, cb;
    };
    std::vector<double> out;
    std::vector<Interval> stack{{lo, hi, count_below(lo), count_below(hi)}};
    while (!stack.empty()) {
      const auto it = stack.back();
      stack.pop_back();
      const int k = it.cb - it.ca;
      if (k <= 0) continue;
      if (it.b - it.a < tol * (1.0 + std::abs(it.a))) {
        for (int i = 0; i < k; ++i) out.push_back(0.5 * (it.a + it.b));
        continue;
      }
      const double m = 0.5 * (it.a + it.b);
      const int cm = count_below(m);
      stack.push_back({it.a, m, it.ca, cm});
      stack.push_back({m, it.b, cm, it.cb});
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  int n_;
  int kd_;
  std::vector<double> a_;
};

}  // namespace magres::linalg
