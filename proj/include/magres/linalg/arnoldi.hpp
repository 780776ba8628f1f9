// Copyright 2026 The magres Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "magres/common.hpp"
#include "magres/linalg/banded.hpp"

namespace magres::linalg {

struct RitzPair {
  Complex value;
  std::vector<Complex> vector;
  double residual = 0.0;
};

/// Shift-invert Arnoldi for the eigenvalues of a band matrix nearest sigma.
/// Returns k Ritz pairs mapped back to the original spectrum.
inline std::vector<RitzPair> shift_invert_arnoldi(const BandedMatrix<Complex>& a,
                                                  Complex sigma, int k,
                                                  unsigned seed = 7U) {
  const int n = a.size();
  k = std::min(k, n);
  BandedMatrix<Complex> shifted = a;
  shifted.shift_diagonal(-sigma);
  const BandedLU<Complex> lu(std::move(shifted));

  Eigen::MatrixXcd v(n, k + 1);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(k + 1, k);
  std::mt19937 gen(seed);
  std::normal_distribution<double> normal;
  for (int i = 0; i < n; ++i) v(i, 0) = Complex{normal(gen), normal(gen)};
  v.col(0).normalize();

  int m = k;
  for (int j = 0; j < k; ++j) {
    std::vector<Complex> x(v.col(j).data(), v.col(j).data() + n);
    x = lu.solve(std::move(x));
    Eigen::VectorXcd w = Eigen::Map<Eigen::VectorXcd>(x.data(), n);
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXcd c = v.leftCols(j + 1).adjoint() * w;
      w -= v.leftCols(j + 1) * c;
      h.block(0, j, j + 1, 1) += c;
    }
    h(j + 1, j) = w.norm();
    if (std::abs(h(j + 1, j)) < 1e-300) {
      m = j + 1;
      break;
    }
    v.col(j + 1) = w / h(j + 1, j);
  }

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(h.topLeftCorner(m, m));
  if (es.info() != Eigen::Success)
    throw NumericalError("Arnoldi: Hessenberg eigensolve failed");
  std::vector<RitzPair> out;
  out.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const Complex nu = es.eigenvalues()(i);
    if (std::abs(nu) == 0.0) continue;
    const Eigen::VectorXcd y = es.eigenvectors().col(i);
    const Eigen::VectorXcd xv = v.leftCols(m) * y;
    RitzPair p;
    p.value = sigma + 1.0 / nu;
    p.vector.assign(xv.data(), xv.data() + n);
    const double est = m < k + 1 && m < n ? std::abs(h(m, m - 1) * y(m - 1)) : 0.0;
    p.residual = est / (std::abs(nu) * std::abs(nu));
    out.push_back(std::move(p));
  }
  return out;
}

/// Rayleigh quotient iteration from an approximate eigenpair.
inline RitzPair rayleigh_refine(const BandedMatrix<Complex>& a, RitzPair p,
                                int max_iter = 30) {
  const int n = a.size();
  auto normalize = [](std::vector<Complex>& x) {
    double s = 0.0;
    for (const auto& e : x) s += std::norm(e);
    s = std::sqrt(s);
    for (auto& e : x) e /= s;
  };
  normalize(p.vector);
  for (int it = 0; it < max_iter; ++it) {
    BandedMatrix<Complex> shifted = a;
    shifted.shift_diagonal(-p.value);
    std::vector<Complex> y;
    try {
      const BandedLU<Complex> lu(std::move(shifted));
      y = lu.solve(p.vector);
    } catch (const NumericalError&) {
      break;
    }
    normalize(y);
    p.vector = std::move(y);
    const auto ax = a.apply(p.vector);
    Complex q{};
    for (int i = 0; i < n; ++i) q += std::conj(p.vector[i]) * ax[i];
    const Complex step = q - p.value;
    p.value = q;
    if (std::abs(step) < 1e-15 * (1.0 + std::abs(q))) break;
  }
  const auto ax = a.apply(p.vector);
  double r = 0.0;
  for (int i = 0; i < n; ++i) r += std::norm(ax[i] - p.value * p.vector[i]);
  p.residual = std::sqrt(r);
  return p;
}

}  // namespace magres::linalg
