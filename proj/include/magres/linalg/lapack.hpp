// Copyright 2026 The magres Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <string>
#include <vector>

#ifndef LAPACK_COMPLEX_CPP
#define LAPACK_COMPLEX_CPP
#endif
#include <lapacke.h>

#include <Eigen/Dense>

#include "magres/common.hpp"
#include "magres/linalg/banded.hpp"

namespace magres::linalg {

/// Eigenvalues of a dense complex matrix (LAPACK zgeev, no vectors).
inline std::vector<Complex> eigenvalues(Eigen::MatrixXcd a) {
  const auto n = static_cast<lapack_int>(a.rows());
  if (n == 0) return {};
  std::vector<Complex> w(static_cast<std::size_t>(n));
  const lapack_int info =
      LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n,
                    reinterpret_cast<lapack_complex_double*>(a.data()), n,
                    reinterpret_cast<lapack_complex_double*>(w.data()),
                    nullptr, 1, nullptr, 1);
  if (info != 0)
    throw NumericalError("zgeev failed with info " + std::to_string(info));
  return w;
}

/// Ascending eigenvalues of a real symmetric band matrix given by its upper
/// band (LAPACK dsbev). Entry (i, j), j >= i, is read from a(i, j).
inline std::vector<double> symmetric_band_eigenvalues(
    const BandedMatrix<Complex>& a, int kd) {
  const int n = a.size();
  if (n == 0) return {};
  const int ldab = kd + 1;
  std::vector<double> ab(static_cast<std::size_t>(ldab) * n, 0.0);
  for (int j = 0; j < n; ++j)
    for (int i = std::max(0, j - kd); i <= j; ++i)
      ab[static_cast<std::size_t>(j) * ldab + (kd + i - j)] = a.at(i, j).real();
  std::vector<double> w(static_cast<std::size_t>(n));
  const lapack_int info = LAPACKE_dsbev(LAPACK_COL_MAJOR, 'N', 'U', n, kd,
                                        ab.data(), ldab, w.data(), nullptr, 1);
  if (info != 0)
    throw NumericalError("dsbev failed with info " + std::to_string(info));
  return w;
}

}  // namespace magres::linalg
