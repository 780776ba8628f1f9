// Copyright 2026 The magres Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace magres {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or a violated model hypothesis.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed to converge or hit a singular configuration.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A spectral parameter lies on the essential spectrum Γ_{level,θ}.
class RayCollisionError : public NumericalError {
 public:
  RayCollisionError(int level, const std::string& what)
      : NumericalError(what), level_(level) {}
  [[nodiscard]] int level() const { return level_; }

 private:
  int level_;
};

/// Newton left its capture basin; carries the visited iterates.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(std::vector<Complex> trajectory, const std::string& what)
      : NumericalError(what), trajectory_(std::move(trajectory)) {}
  [[nodiscard]] const std::vector<Complex>& trajectory() const {
    return trajectory_;
  }

 private:
  std::vector<Complex> trajectory_;
};

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

/// Distance from z to the half-line origin + direction * [0, inf).
inline double distance_to_ray(Complex z, Complex origin, Complex direction) {
  const Complex u = direction / std::abs(direction);
  const Complex d = z - origin;
  const double s = (d * std::conj(u)).real();
  if (s <= 0.0) return std::abs(d);
  return std::abs(d - s * u);
}

}  // namespace magres
