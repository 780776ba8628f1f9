// Copyright 2026 The magres Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

#include "magres/common.hpp"

namespace magres::linalg {

/// First-order dual number v + d·e with e² = 0.
struct Dual {
  Complex v{};
  Complex d{};

  Dual() = default;
  Dual(Complex value) : v(value) {}  // NOLINT(google-explicit-constructor)
  Dual(Complex value, Complex deriv) : v(value), d(deriv) {}

  Dual& operator+=(const Dual& o) {
    v += o.v;
    d += o.d;
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    d -= o.d;
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    d = d * o.v + v * o.d;
    v *= o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const Complex inv = 1.0 / o.v;
    d = (d - v * inv * o.d) * inv;
    v *= inv;
    return *this;
  }
};

inline Dual operator+(Dual a, const Dual& b) { return a += b; }
inline Dual operator-(Dual a, const Dual& b) { return a -= b; }
inline Dual operator*(Dual a, const Dual& b) { return a *= b; }
inline Dual operator/(Dual a, const Dual& b) { return a /= b; }
inline Dual operator-(const Dual& a) { return {-a.v, -a.d}; }

inline Dual log(const Dual& a) { return {std::log(a.v), a.d / a.v}; }
inline double pivot_magnitude(const Dual& a) { return std::abs(a.v); }

/// Hyper-dual number v + d1·e1 + d2·e2 + d12·e1e2 with e1² = e2² = 0.
struct HyperDual {
  Complex v{};
  Complex d1{};
  Complex d2{};
  Complex d12{};

  HyperDual() = default;
  HyperDual(Complex value) : v(value) {}  // NOLINT(google-explicit-constructor)
  HyperDual(Complex value, Complex e1, Complex e2, Complex e12)
      : v(value), d1(e1), d2(e2), d12(e12) {}

  HyperDual& operator+=(const HyperDual& o) {
    v += o.v;
    d1 += o.d1;
    d2 += o.d2;
    d12 += o.d12;
    return *this;
  }
  HyperDual& operator-=(const HyperDual& o) {
    v -= o.v;
    d1 -= o.d1;
    d2 -= o.d2;
    d12 -= o.d12;
    return *this;
  }
  HyperDual& operator*=(const HyperDual& o) {
    const HyperDual a = *this;
    v = a.v * o.v;
    d1 = a.d1 * o.v + a.v * o.d1;
    d2 = a.d2 * o.v + a.v * o.d2;
    d12 = a.d12 * o.v + a.d1 * o.d2 + a.d2 * o.d1 + a.v * o.d12;
    return *this;
  }
  HyperDual& operator/=(const HyperDual& o) { return *this *= inverse(o); }

  static HyperDual inverse(const HyperDual& a) {
    const Complex i1 = 1.0 / a.v;
    const Complex i2 = i1 * i1;
    return {i1, -a.d1 * i2, -a.d2 * i2, 2.0 * a.d1 * a.d2 * i2 * i1 - a.d12 * i2};
  }
};

inline HyperDual operator+(HyperDual a, const HyperDual& b) { return a += b; }
inline HyperDual operator-(HyperDual a, const HyperDual& b) { return a -= b; }
inline HyperDual operator*(HyperDual a, const HyperDual& b) { return a *= b; }
inline HyperDual operator/(HyperDual a, const HyperDual& b) { return a /= b; }
inline HyperDual operator-(const HyperDual& a) {
  return {-a.v, -a.d1, -a.d2, -a.d12};
}

inline HyperDual log(const HyperDual& a) {
  const Complex i1 = 1.0 / a.v;
  return {std::log(a.v), a.d1 * i1, a.d2 * i1, a.d12 * i1 - a.d1 * a.d2 * i1 * i1};
}
inline double pivot_magnitude(const HyperDual& a) { return std::abs(a.v); }

inline Complex log(const Complex& a) { return std::log(a); }
inline double pivot_magnitude(const Complex& a) { return std::abs(a); }
inline double pivot_magnitude(double a) { return std::abs(a); }

}  // namespace magres::linalg
