// Copyright 2026 The magres Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "magres/common.hpp"

namespace magres {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1], nodes by Newton on P_n.
inline QuadratureRule gauss_legendre(int n) {
  QuadratureRule r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  return r;
}

struct IntegralResult {
  double value = 0.0;
  int panels = 0;
  double change = 0.0;
};

/// Composite 16-point Gauss-Legendre on [a, b]; panel count doubles until the
/// relative change drops below tol. Throws if max_panels is reached first.
inline IntegralResult composite_gauss(const std::function<double(double)>& f,
                                      double a, double b, double tol = 1e-10,
                                      int min_panels = 4,
                                      int max_panels = 1024) {
  static const QuadratureRule rule = gauss_legendre(16);
  auto eval = [&](int panels) {
    const double w = (b - a) / panels;
    double s = 0.0;
    for (int p = 0; p < panels; ++p) {
      const double lo = a + p * w;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        s += rule.weights[i] * f(lo + 0.5 * w * (rule.nodes[i] + 1.0));
    }
    return 0.5 * w * s;
  };
  IntegralResult res;
  res.panels = min_panels;
  res.value = eval(min_panels);
  while (true) {
    const int next = 2 * res.panels;
    const double v = eval(next);
    res.change = std::abs(v - res.value) / std::max(std::abs(v), 1e-300);
    res.value = v;
    res.panels = next;
    if (res.change < tol || std::abs(v) < 1e-300) return res;
    if (next >= max_panels)
      throw NumericalError("composite quadrature did not converge, change " +
                           std::to_string(res.change));
  }
}

/// Vector-valued composite Gauss-Legendre; convergence is judged on the
/// largest entry change relative to the largest entry. A change between tol
/// and accept_tol at max_panels is accepted, beyond accept_tol it throws.
template <class F>
std::vector<double> composite_gauss_vec(F&& f, std::size_t dim, double a,
                                        double b, double tol = 1e-10,
                                        double accept_tol = 1e-8,
                                        int min_panels = 4,
                                        int max_panels = 2048,
                                        int* panels_used = nullptr) {
  static const QuadratureRule rule = gauss_legendre(16);
  std::vector<double> buf(dim);
  auto eval = [&](int panels) {
    std::vector<double> s(dim, 0.0);
    const double w = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
      const double lo = a + p * w;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        f(lo + 0.5 * w * (rule.nodes[i] + 1.0), buf);
        for (std::size_t k = 0; k < dim; ++k) s[k] += rule.weights[i] * buf[k];
      }
    }
    for (auto& v : s) v *= 0.5 * w;
    return s;
  };
  int panels = min_panels;
  auto prev = eval(panels);
  while (true) {
    panels *= 2;
    auto cur = eval(panels);
    double scale = 0.0;
    double change = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      scale = std::max(scale, std::abs(cur[k]));
      change = std::max(change, std::abs(cur[k] - prev[k]));
    }
    const double rel = scale > 0.0 ? change / scale : 0.0;
    if (rel < tol || (panels >= max_panels && rel < accept_tol)) {
      if (panels_used != nullptr) *panels_used = panels;
      return cur;
    }
    if (panels >= max_panels)
      throw NumericalError("quadrature not converged on node doubling: relative change " +
                           std::to_string(rel));
    prev = std::move(cur);
  }
}

}  // namespace magres
