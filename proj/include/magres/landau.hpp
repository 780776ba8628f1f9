// Copyright 2026 The magres Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "magres/common.hpp"
#include "magres/quadrature.hpp"

namespace magres::landau {

enum class TransverseFamily { gaussian, power_law, compact_support, constant };

/// Radial transverse potential W(rho) = amplitude * f(rho / scale).
///   gaussian:        exp(-(rho/scale)^2)
///   power_law:       (1 + (rho/scale)^2)^(-alpha/2)
///   compact_support: 1 for rho < scale
///   constant:        1
struct TransversePotential {
  TransverseFamily family = TransverseFamily::gaussian;
  double amplitude = 1.0;
  double scale = 1.0;
  double alpha = 4.0;

  [[nodiscard]] double operator()(double rho) const {
    const double u = rho / scale;
    switch (family) {
      case TransverseFamily::gaussian: return amplitude * std::exp(-u * u);
      case TransverseFamily::power_law: return amplitude * std::pow(1.0 + u * u, -0.5 * alpha);
      case TransverseFamily::compact_support: return u < 1.0 ? amplitude : 0.0;
      case TransverseFamily::constant: return amplitude;
    }
    return 0.0;
  }

  /// Decay exponent delta_perp; infinite unless power_law.
  [[nodiscard]] double decay_exponent() const {
    if (family == TransverseFamily::power_law) return alpha;
    if (family == TransverseFamily::constant) return 0.0;
    return std::numeric_limits<double>::infinity();
  }

  [[nodiscard]] double sup_abs() const { return std::abs(amplitude); }

  [[nodiscard]] TransversePotential scaled(double c) const {
    TransversePotential w = *this;
    w.amplitude *= c;
    return w;
  }
};

inline std::string family_name(TransverseFamily f) {
  switch (f) {
    case TransverseFamily::gaussian: return "gaussian";
    case TransverseFamily::power_law: return "power_law";
    case TransverseFamily::compact_support: return "compact_support";
    case TransverseFamily::constant: return "constant";
  }
  return "gaussian";
}

/// W as a function of t = b rho^2 / 2, with log W and its t-derivative for
/// locating the integration window.
class RadialProfile {
 public:
  RadialProfile(const TransversePotential& w, double b) : w_(w), b_(b) {
    if (!(b > 0.0)) throw ConfigError("magnetic field b must be positive");
    beta_ = 2.0 / (b * w.scale * w.scale);
  }

  [[nodiscard]] double value(double t) const {
    return w_(std::sqrt(2.0 * std::max(t, 0.0) / b_));
  }
  [[nodiscard]] double edge() const {
    return w_.family == TransverseFamily::compact_support
               ? 0.5 * b_ * w_.scale * w_.scale
               : std::numeric_limits<double>::infinity();
  }
  [[nodiscard]] double log_abs(double t) const {
    const double la = std::log(std::abs(w_.amplitude));
    switch (w_.family) {
      case TransverseFamily::gaussian: return la - beta_ * t;
      case TransverseFamily::power_law: return la - 0.5 * w_.alpha * std::log1p(beta_ * t);
      default: return la;
    }
  }
  [[nodiscard]] double dlog(double t) const {
    switch (w_.family) {
      case TransverseFamily::gaussian: return -beta_;
      case TransverseFamily::power_law: return -0.5 * w_.alpha * beta_ / (1.0 + beta_ * t);
      default: return 0.0;
    }
  }
  [[nodiscard]] const TransversePotential& potential() const { return w_; }
  [[nodiscard]] double b() const { return b_; }

 private:
  TransversePotential w_;
  double b_;
  double beta_ = 1.0;
};

/// Radial quantum number of the symmetric-gauge state (level j, momentum m).
inline int radial_index(int j, int m) { return j + std::min(m, 0); }

/// Normalized generalized Laguerre functions l_n^a(t) for n = 0..nmax, where
/// l_n^a = sqrt(n! a! / (n + a)!) L_n^a.
inline void normalized_laguerre(int nmax, int a, double t, std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(nmax) + 1, 0.0);
  double lm1 = 0.0;
  double l = 1.0;
  out[0] = 1.0;
  for (int k = 0; k < nmax; ++k) {
    const double next = k == 0 ? 1.0 + a - t
                               : ((2.0 * k + 1.0 + a - t) * l - (k + a) * lm1) / (k + 1.0);
    lm1 = l;
    l = next;
    out[k + 1] = l;
  }
  for (int n = 1; n <= nmax; ++n)
    out[n] *= std::exp(0.5 * (std::lgamma(n + 1.0) + std::lgamma(a + 1.0) -
                              std::lgamma(n + a + 1.0)));
}

/// Window [lo, hi] of t outside which t^a e^-t |W(t)| / a! is below
/// exp(-drop) of its peak.
inline std::pair<double, double> integration_window(const RadialProfile& w, int a,
                                                    double drop = 70.0) {
  const double la = std::lgamma(a + 1.0);
  auto e = [&](double t) {
    if (t <= 0.0) return a == 0 ? -la + w.log_abs(0.0) : -std::numeric_limits<double>::infinity();
    return a * std::log(t) - t - la + w.log_abs(t);
  };
  const double edge = w.edge();
  // Peak of the envelope by Newton on its derivative.
  double tp = 0.0;
  if (a > 0) {
    tp = std::min(static_cast<double>(a), 0.999 * edge);
    for (int it = 0; it < 100; ++it) {
      const double d1 = a / tp - 1.0 + w.dlog(tp);
      const double h = 1e-6 * std::max(tp, 1.0);
      const double d2 = (-a / (tp * tp)) + (w.dlog(tp + h) - w.dlog(tp - h)) / (2 * h);
      double next = d2 < 0.0 ? tp - d1 / d2 : tp * (d1 > 0 ? 2.0 : 0.5);
      next = std::clamp(next, 0.1 * tp, std::min(10.0 * tp + 1.0, edge));
      if (std::abs(next - tp) < 1e-12 * std::max(tp, 1.0)) {
        tp = next;
        break;
      }
      tp = next;
    }
  }
  const double emax = e(tp);
  const double target = emax - drop;
  const double sigma = std::sqrt(a + 1.0);
  double hi = tp + sigma;
  while (hi < edge && e(hi) > target) hi = tp + 2.0 * (hi - tp);
  hi = std::min(hi, edge);
  double lo = 0.0;
  if (a > 0) {
    double step = sigma;
    lo = std::max(0.0, tp - step);
    while (lo > 0.0 && e(lo) > target) {
      step *= 2.0;
      lo = std::max(0.0, tp - step);
    }
  }
  return {lo, hi};
}

/// Matrix of normalized radial products int Gamma_a W l_n l_n' dt for the
/// levels jmin..J of angular momentum m, jmin = max(0, -m).
inline Eigen::MatrixXd level_coupling_matrix(const RadialProfile& w, int m, int J) {
  const int jmin = std::max(0, -m);
  if (J < jmin) return Eigen::MatrixXd(0, 0);
  const int nl = J - jmin + 1;
  const int a = std::abs(m);
  const int nmax = radial_index(J, m);
  const auto [lo, hi] = integration_window(w, a);
  const double lg = std::lgamma(a + 1.0);
  std::vector<double> lag;
  const std::size_t dim = static_cast<std::size_t>(nl * (nl + 1) / 2);
  auto f = [&](double t, std::vector<double>& out) {
    const double g = t > 0.0 ? std::exp(a * std::log(t) - t - lg)
                             : (a == 0 ? std::exp(-lg) : 0.0);
    const double wg = g * w.value(t);
    normalized_laguerre(nmax, a, t, lag);
    std::size_t k = 0;
    for (int i = 0; i < nl; ++i)
      for (int j = i; j < nl; ++j)
        out[k++] = wg * lag[radial_index(jmin + i, m)] * lag[radial_index(jmin + j, m)];
  };
  const auto v = composite_gauss_vec(f, dim, lo, hi);
  Eigen::MatrixXd out(nl, nl);
  std::size_t k = 0;
  for (int i = 0; i < nl; ++i)
    for (int j = i; j < nl; ++j) {
      out(i, j) = v[k];
      out(j, i) = v[k];
      ++k;
    }
  return out;
}

/// mu_{q,m} = <phi_{q,m}, W phi_{q,m}>.
inline double toeplitz_entry(const RadialProfile& w, int q, int m) {
  if (m < -q) throw ConfigError("angular momentum below -q");
  const int a = std::abs(m);
  const int n = radial_index(q, m);
  const auto [lo, hi] = integration_window(w, a);
  const double lg = std::lgamma(a + 1.0);
  std::vector<double> lag;
  auto f = [&](double t, std::vector<double>& out) {
    const double g = t > 0.0 ? std::exp(a * std::log(t) - t - lg)
                             : (a == 0 ? std::exp(-lg) : 0.0);
    normalized_laguerre(n, a, t, lag);
    out[0] = g * w.value(t) * lag[n] * lag[n];
  };
  return composite_gauss_vec(f, 1, lo, hi)[0];
}

struct TailEstimate {
  double mu_last = 0.0;  // |mu| at the cutoff M
  std::string law;       // "geometric" or "power"
  double rate = 0.0;     // ratio (geometric) or exponent (power), last window
  double rate_alt = 0.0; // same law fitted on the preceding window
};

struct ToeplitzSpectrum {
  int q = 0;
  int m_min = 0;               // -q
  std::vector<double> by_m;    // mu for m = m_min, m_min + 1, ...
  std::vector<double> mu;      // sorted descending
  std::vector<int> m_of;       // rank -> angular momentum
  TailEstimate tail;

  [[nodiscard]] int m_max() const { return m_min + static_cast<int>(by_m.size()) - 1; }
  [[nodiscard]] double at(int m) const { return by_m.at(static_cast<std::size_t>(m - m_min)); }
};

/// Decay law of mu_{q,m} near the cutoff, fitted on two consecutive windows
/// of ten entries.
inline TailEstimate estimate_tail(const std::vector<double>& by_m, int m_min) {
  TailEstimate t;
  const std::size_t n = by_m.size();
  t.mu_last = std::abs(by_m.back());
  const std::size_t w = std::min<std::size_t>(10, n > 1 ? (n - 1) / 2 : 0);
  if (w < 2) {
    t.law = "geometric";
    t.rate = 1.0;
    t.rate_alt = 1.0;
    return t;
  }
  const double wd = static_cast<double>(w);
  auto ratio = [&](std::size_t i) { return std::pow(by_m[i] / by_m[i - w], 1.0 / wd); };
  auto exponent = [&](std::size_t i) {
    const double m1 = m_min + static_cast<double>(i) + 1.0;
    return std::log(by_m[i - w] / by_m[i]) / std::log(m1 / (m1 - wd));
  };
  const double r1 = ratio(n - 1);
  const double r2 = ratio(n - 1 - w);
  if (std::abs(r1 - r2) < 1e-3 * r1 && r1 < 0.999) {
    t.law = "geometric";
    t.rate = r1;
    t.rate_alt = r2;
  } else {
    t.law = "power";
    t.rate = exponent(n - 1);
    t.rate_alt = exponent(n - 1 - w);
  }
  return t;
}

/// Toeplitz eigenvalues for m = -q..M.
inline ToeplitzSpectrum toeplitz_eigenvalues(int q, const TransversePotential& w, double b,
                                             int M) {
  if (q < 0) throw ConfigError("Landau level must be non-negative");
  const RadialProfile rp(w, b);
  ToeplitzSpectrum s;
  s.q = q;
  s.m_min = -q;
  for (int m = -q; m <= M; ++m) s.by_m.push_back(toeplitz_entry(rp, q, m));
  s.tail = estimate_tail(s.by_m, s.m_min);
  s.m_of.resize(s.by_m.size());
  std::iota(s.m_of.begin(), s.m_of.end(), s.m_min);
  std::stable_sort(s.m_of.begin(), s.m_of.end(),
                   [&](int a, int c) { return s.at(a) > s.at(c); });
  for (int m : s.m_of) s.mu.push_back(s.at(m));
  return s;
}

/// Angular-momentum cutoff chosen so that the largest discarded mu is below
/// 1e-2 * r_min and the sequence has been decreasing over the last 8 entries.
inline ToeplitzSpectrum toeplitz_adaptive(int q, const TransversePotential& w, double b,
                                          double r_min, int m_cap = 10000000) {
  if (!(r_min > 0.0)) throw ConfigError("r_min must be positive");
  const RadialProfile rp(w, b);
  ToeplitzSpectrum s;
  s.q = q;
  s.m_min = -q;
  int decreasing = 0;
  for (int m = -q;; ++m) {
    if (m > m_cap)
      throw NumericalError("angular-momentum cutoff exceeded " + std::to_string(m_cap));
    const double v = toeplitz_entry(rp, q, m);
    if (!s.by_m.empty() && v < s.by_m.back()) ++decreasing;
    else decreasing = 0;
    s.by_m.push_back(v);
    if (v < 1e-2 * r_min && decreasing >= 8) break;
  }
  s.tail = estimate_tail(s.by_m, s.m_min);
  s.m_of.resize(s.by_m.size());
  std::iota(s.m_of.begin(), s.m_of.end(), s.m_min);
  std::stable_sort(s.m_of.begin(), s.m_of.end(),
                   [&](int a, int c) { return s.at(a) > s.at(c); });
  for (int m : s.m_of) s.mu.push_back(s.at(m));
  return s;
}

struct CountResult {
  int count = 0;
  bool near_crossing = false;
};

/// n_+(r) = #{m : mu_{q,m} > r}.
inline CountResult counting_function(double r, const ToeplitzSpectrum& s, double nu = 1.0) {
  if (!(r > 0.0)) throw ConfigError("counting threshold r must be positive");
  CountResult c;
  for (double v : s.mu) {
    const double x = nu * v;
    if (x > r) ++c.count;
    if (std::abs(x - r) <= 1e-12 * r) c.near_crossing = true;
  }
  return c;
}

struct NtildeResult {
  double value = 0.0;       // truncated sum plus extrapolated tail
  double truncated = 0.0;   // sum over the computed spectrum only
  double tail = 0.0;        // extrapolated tail contribution
  double tail_bound = 0.0;  // uncertainty of the tail extrapolation
};

/// ntilde_p(r) = sum over mu <= r of (mu / r)^p, p in {1, 2}.
inline NtildeResult ntilde_p(double r, const ToeplitzSpectrum& s, int p, double nu = 1.0) {
  if (p != 1 && p != 2) throw ConfigError("ntilde_p requires p = 1 or 2");
  if (!(r > 0.0)) throw ConfigError("ntilde_p threshold r must be positive");
  NtildeResult res;
  for (double v : s.mu) {
    const double x = nu * v;
    if (x <= r) res.truncated += std::pow(x / r, p);
  }
  const double last = std::pow(nu * s.tail.mu_last / r, p);
  const double m1 = s.m_max() + 1.0;
  auto tail_for = [&](double rate) {
    if (s.tail.law == "geometric") {
      const double g = std::pow(rate, p);
      return g < 1.0 ? last * g / (1.0 - g) : std::numeric_limits<double>::infinity();
    }
    // sum_{m > M} last * ((M + 1) / (m + 1))^e, midpoint integral from M + 3/2.
    const double e = p * rate;
    if (e <= 1.0) return std::numeric_limits<double>::infinity();
    return last * std::pow(m1, e) * std::pow(m1 + 0.5, 1.0 - e) / (e - 1.0);
  };
  res.tail = tail_for(s.tail.rate);
  res.tail_bound = std::abs(res.tail - tail_for(s.tail.rate_alt));
  if (!std::isfinite(res.tail)) res.tail_bound = res.tail;
  res.value = res.truncated + res.tail;
  if (!(res.tail_bound <= 1e-6 * std::max(1.0, res.truncated)))
    throw NumericalError("ntilde tail bound " + std::to_string(res.tail_bound) +
                         " exceeds 1e-6: increase the angular-momentum cutoff M");
  return res;
}

enum class AsymptoticLaw { power_law, gaussian, compact_support };

struct FitReport {
  AsymptoticLaw law = AsymptoticLaw::power_law;
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;       // relative RMS misfit of the regression
  double log_slope = 0.0;      // slope of ln n_+ against ln of the law's abscissa
  double envelope_max = 0.0;   // compact support: max of n_+ ln|ln r| / |ln r|
  double envelope_ratio = 0.0; // max / min of that envelope
  int points = 0;
};

inline void least_squares(const std::vector<double>& x, const std::vector<double>& y,
                          double& slope, double& intercept, double& residual) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  slope = sxy / sxx;
  intercept = my - slope * mx;
  double rr = 0.0;
  double yy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (intercept + slope * x[i]);
    rr += e * e;
    yy += y[i] * y[i];
  }
  residual = std::sqrt(rr / yy);
}

/// Regression of the counting function against the law's natural abscissa.
inline FitReport fit_counting_asymptotics(AsymptoticLaw law, const ToeplitzSpectrum& s,
                                          const std::vector<double>& r_grid,
                                          double nu = 1.0) {
  std::vector<double> lr;
  std::vector<double> n;
  for (double r : r_grid) {
    const int c = counting_function(r, s, nu).count;
    if (c >= 1 && r < 1.0 / std::exp(1.0)) {
      lr.push_back(std::abs(std::log(r)));
      n.push_back(c);
    }
  }
  if (lr.size() < 5)
    throw NumericalError("fewer than 5 usable grid points for the asymptotic fit");
  FitReport f;
  f.law = law;
  f.points = static_cast<int>(lr.size());
  std::vector<double> x;
  std::vector<double> y;
  double dummy = 0.0;
  switch (law) {
    case AsymptoticLaw::power_law:
      for (std::size_t i = 0; i < lr.size(); ++i) {
        x.push_back(lr[i]);
        y.push_back(std::log(n[i]));
      }
      least_squares(x, y, f.slope, f.intercept, f.residual);
      f.log_slope = f.slope;
      break;
    case AsymptoticLaw::gaussian:
      least_squares(lr, n, f.slope, f.intercept, f.residual);
      for (std::size_t i = 0; i < lr.size(); ++i) {
        x.push_back(std::log(lr[i]));
        y.push_back(std::log(n[i]));
      }
      least_squares(x, y, f.log_slope, dummy, dummy);
      break;
    case AsymptoticLaw::compact_support: {
      double lo = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < lr.size(); ++i) {
        const double env = n[i] * std::log(lr[i]) / lr[i];
        f.envelope_max = std::max(f.envelope_max, env);
        lo = std::min(lo, env);
        x.push_back(std::log(lr[i] / std::log(lr[i])));
        y.push_back(std::log(n[i]));
      }
      f.envelope_ratio = f.envelope_max / lo;
      least_squares(x, y, f.log_slope, f.intercept, f.residual);
      f.slope = f.log_slope;
      break;
    }
  }
  return f;
}

/// n_+(r, B_q) with B_q = W^1/2 p_q W^1/2 realized per angular momentum on the
/// radial quadrature grid and diagonalized; compared against n_+(r, p_q W p_q).
struct BqRealization {
  std::vector<std::vector<double>> eigenvalues;  // per m, descending
  int m_min = 0;
};

inline BqRealization realize_bq(int q, const TransversePotential& w, double b, int M,
                                int panels = 8) {
  const RadialProfile rp(w, b);
  static const QuadratureRule rule = gauss_legendre(16);
  BqRealization out;
  out.m_min = -q;
  std::vector<double> lag;
  for (int m = -q; m <= M; ++m) {
    const int a = std::abs(m);
    const int n = radial_index(q, m);
    const auto [lo, hi] = integration_window(rp, a);
    const double lg = std::lgamma(a + 1.0);
    const int nodes = panels * 16;
    Eigen::VectorXd u(nodes);
    const double pw = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p)
      for (int i = 0; i < 16; ++i) {
        const double t = lo + pw * (p + 0.5 * (rule.nodes[i] + 1.0));
        const double wt = 0.5 * pw * rule.weights[i];
        const double g = t > 0.0 ? std::exp(a * std::log(t) - t - lg) : (a == 0 ? std::exp(-lg) : 0.0);
        normalized_laguerre(n, a, t, lag);
        // phi_{q,m} sampled with the quadrature weight folded in; W^1/2 applied.
        u(p * 16 + i) = std::sqrt(wt * g * std::max(rp.value(t), 0.0)) * lag[n];
      }
    const Eigen::MatrixXd bm = u * u.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(bm, Eigen::EigenvaluesOnly);
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + nodes);
    std::sort(ev.rbegin(), ev.rend());
    out.eigenvalues.push_back(std::move(ev));
  }
  return out;
}

inline int count_above(const BqRealization& bq, double r) {
  int c = 0;
  for (const auto& ev : bq.eigenvalues)
    for (double v : ev)
      if (v > r) ++c;
  return c;
}

/// Integral of W over the transverse plane in t units: sum_m mu_{0,m}.
inline double transverse_trace(const TransversePotential& w, double b) {
  const RadialProfile rp(w, b);
  const double edge = rp.edge();
  if (std::isfinite(edge))
    return composite_gauss([&](double t) { return rp.value(t); }, 0.0, edge).value;
  // Map [0, inf) to [0, 1) with t = s / (1 - s).
  return composite_gauss(
             [&](double s) {
               if (s >= 1.0) return 0.0;
               const double t = s / (1.0 - s);
               return rp.value(t) / ((1.0 - s) * (1.0 - s));
             },
             0.0, 1.0, 1e-11, 8, 1 << 16)
      .value;
}

}  // namespace magres::landau
