// Copyright 2026 The magres Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "magres/birman_schwinger.hpp"
#include "magres/common.hpp"
#include "magres/landau.hpp"
#include "magres/linalg/sturm.hpp"
#include "magres/parallel.hpp"
#include "magres/resonances.hpp"

namespace magres::ssf {

struct SSFSample {
  double mu = 0.0;
  double xi2_prime = 0.0;
  double xi_prime = 0.0;
  double epsilon_used = 0.0;  // smallest epsilon of the list
  double correction = 0.0;    // (1/pi) Im tr T'(mu)
  double extrapolation_error = 0.0;
  std::vector<double> estimates;  // finite-epsilon values, one per epsilon
};

/// Excluded energies 2bk + lambda and 2bk for the levels of the truncation.
inline std::vector<double> excluded_energies(const bs::Engine& e) {
  std::vector<double> x;
  for (int k = 0; k <= e.truncation().J; ++k) {
    x.push_back(2.0 * e.model().b * k);
    for (const auto& s : e.bound_states()) x.push_back(2.0 * e.model().b * k + s.lambda);
  }
  return x;
}

inline void check_energy(const bs::Engine& e, double mu, double margin) {
  for (double x : excluded_energies(e))
    if (std::abs(mu - x) <= margin)
      throw ConfigError("mu = " + std::to_string(mu) + " within " + std::to_string(margin) +
                        " of the threshold or embedded eigenvalue " + std::to_string(x));
}

inline void check_epsilons(const std::vector<double>& eps) {
  if (eps.size() < 3) throw ConfigError("epsilon list needs at least 3 values");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) throw ConfigError("epsilon values must be positive");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw ConfigError("epsilon list must be decreasing");
  }
}

/// Default epsilon list {1e-2, 5e-3, 2.5e-3}.
inline std::vector<double> default_epsilons() { return {1e-2, 5e-3, 2.5e-3}; }

/// (1/pi) d/dmu arg det_2(I + T(mu + i eps)) = (1/pi) Im d/dz log det_2 at
/// mu + i eps, with the z-derivative carried by dual numbers.
inline double xi2_prime_at(const bs::Engine& e, double mu, double eps) {
  return e.evaluate({mu, eps}).dlog_d2.imag() / kPi;
}

/// xi_2'(mu) from a decreasing epsilon list, Richardson-extrapolated at
/// order 1. Throws when the estimates do not approach the limit
/// monotonically.
inline SSFSample xi2_prime(const bs::Engine& e, double mu, const std::vector<double>& eps) {
  check_epsilons(eps);
  check_energy(e, mu, 10.0 * eps.front());
  SSFSample s;
  s.mu = mu;
  s.epsilon_used = eps.back();
  for (double x : eps) s.estimates.push_back(xi2_prime_at(e, mu, x));
  const std::size_t n = eps.size();
  auto richardson = [&](std::size_t i) {
    return (eps[i] * s.estimates[i + 1] - eps[i + 1] * s.estimates[i]) / (eps[i] - eps[i + 1]);
  };
  const double x = richardson(n - 2);
  s.xi2_prime = x;
  s.extrapolation_error = std::abs(x - richardson(n - 3));
  double scale = 0.0;
  for (double v : s.estimates) scale = std::max(scale, std::abs(v));
  const double floor = 1e-9 * (1.0 + scale);
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(s.estimates[i] - x) > std::abs(s.estimates[i - 1] - x) + floor) {
      std::string msg = "non-monotone epsilon extrapolation at mu = " + std::to_string(mu) + ":";
      for (std::size_t k = 0; k < n; ++k)
        msg += " eps=" + std::to_string(eps[k]) + " -> " + std::to_string(s.estimates[k]);
      throw NumericalError(msg);
    }
  }
  return s;
}

/// xi'(mu) = xi_2'(mu) + (1/pi) Im tr T'(mu).
inline SSFSample xi_prime(const bs::Engine& e, double mu, const std::vector<double>& eps) {
  if (!(e.profile().theta().imag() > 0.0))
    throw ConfigError("xi' requires Im theta > 0");
  auto s = xi2_prime(e, mu, eps);
  s.correction = e.evaluate({mu, 0.0}).tr_t_prime.imag() / kPi;
  s.xi_prime = s.xi2_prime + s.correction;
  return s;
}

/// (1/pi) times the change of arg det(I + T) along mu + i eps, mu in [a, b].
/// Tends to the integral of xi' over [a, b] as eps -> 0.
inline double integrate_xi_prime(const bs::Engine& e, double a, double b, double eps,
                                 int points = 64) {
  if (!(b > a)) throw ConfigError("integration interval must satisfy a < b");
  for (int n = points;; n *= 2) {
    if (n > (1 << 16))
      throw NumericalError("phase of det(I + T) not resolved on the integration path");
    std::vector<double> ph(static_cast<std::size_t>(n) + 1);
    parallel_for(n + 1, e.workers(), [&](int i) {
      ph[i] = e.evaluate({a + (b - a) * i / n, eps}).log_det_i_plus_t.imag();
    });
    double total = 0.0;
    double step = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = wrap_angle(ph[i + 1] - ph[i]);
      step = std::max(step, std::abs(d));
      total += d;
    }
    if (step < 0.25 * kPi) return total / kPi;
  }
}

/// Scaled window geometry: Omega = disc(mid, outer), Omega~ = disc(mid, inner),
/// I = Omega~ on the real axis.
struct Window {
  double mid = 1.5;
  double outer = 1.2;
  double inner = 0.75;

  [[nodiscard]] double lo() const { return mid - inner; }
  [[nodiscard]] double hi() const { return mid + inner; }
  [[nodiscard]] bool in_outer(Complex t) const { return std::abs(t - mid) < outer; }
  [[nodiscard]] bool in_inner(Complex t) const { return std::abs(t - mid) < inner; }

  /// Quintic smoothstep cutoff, 1 on I and 0 off Omega.
  [[nodiscard]] double cutoff(double t) const {
    const double w = outer - inner;
    const double d = std::abs(t - mid);
    if (d <= inner) return 1.0;
    if (d >= outer) return 0.0;
    return axis::DistortionProfile::step((outer - d) / w);
  }
};

/// Lorentzian -Im w / (pi |mu - w|^2).
inline double lorentzian(double mu, Complex w) {
  return -w.imag() / (kPi * std::norm(mu - w));
}

struct BWSample {
  double mu = 0.0;
  double xi2_prime = 0.0;
  double xi_prime = 0.0;
  double lorentzian = 0.0;
  double background = 0.0;
  double residual = 0.0;  // xi' - (background - lorentzian)
};

struct PeakCheck {
  Complex w{};
  double expected = 0.0;          // 1 / (pi |Im w|)
  double lorentzian_height = 0.0; // Lorentzian sum at Re w
  double sampled_height = 0.0;    // background(Re w) - xi'(Re w)
  double relative_error = 0.0;    // |sampled / expected - 1|
};

struct BWDecomposition {
  int q = 0;
  double r = 0.0;
  double center = 0.0;  // 2bq + lambda
  Window window;
  std::vector<double> epsilons;
  std::vector<Complex> resonances;        // complex resonances in c + r Omega
  std::vector<double> delta_locations;    // real resonances in c + r I
  std::vector<double> background;         // coefficients in t = (mu - c) / r
  std::vector<BWSample> samples;
  std::vector<PeakCheck> peaks;
  double residual = 0.0;             // relative L2 misfit
  double direct_fit_residual = 0.0;  // relative L2 misfit of a plain polynomial fit
  double xi_norm = 0.0;
};

struct BWOptions {
  Window window;
  int degree = 3;
  int uniform_points = 64;
  int cluster_points = 25;
  double real_tolerance = 1e-8;  // |Im w| below this is a real resonance
  std::vector<double> epsilons;  // empty: {4, 2, 1} * min |Im w| / 100
};

namespace detail {

inline std::vector<double> trapezoid_weights(const std::vector<double>& x) {
  std::vector<double> w(x.size(), 0.0);
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double h = 0.5 * (x[i + 1] - x[i]);
    w[i] += h;
    w[i + 1] += h;
  }
  return w;
}

/// Weighted least-squares polynomial fit; returns coefficients c_0..c_deg.
inline std::vector<double> fit_polynomial(const std::vector<double>& t, const std::vector<double>& y,
                                          const std::vector<double>& w, int degree) {
  const int n = static_cast<int>(t.size());
  if (n <= degree) throw NumericalError("too few samples for the background fit");
  Eigen::MatrixXd a(n, degree + 1);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) {
    const double s = std::sqrt(w[i]);
    double p = 1.0;
    for (int k = 0; k <= degree; ++k) {
      a(i, k) = s * p;
      p *= t[i];
    }
    rhs(i) = s * y[i];
  }
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(rhs);
  return {c.data(), c.data() + c.size()};
}

inline double polyval(const std::vector<double>& c, double t) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * t + *it;
  return v;
}

}  // namespace detail

/// Samples xi' on c + r I, subtracts the Breit-Wigner sum over the complex
/// resonances of c + r Omega and fits the remainder by a polynomial in
/// t = (mu - c) / r. Points near real resonances are masked.
inline BWDecomposition breit_wigner_reconstruct(const bs::Engine& e, int q, double r,
                                                const res::ResonanceSet& set,
                                                const BWOptions& opt = {}) {
  if (!(r > 0.0)) throw ConfigError("window scale r must be positive");
  if (opt.degree < 0) throw ConfigError("background degree must be non-negative");
  if (e.bound_states().empty()) throw ConfigError("no embedded eigenvalue: v0 has no bound state");
  BWDecomposition d;
  d.q = q;
  d.r = r;
  d.window = opt.window;
  const Window& win = opt.window;
  d.center = 2.0 * e.model().b * q + e.bound_states().front().lambda;
  const double c = d.center;
  const auto& reg = set.region;
  if (reg.shape != res::RegionShape::disc ||
      std::abs(c + r * win.mid - reg.center) + r * win.outer > reg.r)
    throw ConfigError("resonance set does not cover the window c + r Omega");

  double min_width = std::numeric_limits<double>::infinity();
  for (const auto& x : set.items) {
    const Complex t = (x.z - c) / r;
    if (!win.in_outer(t)) continue;
    if (std::abs(x.z.imag()) <= opt.real_tolerance) {
      if (t.real() >= win.lo() && t.real() <= win.hi())
        for (int k = 0; k < x.multiplicity; ++k) d.delta_locations.push_back(x.z.real());
      continue;
    }
    for (int k = 0; k < x.multiplicity; ++k) d.resonances.push_back(x.z);
    min_width = std::min(min_width, std::abs(x.z.imag()));
  }
  d.epsilons = opt.epsilons;
  if (d.epsilons.empty()) {
    d.epsilons = std::isfinite(min_width)
                     ? std::vector<double>{4e-2 * min_width, 2e-2 * min_width, 1e-2 * min_width}
                     : std::vector<double>{1e-2 * r, 5e-3 * r, 2.5e-3 * r};
  }
  check_epsilons(d.epsilons);
  const double eps_min = d.epsilons.back();
  const double eps_max = d.epsilons.front();

  // Uniform points plus tan-mapped clusters at each complex resonance.
  const double a = c + r * win.lo();
  const double b = c + r * win.hi();
  std::vector<double> mu;
  for (int i = 0; i < opt.uniform_points; ++i)
    mu.push_back(a + (b - a) * i / (opt.uniform_points - 1));
  for (const auto& w : d.resonances) {
    if (w.real() < a || w.real() > b) continue;
    for (int k = 0; k < opt.cluster_points; ++k) {
      const double u = (k + 0.5) / opt.cluster_points;
      const double x = w.real() + std::abs(w.imag()) * std::tan(kPi * (u - 0.5) * 0.98);
      if (x > a && x < b) mu.push_back(x);
    }
  }
  std::sort(mu.begin(), mu.end());
  std::vector<double> grid;
  for (double x : mu) {
    bool masked = false;
    for (double y : d.delta_locations)
      if (std::abs(x - y) < 100.0 * eps_max) masked = true;
    for (double y : excluded_energies(e))
      if (std::abs(x - y) <= 10.0 * eps_max) masked = true;
    if (masked) continue;
    if (!grid.empty() && x - grid.back() < 4.0 * eps_min) {
      // Keep cluster centers exactly on Re w.
      bool center = false;
      for (const auto& w : d.resonances) center = center || x == w.real();
      if (center) grid.back() = x;
      continue;
    }
    grid.push_back(x);
  }

  std::vector<SSFSample> xs(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) xs[i] = xi_prime(e, grid[i], d.epsilons);

  const std::size_t n = grid.size();
  std::vector<double> t(n), rem(n), xi(n), lor(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = (grid[i] - c) / r;
    xi[i] = xs[i].xi_prime;
    lor[i] = 0.0;
    for (const auto& w : d.resonances) lor[i] += lorentzian(grid[i], w);
    rem[i] = xi[i] + lor[i];
  }
  const auto wts = detail::trapezoid_weights(grid);
  d.background = detail::fit_polynomial(t, rem, wts, opt.degree);
  const auto direct = detail::fit_polynomial(t, xi, wts, opt.degree);
  double norm = 0.0;
  double mis = 0.0;
  double mis_direct = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    BWSample s;
    s.mu = grid[i];
    s.xi2_prime = xs[i].xi2_prime;
    s.xi_prime = xi[i];
    s.lorentzian = lor[i];
    s.background = detail::polyval(d.background, t[i]);
    s.residual = xi[i] - (s.background - lor[i]);
    norm += wts[i] * xi[i] * xi[i];
    mis += wts[i] * s.residual * s.residual;
    const double rd = xi[i] - detail::polyval(direct, t[i]);
    mis_direct += wts[i] * rd * rd;
    d.samples.push_back(s);
  }
  d.xi_norm = std::sqrt(norm);
  d.residual = norm > 0.0 ? std::sqrt(mis / norm) : std::sqrt(mis);
  d.direct_fit_residual = norm > 0.0 ? std::sqrt(mis_direct / norm) : std::sqrt(mis_direct);

  for (const auto& w : d.resonances) {
    if (w.real() < a || w.real() > b) continue;
    PeakCheck p;
    p.w = w;
    p.expected = 1.0 / (kPi * std::abs(w.imag()));
    for (const auto& v : d.resonances) p.lorentzian_height += lorentzian(w.real(), v);
    const auto it = std::find_if(d.samples.begin(), d.samples.end(),
                                 [&](const BWSample& s) { return s.mu == w.real(); });
    if (it == d.samples.end()) continue;
    p.sampled_height = it->background - it->xi_prime;
    p.relative_error = std::abs(p.sampled_height / p.expected - 1.0);
    d.peaks.push_back(p);
  }
  return d;
}

/// Test function f on the scaled window.
struct TestFunction {
  std::string name;
  std::function<Complex(Complex)> f;
};

inline TestFunction polynomial(const std::vector<double>& coeffs) {
  if (coeffs.empty() || coeffs.size() > 5)
    throw ConfigError("polynomial test functions have degree 0..4");
  std::ostringstream name;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (coeffs[k] == 0.0) continue;
    if (name.tellp() > 0) name << (coeffs[k] < 0.0 ? "-" : "+");
    else if (coeffs[k] < 0.0) name << "-";
    const double a = std::abs(coeffs[k]);
    if (a != 1.0 || k == 0) name << a;
    if (k >= 1) name << "t";
    if (k >= 2) name << "^" << k;
  }
  if (name.tellp() == 0) name << "0";
  return {name.str(), [coeffs](Complex t) {
            Complex v{};
            for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * t + *it;
            return v;
          }};
}

/// f(t) = 1 / (t - pole), pole outside Omega.
inline TestFunction rational(Complex pole, const Window& win = {}) {
  if (std::abs(pole - win.mid) <= win.outer)
    throw ConfigError("rational test function must have its pole outside Omega");
  return {"rational", [pole](Complex t) { return 1.0 / (t - pole); }};
}

/// sup |f| over Omega \ Omega~ with Im t <= 0, sampled on a polar grid.
inline double sup_on_shell(const TestFunction& f, const Window& win = {}) {
  double s = 0.0;
  constexpr int kRadial = 16;
  constexpr int kAngular = 128;
  for (int i = 0; i <= kRadial; ++i) {
    const double rho = win.inner + (win.outer - win.inner) * i / kRadial;
    for (int k = 0; k <= kAngular; ++k) {
      const double a = kPi + kPi * k / kAngular;
      s = std::max(s, std::abs(f.f(win.mid + rho * Complex{std::cos(a), std::sin(a)})));
    }
  }
  return s;
}

/// Box-length average for self-adjoint traces: lengths L0 + span (k + 1/2) / count
/// with Hann weights, grid spacing h.
struct BoxAverage {
  double L0 = 100.0;
  double span = 24.0;
  int count = 48;
  double h = 0.13;
};

struct BoxSpectrum {
  double L = 0.0;
  double weight = 0.0;
  std::vector<double> perturbed;
  std::vector<std::pair<double, int>> unperturbed;  // eigenvalue, multiplicity
};

/// Eigenvalues in [lo, hi) of the theta = 0 truncated H and H0 on a family
/// of boxes.
struct WindowSpectrum {
  double lo = 0.0;
  double hi = 0.0;
  BoxAverage box;
  std::vector<BoxSpectrum> boxes;
};

inline WindowSpectrum window_spectrum(const bs::ModelSpec& model, bs::Truncation trunc, double lo,
                                      double hi, const BoxAverage& box, int workers = 1) {
  if (!(hi > lo)) throw ConfigError("spectral window must satisfy lo < hi");
  if (box.count < 1 || !(box.L0 > 0.0) || !(box.h > 0.0))
    throw ConfigError("box average needs count >= 1, L0 > 0 and h > 0");
  WindowSpectrum ws;
  ws.lo = lo;
  ws.hi = hi;
  ws.box = box;
  ws.boxes.resize(static_cast<std::size_t>(box.count));
  const auto profile = axis::build_distortion(1.0, 2.0, 0.0);
  parallel_for(box.count, workers, [&](int k) {
    auto& out = ws.boxes[k];
    out.L = box.L0 + box.span * (k + 0.5) / box.count;
    const double s = std::sin(kPi * (k + 0.5) / box.count);
    out.weight = s * s;
    const int n = static_cast<int>(std::lround(2.0 * out.L / box.h));
    const bs::Engine e(model, profile, axis::make_grid(out.L, n), trunc);
    for (std::size_t i = 0; i < e.sectors().size(); ++i) {
      const auto band = linalg::SymmetricBand::from(e.sector_matrix(static_cast<int>(i)),
                                                    2 * e.sectors()[i].nl);
      const auto v = band.eigenvalues_in(lo, hi);
      out.perturbed.insert(out.perturbed.end(), v.begin(), v.end());
    }
    const auto h = linalg::SymmetricBand::from(e.axis_matrix(), 2);
    for (int j = 0; j <= trunc.J; ++j) {
      const double shift = 2.0 * model.b * j;
      const int mult = trunc.M + j + 1;
      for (double x : h.eigenvalues_in(lo - shift, hi - shift)) out.unperturbed.push_back({x + shift, mult});
    }
    std::sort(out.perturbed.begin(), out.perturbed.end());
  });
  return ws;
}

/// Box-averaged tr((phi f)((H - c) / r) - (phi f)((H0 - c) / r)).
inline Complex trace_lhs(const WindowSpectrum& ws, double c, double r, const TestFunction& f,
                         const Window& win = {}) {
  if (c + r * (win.mid - win.outer) < ws.lo || c + r * (win.mid + win.outer) > ws.hi)
    throw ConfigError("spectral window does not cover c + r Omega");
  auto g = [&](double x) {
    const double t = (x - c) / r;
    const double p = win.cutoff(t);
    return p == 0.0 ? Complex{} : p * f.f(t);
  };
  Complex total{};
  double wsum = 0.0;
  for (const auto& b : ws.boxes) {
    Complex v{};
    for (double x : b.perturbed) v += g(x);
    for (const auto& [x, m] : b.unperturbed) v -= static_cast<double>(m) * g(x);
    total += b.weight * v;
    wsum += b.weight;
  }
  return total / wsum;
}

struct TraceFormulaResult {
  double r = 0.0;
  std::string function;
  Complex lhs{};
  Complex rhs{};
  double error = 0.0;
  double sup_f = 0.0;
  double n_q = 0.0;
  double bound_ratio = 0.0;
  double refinement_change = 0.0;  // in units of sup |phi f| on the real axis
  int resonances_inside = 0;
};

/// N_q(r) = n_+(r, nu W) |ln r| + ntilde_1(r / nu) + ntilde_2(r / nu).
inline double n_q(double r, const landau::ToeplitzSpectrum& env, double nu = 1.0) {
  const auto np = landau::counting_function(r, env, nu).count;
  return np * std::abs(std::log(r)) + landau::ntilde_p(r, env, 1, nu).value +
         landau::ntilde_p(r, env, 2, nu).value;
}

/// Compares the box-averaged trace with the resonance sum over c + r Omega~.
/// `refined` is the same window on longer boxes; a change above 1% of
/// max(|lhs|, sup |phi f|) is a convergence failure.
inline TraceFormulaResult trace_formula_check(const WindowSpectrum& base,
                                              const WindowSpectrum& refined, double c, double r,
                                              const TestFunction& f, const res::ResonanceSet& set,
                                              const landau::ToeplitzSpectrum& env, double nu = 1.0,
                                              const Window& win = {}) {
  const auto& reg = set.region;
  if (reg.shape != res::RegionShape::disc ||
      std::abs(c + r * win.mid - reg.center) + r * win.inner > reg.r)
    throw ConfigError("resonance set does not cover c + r Omega~");
  TraceFormulaResult out;
  out.r = r;
  out.function = f.name;
  out.lhs = trace_lhs(base, c, r, f, win);
  const Complex lhs_ref = trace_lhs(refined, c, r, f, win);
  double sup_real = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const double t = win.mid - win.outer + 2.0 * win.outer * i / 400;
    sup_real = std::max(sup_real, win.cutoff(t) * std::abs(f.f(t)));
  }
  out.refinement_change = std::abs(out.lhs - lhs_ref) / std::max(std::abs(out.lhs), sup_real);
  if (out.refinement_change > 0.01)
    throw NumericalError("trace changes by " + std::to_string(100.0 * out.refinement_change) +
                         "% on box refinement: increase the box length");
  for (const auto& x : set.items) {
    const Complex t = (x.z - c) / r;
    if (!win.in_inner(t)) continue;
    out.rhs += static_cast<double>(x.multiplicity) * f.f(t);
    out.resonances_inside += x.multiplicity;
  }
  out.error = std::abs(out.lhs - out.rhs);
  out.sup_f = sup_on_shell(f, win);
  out.n_q = n_q(r, env, nu);
  const double denom = out.sup_f * out.n_q;
  out.bound_ratio = denom > 0.0 ? out.error / denom : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace magres::ssf
