// Copyright 2026 The magres Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "magres/birman_schwinger.hpp"
#include "magres/common.hpp"
#include "magres/landau.hpp"
#include "magres/linalg/arnoldi.hpp"
#include "magres/linalg/lapack.hpp"
#include "magres/parallel.hpp"
#include "magres/quadrature.hpp"

namespace magres::res {

enum class RegionShape { disc, annulus, box };

/// Search region: disc |z - c| < r, annulus r < |z - c| < r_outer, or the box
/// [lo.re, hi.re] x [lo.im, hi.im].
struct SearchRegion {
  RegionShape shape = RegionShape::disc;
  Complex center{};
  double r = 0.0;
  double r_outer = 0.0;
  Complex lo{};
  Complex hi{};
  int q = 0;

  static SearchRegion disc(Complex c, double radius, int level = 0) {
    SearchRegion s;
    s.shape = RegionShape::disc;
    s.center = c;
    s.r = radius;
    s.q = level;
    return s;
  }
  static SearchRegion annulus(Complex c, double inner, int level = 0) {
    SearchRegion s;
    s.shape = RegionShape::annulus;
    s.center = c;
    s.r = inner;
    s.r_outer = 2.0 * inner;
    s.q = level;
    return s;
  }
  static SearchRegion box(Complex lo, Complex hi, int level = 0) {
    SearchRegion s;
    s.shape = RegionShape::box;
    s.lo = lo;
    s.hi = hi;
    s.center = 0.5 * (lo + hi);
    s.q = level;
    return s;
  }

  [[nodiscard]] bool contains(Complex z) const {
    switch (shape) {
      case RegionShape::disc: return std::abs(z - center) < r;
      case RegionShape::annulus: {
        const double d = std::abs(z - center);
        return d > r && d < r_outer;
      }
      case RegionShape::box:
        return z.real() > lo.real() && z.real() < hi.real() && z.imag() > lo.imag() &&
               z.imag() < hi.imag();
    }
    return false;
  }

  /// Radius of a disc about `center` that covers the region.
  [[nodiscard]] double outer_radius() const {
    switch (shape) {
      case RegionShape::disc: return r;
      case RegionShape::annulus: return r_outer;
      case RegionShape::box: return 0.5 * std::abs(hi - lo);
    }
    return 0.0;
  }
};

/// Minimum distance from the region boundary to the rays of the engine;
/// negative when a ray crosses the region.
inline double ray_margin(const bs::Engine& e, const SearchRegion& region) {
  const Complex dir = e.profile().ray_direction();
  double m = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= e.truncation().J; ++j) {
    const Complex foot = 2.0 * e.model().b * j;
    if (region.shape == RegionShape::box) {
      // Sample the ray against the box: distance of the box to the half-line.
      const Complex u = dir / std::abs(dir);
      double best = std::numeric_limits<double>::infinity();
      const double reach = std::abs(region.hi - foot) + std::abs(region.lo - foot);
      constexpr int kSamples = 4000;
      for (int k = 0; k <= kSamples; ++k) {
        const Complex p = foot + u * (reach * k / kSamples);
        const double dx = std::max({region.lo.real() - p.real(), 0.0, p.real() - region.hi.real()});
        const double dy = std::max({region.lo.imag() - p.imag(), 0.0, p.imag() - region.hi.imag()});
        const double d = std::hypot(dx, dy);
        best = std::min(best, region.contains(p) ? -1.0 : d);
      }
      m = std::min(m, best);
      continue;
    }
    m = std::min(m, distance_to_ray(region.center, foot, dir) - region.outer_radius());
  }
  return m;
}

/// Poles of the sector determinant quotient that lie inside the region.
inline std::vector<Complex> poles_inside(const bs::Engine& e, int idx, const SearchRegion& region) {
  std::vector<Complex> out;
  for (const auto& p : e.sector_poles(idx))
    if (region.contains(p)) out.push_back(p);
  return out;
}

/// d/dz log F_m with F_m = det(A_m - z) / det(A0_m - z) * prod (z - p) over
/// the given poles; its zeros in the region are the sector's resonances.
inline Complex deflated_log_derivative(const bs::SectorEval& s, Complex z,
                                       const std::vector<Complex>& poles) {
  Complex g = s.dlog_det_a - s.dlog_det_a0;
  for (const auto& p : poles) g += 1.0 / (z - p);
  return g;
}

/// Closed contour given by nodes and quadrature weights for int f dz.
struct Contour {
  std::vector<Complex> nodes;
  std::vector<Complex> weights;  // dz weights
};

inline Contour circle_contour(Complex c, double r, int n) {
  Contour k;
  for (int i = 0; i < n; ++i) {
    const Complex u = std::exp(kI * (2.0 * kPi * (i + 0.5) / n));
    k.nodes.push_back(c + r * u);
    k.weights.push_back(kI * r * u * (2.0 * kPi / n));
  }
  return k;
}

/// Counter-clockwise box boundary, Gauss-Legendre with n nodes per edge.
inline Contour box_contour(Complex lo, Complex hi, int n) {
  Contour k;
  const Complex corners[4] = {lo, {hi.real(), lo.imag()}, hi, {lo.real(), hi.imag()}};
  const auto gl = gauss_legendre(n);
  for (int e = 0; e < 4; ++e) {
    const Complex a = corners[e];
    const Complex b = corners[(e + 1) % 4];
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      k.nodes.push_back(0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[i]);
      k.weights.push_back(0.5 * (b - a) * gl.weights[i]);
    }
  }
  return k;
}

/// Per-sector winding numbers of F_m on a contour.
struct ContourCount {
  std::vector<int> by_sector;
  std::vector<double> raw;       // unrounded estimates
  std::vector<std::vector<Complex>> moments;  // sum of ((z - c) / s)^k, k = 0..kmax
  int total = 0;
  int winding_d2 = 0;            // total minus the number of enclosed poles
  double rounding_error = 0.0;
  int points = 0;
  double min_abs_det = 0.0;
};

namespace detail {

inline ContourCount integrate(const bs::Engine& e, const Contour& k,
                              const std::vector<std::vector<Complex>>& poles, Complex c,
                              double scale, int kmax) {
  const int ns = static_cast<int>(e.sectors().size());
  std::vector<bs::Det2Eval> ev(k.nodes.size());
  for (std::size_t i = 0; i < k.nodes.size(); ++i) ev[i] = e.evaluate(k.nodes[i]);
  ContourCount out;
  out.by_sector.assign(static_cast<std::size_t>(ns), 0);
  out.raw.assign(static_cast<std::size_t>(ns), 0.0);
  out.moments.assign(static_cast<std::size_t>(ns), std::vector<Complex>(kmax + 1));
  out.points = static_cast<int>(k.nodes.size());
  out.min_abs_det = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k.nodes.size(); ++i) {
    out.min_abs_det = std::min(out.min_abs_det, std::exp(ev[i].log_det_i_plus_t.real()));
    const Complex u = (k.nodes[i] - c) / scale;
    for (int s = 0; s < ns; ++s) {
      const Complex g =
          deflated_log_derivative(ev[i].sectors[s], k.nodes[i], poles[s]) * k.weights[i] /
          (2.0 * kPi * kI);
      Complex up{1.0};
      for (int p = 0; p <= kmax; ++p) {
        out.moments[s][p] += g * up;
        up *= u;
      }
    }
  }
  for (int s = 0; s < ns; ++s) out.raw[s] = out.moments[s][0].real();
  return out;
}

}  // namespace detail

/// Argument-principle count of resonances per sector on a disc or box
/// boundary: trapezoid/Gauss sampling from `base` points, doubled until the
/// estimate moves by < 0.05; errors when it stays > 0.1 from an integer.
inline ContourCount count_zeros_contour(const bs::Engine& e, const SearchRegion& region,
                                        int kmax = 0, int base = 128, int max_points = 4096) {
  if (region.shape == RegionShape::annulus) {
    auto outer = count_zeros_contour(e, SearchRegion::disc(region.center, region.r_outer, region.q),
                                     0, base, max_points);
    const auto inner =
        count_zeros_contour(e, SearchRegion::disc(region.center, region.r, region.q), 0, base,
                            max_points);
    for (std::size_t s = 0; s < outer.by_sector.size(); ++s) {
      outer.by_sector[s] -= inner.by_sector[s];
      outer.raw[s] -= inner.raw[s];
    }
    outer.total -= inner.total;
    outer.winding_d2 -= inner.winding_d2;
    outer.rounding_error = std::max(outer.rounding_error, inner.rounding_error);
    outer.min_abs_det = std::min(outer.min_abs_det, inner.min_abs_det);
    outer.moments.clear();
    return outer;
  }
  if (ray_margin(e, region) <= 0.0)
    throw ConfigError("contour meets an essential-spectrum ray: reposition the region");
  const int ns = static_cast<int>(e.sectors().size());
  std::vector<std::vector<Complex>> poles(static_cast<std::size_t>(ns));
  int npoles = 0;
  for (int s = 0; s < ns; ++s) {
    poles[s] = poles_inside(e, s, region);
    npoles += static_cast<int>(poles[s].size());
  }
  const double scale = region.outer_radius();
  auto contour = [&](int n) {
    return region.shape == RegionShape::disc ? circle_contour(region.center, region.r, n)
                                             : box_contour(region.lo, region.hi, n / 4);
  };
  ContourCount prev = detail::integrate(e, contour(base), poles, region.center, scale, kmax);
  for (int n = 2 * base;; n *= 2) {
    if (n > max_points)
      throw NumericalError("winding estimate did not stabilize: refine contour sampling");
    ContourCount cur = detail::integrate(e, contour(n), poles, region.center, scale, kmax);
    double change = 0.0;
    for (int s = 0; s < ns; ++s) change = std::max(change, std::abs(cur.raw[s] - prev.raw[s]));
    prev = std::move(cur);
    if (change < 0.05) break;
  }
  if (!(prev.min_abs_det > 1e-8))
    throw NumericalError("determinant nearly vanishes on the contour (min |d| = " +
                         std::to_string(prev.min_abs_det) + "): reposition the region");
  prev.total = 0;
  for (int s = 0; s < ns; ++s) {
    const double x = prev.raw[s];
    const double rounded = std::round(x);
    prev.rounding_error = std::max(prev.rounding_error, std::abs(x - rounded));
    prev.by_sector[s] = static_cast<int>(rounded);
    prev.total += prev.by_sector[s];
  }
  if (prev.rounding_error > 0.1)
    throw NumericalError("non-integer winding (" + std::to_string(prev.rounding_error) +
                         " off): refine contour sampling");
  prev.winding_d2 = prev.total - npoles;
  return prev;
}

enum class Source { det2_zero, direct_eigen, both };

inline std::string source_name(Source s) {
  switch (s) {
    case Source::det2_zero: return "det2_zero";
    case Source::direct_eigen: return "direct_eigen";
    case Source::both: return "both";
  }
  return "";
}

struct Resonance {
  Complex z{};
  int multiplicity = 1;
  double newton_residual = 0.0;
  Complex theta_used{};
  Source source = Source::det2_zero;
  int m = 0;
  int iterations = 0;
};

struct Cluster {
  Complex center{};
  double radius = 0.0;
  int m = 0;
  int total_winding = 0;
};

struct ResonanceSet {
  std::vector<Resonance> items;
  std::vector<Complex> unperturbed;  // eigenvalues of H0,theta that V leaves in place
  std::vector<Cluster> unresolved;
  SearchRegion region;
  int total_count = 0;
  int winding_d2 = 0;
  double theta_stability = 0.0;
};

/// Winding of F_m on a small circle about z.
inline double local_winding(const bs::Engine& e, int idx, Complex z, double radius,
                            const std::vector<Complex>& poles, int n = 64) {
  const auto k = circle_contour(z, radius, n);
  Complex acc{};
  for (std::size_t i = 0; i < k.nodes.size(); ++i)
    acc += deflated_log_derivative(e.evaluate_sector(idx, k.nodes[i]), k.nodes[i], poles) *
           k.weights[i];
  return (acc / (2.0 * kPi * kI)).real();
}

/// Newton on F_m from z_init. Stops when |step| < 1e-10 (1 + |z|) or after 50
/// iterations; leaving the capture disc raises DivergenceError.
inline Resonance refine_zero(const bs::Engine& e, int idx, Complex z_init,
                             const std::vector<Complex>& poles, double capture = 0.1,
                             double mult_radius = 1e-4) {
  std::vector<Complex> path{z_init};
  Complex z = z_init;
  Resonance r;
  r.m = e.sectors()[idx].m;
  r.theta_used = e.profile().theta();
  bool converged = false;
  for (int it = 0; it < 50; ++it) {
    const Complex g = deflated_log_derivative(e.evaluate_sector(idx, z), z, poles);
    const Complex step = -1.0 / g;
    z += step;
    path.push_back(z);
    r.iterations = it + 1;
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || std::abs(z - z_init) > capture)
      throw DivergenceError(path, "Newton left its capture basin");
    r.newton_residual = std::abs(step);
    if (std::abs(step) < 1e-10 * (1.0 + std::abs(z))) {
      converged = true;
      break;
    }
  }
  if (!converged) throw DivergenceError(path, "Newton did not converge in 50 iterations");
  e.check_point(z + mult_radius);
  const double w = local_winding(e, idx, z, mult_radius, poles);
  if (std::abs(w - std::round(w)) > 0.1 || std::round(w) < 1.0)
    throw NumericalError("multiplicity winding " + std::to_string(w) + " is not a positive integer");
  r.multiplicity = static_cast<int>(std::round(w));
  r.z = z;
  return r;
}

/// Eigenvalues of A_m inside the region by shift-invert Arnoldi at the region
/// centre, refined by Rayleigh quotient iteration. Values must agree between
/// Krylov sizes k and 2k.
struct DirectEigen {
  Complex z{};
  int m = 0;
  double residual = 0.0;
};

inline std::vector<DirectEigen> direct_eigenvalues(const bs::Engine& e, const SearchRegion& region,
                                                   int k = 40) {
  std::vector<std::vector<DirectEigen>> per(e.sectors().size());
  // Shift slightly off any pole or eigenvalue so the shifted factorization is regular.
  const Complex sigma = region.center + Complex{1.3e-3, -0.7e-3} * region.outer_radius();
  parallel_for(static_cast<int>(e.sectors().size()), e.workers(), [&](int s) {
    const auto a = e.sector_matrix(s);
    auto collect = [&](int kk) {
      std::vector<linalg::RitzPair> out;
      for (auto& p : linalg::shift_invert_arnoldi(a, sigma, kk))
        if (std::abs(p.value - region.center) < 1.2 * region.outer_radius())
          out.push_back(linalg::rayleigh_refine(a, std::move(p)));
      return out;
    };
    const auto small = collect(k);
    const auto large = collect(2 * k);
    std::vector<DirectEigen> found;
    for (const auto& p : large) {
      if (!region.contains(p.value)) continue;
      bool dup = false;
      for (const auto& f : found) dup = dup || std::abs(f.z - p.value) < 1e-9 * (1.0 + std::abs(p.value));
      if (dup) continue;
      bool stable = false;
      for (const auto& q : small) stable = stable || std::abs(q.value - p.value) < 1e-8 * (1.0 + std::abs(p.value));
      if (!stable)
        throw NumericalError("direct eigenvalue not stable between Krylov sizes " +
                             std::to_string(k) + " and " + std::to_string(2 * k));
      found.push_back({p.value, e.sectors()[s].m, p.residual});
    }
    per[s] = std::move(found);
  });
  std::vector<DirectEigen> out;
  for (auto& v : per) out.insert(out.end(), v.begin(), v.end());
  return out;
}

enum class Seeding { subdivision, direct_eigen };

namespace detail {

inline void sort_items(ResonanceSet& set) {
  std::sort(set.items.begin(), set.items.end(), [](const Resonance& a, const Resonance& b) {
    if (a.m != b.m) return a.m < b.m;
    if (a.z.real() != b.z.real()) return a.z.real() < b.z.real();
    return a.z.imag() < b.z.imag();
  });
}

// Roots from the power sums p_1..p_n of n points (Newton identities).
inline std::vector<Complex> roots_from_power_sums(const std::vector<Complex>& p, int n) {
  std::vector<Complex> e(static_cast<std::size_t>(n + 1));
  e[0] = 1.0;
  for (int k = 1; k <= n; ++k) {
    Complex s{};
    for (int i = 1; i <= k; ++i) s += (i % 2 == 1 ? 1.0 : -1.0) * e[k - i] * p[i];
    e[k] = s / static_cast<double>(k);
  }
  if (n == 1) return {e[1]};
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 1; i < n; ++i) c(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) c(i, n - 1) = (((n - i) % 2 == 1) ? 1.0 : -1.0) * e[n - i];
  const auto ev = linalg::eigenvalues(c);
  return {ev.begin(), ev.end()};
}

struct Cell {
  Complex lo;
  Complex hi;
  int depth;
};

}  // namespace detail

/// All resonances of the truncated model in the region. Seeds come from
/// quadrisection by winding or from direct eigenvalues; every seed is
/// polished by Newton and the multiplicities must add up to the winding.
inline ResonanceSet find_resonances(const bs::Engine& e, const SearchRegion& region,
                                    Seeding seeding = Seeding::subdivision,
                                    int max_depth = 12) {
  ResonanceSet set;
  set.region = region;
  const auto count = count_zeros_contour(e, region, 4);
  set.total_count = count.total;
  set.winding_d2 = count.winding_d2;
  const int ns = static_cast<int>(e.sectors().size());
  const double scale = region.outer_radius();

  auto add = [&](int s, Complex seed, const std::vector<Complex>& poles, Source src) {
    Resonance r = refine_zero(e, s, seed, poles, 0.5 * scale);
    r.source = src;
    if (!region.contains(r.z)) return;
    for (const auto& p : poles)
      if (std::abs(r.z - p) < 1e-9 * (1.0 + std::abs(p))) {
        for (int k = 0; k < r.multiplicity; ++k) set.unperturbed.push_back(r.z);
        return;
      }
    for (const auto& x : set.items)
      if (x.m == r.m && std::abs(x.z - r.z) < 1e-8 * (1.0 + std::abs(r.z))) return;
    set.items.push_back(r);
  };

  if (seeding == Seeding::direct_eigen) {
    for (const auto& d : direct_eigenvalues(e, region)) {
      const int s = e.sector_index(d.m);
      add(s, d.z, poles_inside(e, s, region), Source::both);
    }
  } else {
    for (int s = 0; s < ns; ++s) {
      const int n = count.by_sector[s];
      if (n == 0) continue;
      const auto poles = poles_inside(e, s, region);
      if (region.shape == RegionShape::disc && n <= 4) {
        // Power sums of the enclosed zeros give the seeds directly.
        const auto& mom = count.moments[s];
        std::vector<Complex> p(mom.begin(), mom.begin() + n + 1);
        bool ok = true;
        const std::size_t before = set.items.size();
        const std::size_t before_unperturbed = set.unperturbed.size();
        try {
          for (const auto& u : detail::roots_from_power_sums(p, n))
            add(s, region.center + scale * u, poles, Source::det2_zero);
        } catch (const NumericalError&) {
          ok = false;
        }
        int got = static_cast<int>(set.unperturbed.size() - before_unperturbed);
        for (std::size_t i = before; i < set.items.size(); ++i) got += set.items[i].multiplicity;
        if (ok && got == n) continue;
        set.items.resize(before);
        set.unperturbed.resize(before_unperturbed);
      }
      // Quadrisection with split points off the cell midlines.
      const double half = region.shape == RegionShape::box ? 0.0 : region.outer_radius();
      std::vector<detail::Cell> stack;
      if (region.shape == RegionShape::box)
        stack.push_back({region.lo, region.hi, 0});
      else
        stack.push_back({region.center - Complex{half, half} * 1.0001,
                         region.center + Complex{half, half} * 0.9999, 0});
      constexpr double kSplit = 0.4871;
      while (!stack.empty()) {
        const auto cell = stack.back();
        stack.pop_back();
        const auto sub = SearchRegion::box(cell.lo, cell.hi, region.q);
        const auto k = count_zeros_contour(e, sub, 1, 64);
        const int w = k.by_sector[s];
        if (w == 0) continue;
        if (w == 1) {
          const Complex seed = sub.center + sub.outer_radius() * k.moments[s][1];
          add(s, seed, poles, Source::det2_zero);
          continue;
        }
        if (cell.depth >= max_depth) {
          set.unresolved.push_back({sub.center, sub.outer_radius(), e.sectors()[s].m, w});
          continue;
        }
        const Complex mid{cell.lo.real() + kSplit * (cell.hi.real() - cell.lo.real()),
                          cell.lo.imag() + kSplit * (cell.hi.imag() - cell.lo.imag())};
        stack.push_back({cell.lo, mid, cell.depth + 1});
        stack.push_back({{mid.real(), cell.lo.imag()}, {cell.hi.real(), mid.imag()}, cell.depth + 1});
        stack.push_back({{cell.lo.real(), mid.imag()}, {mid.real(), cell.hi.imag()}, cell.depth + 1});
        stack.push_back({mid, cell.hi, cell.depth + 1});
      }
    }
  }
  detail::sort_items(set);
  int found = static_cast<int>(set.unperturbed.size());
  for (const auto& r : set.items) found += r.multiplicity;
  for (const auto& c : set.unresolved) found += c.total_winding;
  if (found != set.total_count)
    throw NumericalError("resonance multiplicities (" + std::to_string(found) +
                         ") disagree with the region winding (" +
                         std::to_string(set.total_count) + ")");
  set.total_count -= static_cast<int>(set.unperturbed.size());
  return set;
}

/// Max distance between matched resonances of two sets (same m, nearest z);
/// infinity when the sets do not match one to one.
inline double match_distance(const ResonanceSet& a, const ResonanceSet& b) {
  if (a.items.size() != b.items.size()) return std::numeric_limits<double>::infinity();
  std::vector<bool> used(b.items.size(), false);
  double worst = 0.0;
  for (const auto& x : a.items) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0;
    for (std::size_t i = 0; i < b.items.size(); ++i) {
      if (used[i] || b.items[i].m != x.m || b.items[i].multiplicity != x.multiplicity) continue;
      const double d = std::abs(b.items[i].z - x.z);
      if (d < best) {
        best = d;
        bi = i;
      }
    }
    if (!std::isfinite(best)) return best;
    used[bi] = true;
    worst = std::max(worst, best / (1.0 + std::abs(x.z)));
  }
  return worst;
}

/// First-order placement 2bq + lambda + <psi, w psi> mu_{q,m} for the sector
/// of angular momentum m, with w including the coupling constant.
inline Complex perturbative_position(const bs::Engine& e, int q, int m) {
  const auto& bs0 = e.bound_states().front();
  const auto& g = e.grid();
  double pw = 0.0;
  for (int i = 0; i < g.n; ++i)
    pw += g.h * bs0.psi[i] * bs0.psi[i] * e.model().V.w(g.nodes[i]).real();
  const landau::RadialProfile rp(e.model().V.W, e.model().b);
  const double mu = landau::toeplitz_entry(rp, q, m);
  return 2.0 * e.model().b * q + bs0.lambda + e.model().V.kappa * pw * mu;
}

/// r0: half the distance from 2bq + lambda to the nearest other spectral
/// feature (ray foot, ray, or discrete eigenvalue of the distorted axis
/// operator shifted by a Landau level).
inline double r0(const bs::Engine& e, int q) {
  const Complex c = 2.0 * e.model().b * q + e.axis_discrete().front();
  double d = std::numeric_limits<double>::infinity();
  const Complex dir = e.profile().ray_direction();
  for (int j = 0; j <= e.truncation().J; ++j) {
    d = std::min(d, distance_to_ray(c, 2.0 * e.model().b * j, dir));
    for (const auto& z : e.axis_discrete()) {
      const Complex p = 2.0 * e.model().b * j + z;
      if (std::abs(p - c) > 1e-9) d = std::min(d, std::abs(p - c));
    }
  }
  return 0.5 * d;
}

struct AnnulusRow {
  double r = 0.0;
  int count = 0;            // resonances in r < |z - c| < 2r
  int disc_count = 0;       // resonances in |z - c| < 2r
  double n_plus = 0.0;      // n_+(r, nu p_q W_env p_q)
  double envelope = 0.0;    // n_plus * |ln r|
  double ratio = 0.0;
  bool skipped = false;
  std::string note;
};

/// Annulus counts around 2bq + lambda against the Toeplitz envelope. The
/// envelope uses the spectrum of p_q W_env p_q (W_env = kappa W by default).
inline std::vector<AnnulusRow> annulus_count_experiment(const bs::Engine& e, int q,
                                                        const std::vector<double>& r_list,
                                                        const landau::ToeplitzSpectrum& env,
                                                        double nu = 1.0) {
  for (std::size_t i = 1; i < r_list.size(); ++i)
    if (!(r_list[i] < r_list[i - 1])) throw ConfigError("r_list must be decreasing");
  const double rmax = r0(e, q);
  const Complex c = 2.0 * e.model().b * q + e.axis_discrete().front();
  std::vector<AnnulusRow> rows;
  for (double r : r_list) {
    AnnulusRow row;
    row.r = r;
    if (!(r > 0.0) || !(r < rmax)) throw ConfigError("annulus radius outside (0, r0)");
    const auto ann = SearchRegion::annulus(c, r, q);
    if (ray_margin(e, ann) <= 0.0) {
      row.skipped = true;
      row.note = "annulus intersects a ray";
      rows.push_back(row);
      continue;
    }
    const int outer = count_zeros_contour(e, SearchRegion::disc(c, 2.0 * r, q)).total;
    const int inner = count_zeros_contour(e, SearchRegion::disc(c, r, q)).total;
    row.count = outer - inner;
    row.disc_count = outer;
    row.n_plus = landau::counting_function(r, env, nu).count;
    row.envelope = row.n_plus * std::abs(std::log(r));
    row.ratio = row.envelope > 0.0 ? row.count / row.envelope
                                   : (row.count == 0 ? 0.0 : std::numeric_limits<double>::infinity());
    rows.push_back(row);
  }
  return rows;
}

/// True when the values show no increasing trend: the fitted growth factor
/// per halving of r stays below 1.5.
inline bool no_growth_trend(const std::vector<double>& r, const std::vector<double>& v,
                            double* factor = nullptr) {
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < r.size(); ++i) {
    x.push_back(std::log(1.0 / r[i]));
    y.push_back(std::log(std::max(v[i], 1e-12)));
  }
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  landau::least_squares(x, y, slope, intercept, residual);
  const double f = std::exp(slope * std::log(2.0));
  if (factor != nullptr) *factor = f;
  return f < 1.5;
}

}  // namespace magres::res
