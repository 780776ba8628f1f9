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

#include "magres/common.hpp"
#include "magres/linalg/arnoldi.hpp"
#include "magres/linalg/banded.hpp"
#include "magres/linalg/lapack.hpp"

namespace magres::axis {

enum class ProfileShape { smoothstep, pure_dilation };

/// phi(x) = x + theta * g(x) with g odd, zero on [-R0, R0], equal to x beyond K
/// and a quintic smoothstep blend x * S((|x| - R0) / (K - R0)) in between.
class DistortionProfile {
 public:
  DistortionProfile() = default;
  DistortionProfile(double r0, double k, Complex theta, ProfileShape shape,
                    double slope_max)
      : r0_(r0), k_(k), theta_(theta), shape_(shape), slope_max_(slope_max) {}

  [[nodiscard]] double R0() const { return r0_; }
  [[nodiscard]] double K() const { return k_; }
  [[nodiscard]] Complex theta() const { return theta_; }
  [[nodiscard]] ProfileShape shape() const { return shape_; }
  [[nodiscard]] double slope_max() const { return slope_max_; }

  [[nodiscard]] double g(double x) const {
    if (shape_ == ProfileShape::pure_dilation) return x;
    const double ax = std::abs(x);
    if (ax <= r0_) return 0.0;
    if (ax >= k_) return x;
    return x * step(t_of(ax));
  }
  [[nodiscard]] double dg(double x) const {
    if (shape_ == ProfileShape::pure_dilation) return 1.0;
    const double ax = std::abs(x);
    if (ax <= r0_) return 0.0;
    if (ax >= k_) return 1.0;
    const double t = t_of(ax);
    return step(t) + ax * dstep(t) / (k_ - r0_);
  }
  [[nodiscard]] double d2g(double x) const {
    if (shape_ == ProfileShape::pure_dilation) return 0.0;
    const double ax = std::abs(x);
    if (ax <= r0_ || ax >= k_) return 0.0;
    const double t = t_of(ax);
    const double w = k_ - r0_;
    const double s = 2.0 * dstep(t) / w + ax * d2step(t) / (w * w);
    return x < 0.0 ? -s : s;
  }

  [[nodiscard]] Complex phi(double x) const { return x + theta_ * g(x); }
  [[nodiscard]] Complex dphi(double x) const { return 1.0 + theta_ * dg(x); }
  [[nodiscard]] Complex d2phi(double x) const { return theta_ * d2g(x); }

  /// Direction of the rotated essential-spectrum ray, (1 + theta)^-2.
  [[nodiscard]] Complex ray_direction() const {
    return 1.0 / ((1.0 + theta_) * (1.0 + theta_));
  }

  static double step(double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }
  static double dstep(double t) { return 30.0 * t * t * (1.0 - t) * (1.0 - t); }
  static double d2step(double t) { return 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t); }

 private:
  [[nodiscard]] double t_of(double ax) const { return (ax - r0_) / (k_ - r0_); }

  double r0_ = 1.0;
  double k_ = 2.0;
  Complex theta_{};
  ProfileShape shape_ = ProfileShape::smoothstep;
  double slope_max_ = 1.0;
};

/// sup |g'| of the smoothstep profile, by dense sampling of the blend zone.
inline double smoothstep_slope_max(double r0, double k) {
  const DistortionProfile p(r0, k, 0.0, ProfileShape::smoothstep, 1.0);
  double m = 1.0;
  constexpr int kSamples = 20000;
  for (int i = 0; i <= kSamples; ++i)
    m = std::max(m, std::abs(p.dg(r0 + (k - r0) * i / kSamples)));
  return m;
}

inline DistortionProfile build_distortion(
    double r0, double k, Complex theta,
    ProfileShape shape = ProfileShape::smoothstep) {
  double slope = 1.0;
  if (shape == ProfileShape::smoothstep) {
    if (!(r0 > 0.0) || !(k > r0))
      throw ConfigError("distortion requires 0 < R0 < K, got R0=" +
                        std::to_string(r0) + " K=" + std::to_string(k));
    slope = smoothstep_slope_max(r0, k);
  }
  if (std::abs(theta) * slope >= 1.0)
    throw ConfigError("|theta| * sup|g'| = " +
                      std::to_string(std::abs(theta) * slope) +
                      " >= 1: contour map is not invertible");
  return {r0, k, theta, shape, slope};
}

enum class Scheme { fd4, chebyshev };

struct Grid1D {
  double L = 0.0;
  int n = 0;
  Scheme scheme = Scheme::fd4;
  double h = 0.0;
  std::vector<double> nodes;
};

/// Interior nodes of [-L, L] with Dirichlet ends.
inline Grid1D make_grid(double L, int n, Scheme scheme = Scheme::fd4) {
  if (n < 64) throw ConfigError("axis grid needs at least 64 points");
  if (!(L > 0.0)) throw ConfigError("axis half-length must be positive");
  Grid1D g{L, n, scheme, 0.0, {}};
  g.nodes.resize(static_cast<std::size_t>(n));
  if (scheme == Scheme::fd4) {
    g.h = 2.0 * L / (n + 1);
    for (int i = 0; i < n; ++i) g.nodes[i] = -L + (i + 1) * g.h;
    for (int i = 0; i < n / 2; ++i) {
      const double s = 0.5 * (g.nodes[n - 1 - i] - g.nodes[i]);
      g.nodes[i] = -s;
      g.nodes[n - 1 - i] = s;
    }
    if (n % 2 == 1) g.nodes[n / 2] = 0.0;
  } else {
    for (int i = 0; i < n; ++i) g.nodes[i] = -L * std::cos(kPi * (i + 1) / (n + 1));
    g.h = g.nodes[n / 2] - g.nodes[n / 2 - 1];
  }
  return g;
}

enum class Family { poschl_teller, gaussian_well, power_law, zero };

/// Analytic 1D profile amplitude * f(z / width). Used for v0 and for the
/// axial factor w of the perturbation.
struct AxisFunction {
  Family family = Family::zero;
  double amplitude = 0.0;
  double width = 1.0;
  double decay = 2.0;  // power_law exponent

  [[nodiscard]] Complex operator()(Complex z) const {
    const Complex u = z / width;
    switch (family) {
      case Family::poschl_teller: {
        const Complex c = std::cosh(u);
        return amplitude / (c * c);
      }
      case Family::gaussian_well:
        return amplitude * std::exp(-u * u);
      case Family::power_law:
        return amplitude * std::pow(1.0 + u * u, -0.5 * decay);
      case Family::zero:
        return 0.0;
    }
    return 0.0;
  }

  /// Distance in the u plane below which a node counts as hitting a pole.
  [[nodiscard]] bool near_pole(Complex z) const {
    const Complex u = z / width;
    if (family == Family::poschl_teller) return std::abs(std::cosh(u)) < 1e-8;
    if (family == Family::power_law) return std::abs(1.0 + u * u) < 1e-8;
    return false;
  }

  /// Decay exponent delta with |f| = O(<x>^-delta); infinite for exponential tails.
  [[nodiscard]] double decay_exponent() const {
    if (family == Family::power_law) return decay;
    return std::numeric_limits<double>::infinity();
  }

  [[nodiscard]] double sup_abs_real() const {
    return family == Family::zero ? 0.0 : std::abs(amplitude);
  }
};

inline std::string family_name(Family f) {
  switch (f) {
    case Family::poschl_teller: return "poschl_teller";
    case Family::gaussian_well: return "gaussian_well";
    case Family::power_law: return "power_law";
    case Family::zero: return "zero";
  }
  return "zero";
}

/// f(phi(x_i)) on the grid; throws if a node sits on a pole of f.
inline std::vector<Complex> on_contour(const AxisFunction& f,
                                       const DistortionProfile& p,
                                       const Grid1D& grid) {
  std::vector<Complex> out(grid.nodes.size());
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
    const Complex z = p.phi(grid.nodes[i]);
    if (f.near_pole(z))
      throw ConfigError("contour passes through a singularity of the axis "
                        "potential at node " + std::to_string(i) + " (x=" +
                        std::to_string(grid.nodes[i]) + ")");
    out[i] = f(z);
  }
  return out;
}

/// Fourth-order finite-difference contour form
/// -(1/phi') d/dx (1/phi') d/dx + v0(phi(x)), pentadiagonal.
inline linalg::BandedMatrix<Complex> assemble_axis_operator(
    const DistortionProfile& p, const Grid1D& grid, const AxisFunction& v0) {
  if (grid.scheme != Scheme::fd4)
    throw ConfigError("banded assembly requires the fd4 scheme");
  if (p.shape() == ProfileShape::smoothstep && !(grid.L > p.K()))
    throw ConfigError("axis half-length L must exceed K");
  const int n = grid.n;
  const double h = grid.h;
  const auto v = on_contour(v0, p, grid);
  linalg::BandedMatrix<Complex> m(n, 2, 2);
  const double d2[5] = {-1.0, 16.0, -30.0, 16.0, -1.0};
  const double d1[5] = {1.0, -8.0, 0.0, 8.0, -1.0};
  for (int i = 0; i < n; ++i) {
    const double x = grid.nodes[i];
    const Complex dp = p.dphi(x);
    const Complex a = 1.0 / (dp * dp);
    const Complex c = p.d2phi(x) / (dp * dp * dp);
    for (int s = -2; s <= 2; ++s) {
      const Complex coef = -a * d2[s + 2] / (12.0 * h * h) + c * d1[s + 2] / (12.0 * h);
      int j = i + s;
      double sign = 1.0;
      if (j == -1 || j == n) continue;  // Dirichlet node
      if (j == -2) {
        j = 0;
        sign = -1.0;
      } else if (j == n + 1) {
        j = n - 1;
        sign = -1.0;
      }
      m(i, j) += sign * coef;
    }
    m(i, i) += v[i];
  }
  return m;
}

/// Dense matrix for either scheme (Chebyshev collocation is dense only).
inline Eigen::MatrixXcd assemble_axis_dense(const DistortionProfile& p,
                                            const Grid1D& grid,
                                            const AxisFunction& v0) {
  const int n = grid.n;
  if (grid.scheme == Scheme::fd4) {
    const auto b = assemble_axis_operator(p, grid, v0);
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = std::max(0, i - 2); j <= std::min(n - 1, i + 2); ++j) d(i, j) = b(i, j);
    return d;
  }
  const int N = n + 1;
  std::vector<double> x(static_cast<std::size_t>(N + 1));
  for (int j = 0; j <= N; ++j) x[j] = -grid.L * std::cos(kPi * j / N);
  Eigen::MatrixXd D(N + 1, N + 1);
  auto cw = [&](int j) { return ((j == 0 || j == N) ? 2.0 : 1.0) * ((j % 2) ? -1.0 : 1.0); };
  for (int i = 0; i <= N; ++i) {
    double rs = 0.0;
    for (int j = 0; j <= N; ++j) {
      if (i == j) continue;
      D(i, j) = cw(i) / (cw(j) * (x[i] - x[j]));
      rs += D(i, j);
    }
    D(i, i) = -rs;
  }
  const Eigen::MatrixXd D2 = D * D;
  const auto v = on_contour(v0, p, grid);
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i) {
    const Complex dp = p.dphi(grid.nodes[i]);
    const Complex a = 1.0 / (dp * dp);
    const Complex c = p.d2phi(grid.nodes[i]) / (dp * dp * dp);
    for (int j = 0; j < n; ++j) m(i, j) = -a * D2(i + 1, j + 1) + c * D(i + 1, j + 1);
    m(i, i) += v[i];
  }
  return m;
}

struct BoundState {
  double lambda = 0.0;
  std::vector<double> psi;  // sum_i h psi_i^2 = 1, psi(0) > 0
};

struct AxisSpectrum {
  std::vector<Complex> eigenvalues;
  Complex ray_origin{};
  Complex ray_direction{1.0, 0.0};
  std::vector<Complex> on_ray;
  std::vector<Complex> discrete;
  std::optional<BoundState> bound_state;
  bool multiple_bound_states = false;
};

inline bool near_ray(Complex z, Complex direction, double ray_tolerance) {
  return distance_to_ray(z, 0.0, direction) <= ray_tolerance * (1.0 + std::abs(z));
}

/// Splits eigenvalues into the ray cloud and the discrete set.
inline AxisSpectrum classify_spectrum(const std::vector<Complex>& eigenvalues,
                                      const DistortionProfile& p,
                                      double ray_tolerance = 1e-3) {
  AxisSpectrum s;
  s.eigenvalues = eigenvalues;
  std::sort(s.eigenvalues.begin(), s.eigenvalues.end(),
            [](Complex a, Complex b) { return a.real() < b.real(); });
  s.ray_direction = p.ray_direction();
  for (const auto& z : s.eigenvalues) {
    if (near_ray(z, s.ray_direction, ray_tolerance))
      s.on_ray.push_back(z);
    else
      s.discrete.push_back(z);
  }
  return s;
}

/// All negative eigenvalues of the undistorted operator, ascending.
inline std::vector<double> negative_eigenvalues(const Grid1D& grid,
                                                const AxisFunction& v0) {
  const auto p0 = build_distortion(1.0, 2.0, 0.0, ProfileShape::pure_dilation);
  const auto m = assemble_axis_operator(p0, grid, v0);
  const auto w = linalg::symmetric_band_eigenvalues(m, 2);
  std::vector<double> out;
  for (double e : w)
    if (e < 0.0) out.push_back(e);
  return out;
}

/// Eigenpair of the undistorted operator near the given energy, by inverse
/// iteration on the banded matrix.
inline BoundState refine_bound_state(const Grid1D& grid, const AxisFunction& v0,
                                     double energy) {
  const auto p0 = build_distortion(1.0, 2.0, 0.0, ProfileShape::pure_dilation);
  const auto m = assemble_axis_operator(p0, grid, v0);
  const int n = grid.n;
  linalg::RitzPair pair;
  pair.value = energy * (1.0 + 1e-12) - 1e-13;
  pair.vector.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    pair.vector[i] = 1.0 / std::cosh(grid.nodes[i] / (0.25 * grid.L));
  pair = linalg::rayleigh_refine(m, pair);
  BoundState bs;
  bs.lambda = pair.value.real();
  bs.psi.resize(static_cast<std::size_t>(n));
  std::size_t imax = 0;
  for (int i = 0; i < n; ++i) {
    bs.psi[i] = pair.vector[i].real();
    if (std::abs(pair.vector[i]) > std::abs(pair.vector[imax])) imax = i;
  }
  // Remove a global complex phase before taking real parts.
  const Complex ph = std::abs(pair.vector[imax]) / pair.vector[imax];
  double norm = 0.0;
  for (int i = 0; i < n; ++i) {
    bs.psi[i] = (pair.vector[i] * ph).real();
    norm += grid.h * bs.psi[i] * bs.psi[i];
  }
  norm = std::sqrt(norm);
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += bs.psi[i];
  const double sign = s < 0.0 ? -1.0 : 1.0;
  for (auto& e : bs.psi) e *= sign / norm;
  return bs;
}

/// Ground state of the undistorted operator; throws when none lies below 0.
inline BoundState bound_state(const Grid1D& grid, const AxisFunction& v0,
                              bool* multiple = nullptr) {
  const auto neg = negative_eigenvalues(grid, v0);
  if (neg.empty()) throw NumericalError("no bound state: no eigenvalue below 0");
  if (multiple != nullptr) *multiple = neg.size() > 1;
  return refine_bound_state(grid, v0, neg.front());
}

/// Eigenvalue of the distorted operator nearest a guess, by Rayleigh quotient
/// iteration seeded with an optional vector.
inline Complex discrete_eigenvalue(const linalg::BandedMatrix<Complex>& m,
                                   Complex guess,
                                   const std::vector<double>* seed = nullptr) {
  linalg::RitzPair pair;
  pair.value = guess + Complex{1e-12, 1e-12};
  pair.vector.resize(static_cast<std::size_t>(m.size()));
  for (int i = 0; i < m.size(); ++i)
    pair.vector[i] = seed != nullptr ? Complex{(*seed)[i]} : Complex{1.0};
  pair = linalg::rayleigh_refine(m, pair);
  return pair.value;
}

/// Full spectrum of the distorted operator with classification and, at
/// theta = 0, bound-state extraction.
inline AxisSpectrum axis_spectrum(const DistortionProfile& p, const Grid1D& grid,
                                  const AxisFunction& v0,
                                  double ray_tolerance = 1e-3,
                                  bool want_bound_state = false) {
  auto s = classify_spectrum(linalg::eigenvalues(assemble_axis_dense(p, grid, v0)),
                             p, ray_tolerance);
  if (want_bound_state) {
    if (p.theta() != Complex{0.0, 0.0})
      throw ConfigError("bound-state extraction requires theta = 0");
    bool multiple = false;
    s.bound_state = bound_state(grid, v0, &multiple);
    s.multiple_bound_states = multiple;
  }
  return s;
}

/// True iff min(real eigenvalues, 0) > -2b.
inline bool inf_spectrum_check(const AxisSpectrum& s, double b) {
  double m = 0.0;
  for (const auto& z : s.eigenvalues)
    if (std::abs(z.imag()) <= 1e-10 * (1.0 + std::abs(z))) m = std::min(m, z.real());
  if (s.bound_state) m = std::min(m, s.bound_state->lambda);
  return m > -2.0 * b;
}

inline bool inf_spectrum_check(double lowest, double b) {
  return std::min(lowest, 0.0) > -2.0 * b;
}

}  // namespace magres::axis
