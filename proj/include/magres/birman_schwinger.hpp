// Copyright 2026 The magres Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "magres/axis1d.hpp"
#include "magres/common.hpp"
#include "magres/landau.hpp"
#include "magres/linalg/banded.hpp"
#include "magres/linalg/dual.hpp"
#include "magres/linalg/lapack.hpp"
#include "magres/parallel.hpp"

namespace magres::bs {

/// V(x) = kappa * W(|X_perp|) * w(x3).
struct SeparablePotential {
  landau::TransversePotential W;
  axis::AxisFunction w;
  double kappa = 1.0;
  /// Decay exponent used for the weight <x>^-delta_parallel / 2 of the
  /// sandwiched form; exponential tails use 2.
  double delta_parallel = 2.0;
};

struct ModelSpec {
  double b = 2.0;
  axis::AxisFunction v0;
  SeparablePotential V;
};

struct Truncation {
  int J = 2;  // highest Landau level kept
  int M = 8;  // highest angular momentum kept
};

/// Regularized determinant value with its logarithm.
struct Det2Value {
  Complex value{1.0, 0.0};
  double log_abs = 0.0;
  double arg_branch = 0.0;  // sum of principal arguments of the factors
  int zero_multiplicity = 0;
};

/// det_2(I + A) = prod (1 + l_i) exp(-l_i) over the eigenvalues of A.
inline Det2Value det2(const Eigen::MatrixXcd& a) {
  Det2Value d;
  if (a.rows() == 0) return d;
  const auto ev = linalg::eigenvalues(a);
  Complex lg{};
  for (const auto& l : ev) {
    if (std::abs(1.0 + l) < 1e-14) {
      ++d.zero_multiplicity;
      continue;
    }
    lg += std::log(1.0 + l) - l;
  }
  d.log_abs = lg.real();
  d.arg_branch = lg.imag();
  d.value = d.zero_multiplicity > 0 ? Complex{} : std::exp(lg);
  return d;
}

/// det(I + A) exp(-tr A) through an LU factorization.
inline Complex det_times_exp_trace(const Eigen::MatrixXcd& a) {
  const Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(a.rows(), a.cols()) + a;
  return Eigen::PartialPivLU<Eigen::MatrixXcd>(m).determinant() * std::exp(-a.trace());
}

/// Logarithmic data of one angular-momentum sector at a point z.
struct SectorEval {
  Complex log_det_a{};    // log det(A_m - z)
  Complex dlog_det_a{};   // d/dz of the above
  Complex log_det_a0{};   // log det(A0_m - z)
  Complex dlog_det_a0{};
  Complex tr_t{};         // tr V (A0_m - z)^-1
  Complex tr_t_prime{};   // tr V (A0_m - z)^-2
  double pivot_ratio = 0.0;

  [[nodiscard]] Complex log_det_i_plus_t() const { return log_det_a - log_det_a0; }
  [[nodiscard]] Complex log_d2() const { return log_det_a - log_det_a0 - tr_t; }
  [[nodiscard]] Complex dlog_d2() const { return dlog_det_a - dlog_det_a0 - tr_t_prime; }
  [[nodiscard]] Complex dlog_det_i_plus_t() const { return dlog_det_a - dlog_det_a0; }
};

struct Det2Eval {
  Complex log_d2{};
  Complex dlog_d2{};
  Complex log_det_i_plus_t{};
  Complex dlog_det_i_plus_t{};
  Complex tr_t{};
  Complex tr_t_prime{};
  double pivot_ratio = 0.0;
  std::vector<SectorEval> sectors;
};

struct Sector {
  int m = 0;
  int jmin = 0;
  int nl = 0;
  Eigen::MatrixXd W;  // level coupling of the transverse potential
};

enum class Form { unsandwiched, sandwiched };

/// Truncated Birman-Schwinger machinery for a separable perturbation on the
/// distorted axis grid. Immutable after construction.
class Engine {
 public:
  Engine(ModelSpec model, axis::DistortionProfile profile, axis::Grid1D grid, Truncation trunc,
         int workers = 1)
      : model_(std::move(model)), profile_(std::move(profile)), grid_(std::move(grid)),
        trunc_(trunc), workers_(workers) {
    if (trunc_.J < 0) throw ConfigError("Landau cutoff J must be non-negative");
    if (trunc_.M < -trunc_.J) throw ConfigError("angular cutoff M below -J");
    h_ = axis::assemble_axis_operator(profile_, grid_, model_.v0);
    w_theta_ = axis::on_contour(model_.V.w, profile_, grid_);
    for (auto& v : w_theta_) v *= model_.V.kappa;
    const double d3 = 0.5 * model_.V.delta_parallel;
    weight_.resize(w_theta_.size());
    for (std::size_t i = 0; i < weight_.size(); ++i) {
      const Complex p = profile_.phi(grid_.nodes[i]);
      weight_[i] = std::pow(1.0 + p * p, -0.5 * d3);
    }
    const landau::RadialProfile rp(model_.V.W, model_.b);
    for (int m = -trunc_.J; m <= trunc_.M; ++m) {
      Sector s;
      s.m = m;
      s.jmin = std::max(0, -m);
      s.nl = trunc_.J - s.jmin + 1;
      s.W = landau::level_coupling_matrix(rp, m, trunc_.J);
      sectors_.push_back(std::move(s));
    }
    // Discrete axis eigenvalues: theta = 0 bound states continued to theta.
    for (double e : axis::negative_eigenvalues(grid_, model_.v0)) {
      const auto bs = axis::refine_bound_state(grid_, model_.v0, e);
      bound_.push_back(bs);
      discrete_.push_back(axis::discrete_eigenvalue(h_, bs.lambda, &bs.psi));
    }
    v_sup_ = 0.0;
    for (const auto& v : w_theta_) v_sup_ = std::max(v_sup_, std::abs(v));
    v_sup_ *= model_.V.W.sup_abs();
  }

  [[nodiscard]] const ModelSpec& model() const { return model_; }
  [[nodiscard]] const axis::DistortionProfile& profile() const { return profile_; }
  [[nodiscard]] const axis::Grid1D& grid() const { return grid_; }
  [[nodiscard]] Truncation truncation() const { return trunc_; }
  [[nodiscard]] const std::vector<Sector>& sectors() const { return sectors_; }
  [[nodiscard]] const std::vector<Complex>& axis_discrete() const { return discrete_; }
  [[nodiscard]] const std::vector<axis::BoundState>& bound_states() const { return bound_; }
  [[nodiscard]] const linalg::BandedMatrix<Complex>& axis_matrix() const { return h_; }
  [[nodiscard]] const std::vector<Complex>& w_theta() const { return w_theta_; }
  [[nodiscard]] double v_sup() const { return v_sup_; }
  [[nodiscard]] int workers() const { return workers_; }

  [[nodiscard]] int sector_index(int m) const {
    const int i = m + trunc_.J;
    if (i < 0 || i >= static_cast<int>(sectors_.size()))
      throw ConfigError("angular momentum outside the truncation");
    return i;
  }

  /// Eigenvalues 2bj + lambda_k(theta) of the unperturbed sector operator.
  [[nodiscard]] std::vector<Complex> sector_poles(int idx) const {
    std::vector<Complex> p;
    const auto& s = sectors_[idx];
    for (int l = 0; l < s.nl; ++l)
      for (const auto& d : discrete_) p.push_back(2.0 * model_.b * (s.jmin + l) + d);
    return p;
  }

  /// Throws RayCollisionError when z is on some Gamma_{j,theta}, ConfigError
  /// when z hits a discrete eigenvalue of H0,theta, and ConfigError when the
  /// level tail bound fails.
  void check_point(Complex z) const {
    const Complex dir = profile_.ray_direction();
    for (int j = 0; j <= trunc_.J; ++j) {
      const double d = distance_to_ray(z, 2.0 * model_.b * j, dir);
      if (d < 1e-9 * (1.0 + std::abs(z)))
        throw RayCollisionError(j, "ray collision: z lies on Gamma_{" + std::to_string(j) +
                                       ",theta}");
    }
    for (int j = 0; j <= trunc_.J; ++j)
      for (const auto& d : discrete_)
        if (std::abs(z - (2.0 * model_.b * j + d)) < 1e-8)
          throw ConfigError("z coincides with a discrete eigenvalue of H0,theta at level " +
                            std::to_string(j));
    const double bound = tail_norm_bound(z);
    if (!(bound < 0.125))
      throw ConfigError("level tail bound " + std::to_string(bound) +
                        " >= 1/8: increase J");
  }

  /// ||V||_inf / dist(z, 2b(J+1) + min(lambda, 0) + ray).
  [[nodiscard]] double tail_norm_bound(Complex z) const {
    double lam = 0.0;
    for (const auto& d : discrete_) lam = std::min(lam, d.real());
    const double d = distance_to_ray(z, 2.0 * model_.b * (trunc_.J + 1) + lam,
                                     profile_.ray_direction());
    return v_sup_ / d;
  }

  /// Banded A_m = sum_j (H + 2bj) + V on the interleaved index i * nl + l.
  [[nodiscard]] linalg::BandedMatrix<Complex> sector_matrix(int idx, bool perturbed = true) const {
    const auto& s = sectors_[idx];
    const int n = grid_.n;
    const int nl = s.nl;
    linalg::BandedMatrix<Complex> a(n * nl, 2 * nl, 2 * nl);
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < nl; ++l) {
        const int r = i * nl + l;
        for (int k = std::max(0, i - 2); k <= std::min(n - 1, i + 2); ++k)
          a(r, k * nl + l) += h_(i, k);
        a(r, r) += 2.0 * model_.b * (s.jmin + l);
        if (perturbed)
          for (int l2 = 0; l2 < nl; ++l2) a(r, i * nl + l2) += s.W(l, l2) * w_theta_[i];
      }
    return a;
  }

  /// log det(H + 2bj - z), its z-derivative, tr w (H + 2bj - z)^-1 and
  /// tr w (H + 2bj - z)^-2 for one Landau level, from a single hyper-dual LU.
  struct LevelEval {
    Complex log_det{};
    Complex dlog_det{};
    Complex tr_w{};
    Complex tr_w_prime{};
  };

  [[nodiscard]] LevelEval evaluate_level(int j, Complex z) const {
    using linalg::HyperDual;
    auto h = h_.convert<HyperDual>([](Complex v) { return HyperDual{v}; });
    const Complex shift = 2.0 * model_.b * j - z;
    for (int i = 0; i < grid_.n; ++i) h(i, i) += HyperDual{shift, -1.0, w_theta_[i], 0.0};
    const HyperDual ld = linalg::BandedLU<HyperDual>(std::move(h)).log_det();
    return {ld.v, ld.d1, ld.d2, ld.d12};
  }

  /// log det(A_m - z) and its derivative from a dual-number LU.
  [[nodiscard]] SectorEval evaluate_perturbed(int idx, Complex z) const {
    using linalg::Dual;
    auto a = sector_matrix(idx).convert<Dual>([](Complex v) { return Dual{v}; });
    a.shift_diagonal(Dual{-z, -1.0});
    const linalg::BandedLU<Dual> lu(std::move(a));
    const Dual ld = lu.log_det();
    SectorEval e;
    e.log_det_a = ld.v;
    e.dlog_det_a = ld.d;
    e.pivot_ratio = lu.pivot_ratio();
    return e;
  }

  void add_levels(int idx, const std::vector<LevelEval>& levels, SectorEval& e) const {
    const auto& s = sectors_[idx];
    for (int l = 0; l < s.nl; ++l) {
      const auto& lv = levels[s.jmin + l];
      e.log_det_a0 += lv.log_det;
      e.dlog_det_a0 += lv.dlog_det;
      e.tr_t += s.W(l, l) * lv.tr_w;
      e.tr_t_prime += s.W(l, l) * lv.tr_w_prime;
    }
  }

  /// Logarithmic data of sector idx at z (no point checks).
  [[nodiscard]] SectorEval evaluate_sector(int idx, Complex z) const {
    const auto& s = sectors_[idx];
    std::vector<LevelEval> levels(static_cast<std::size_t>(trunc_.J + 1));
    for (int j = s.jmin; j <= trunc_.J; ++j) levels[j] = evaluate_level(j, z);
    SectorEval e = evaluate_perturbed(idx, z);
    add_levels(idx, levels, e);
    return e;
  }

  /// Sum over sectors.
  [[nodiscard]] Det2Eval evaluate(Complex z, bool check = true) const {
    if (check) check_point(z);
    Det2Eval out;
    const int nlev = trunc_.J + 1;
    const int ns = static_cast<int>(sectors_.size());
    std::vector<LevelEval> levels(static_cast<std::size_t>(nlev));
    out.sectors.resize(sectors_.size());
    parallel_for(nlev + ns, workers_, [&](int i) {
      if (i < nlev)
        levels[i] = evaluate_level(i, z);
      else
        out.sectors[i - nlev] = evaluate_perturbed(i - nlev, z);
    });
    for (int i = 0; i < ns; ++i) add_levels(i, levels, out.sectors[i]);
    for (const auto& e : out.sectors) {
      out.log_d2 += e.log_d2();
      out.dlog_d2 += e.dlog_d2();
      out.log_det_i_plus_t += e.log_det_i_plus_t();
      out.dlog_det_i_plus_t += e.dlog_det_i_plus_t();
      out.tr_t += e.tr_t;
      out.tr_t_prime += e.tr_t_prime;
      out.pivot_ratio = std::max(out.pivot_ratio, e.pivot_ratio);
    }
    return out;
  }

  /// d/dz log det_2(I + T(z)); throws when I + T is numerically singular.
  [[nodiscard]] Complex log_derivative(Complex z) const {
    const auto e = evaluate(z);
    if (e.pivot_ratio > 1e12)
      throw NumericalError("near-singular I + T (condition proxy " +
                           std::to_string(e.pivot_ratio) + "): refine the contour");
    return e.dlog_d2;
  }

  /// Dense truncated T for one sector: V (A0 - z)^-1 or the sandwiched
  /// S_L (A0 - z)^-1 S_R with W^1/2 and <phi>^-delta3 weights on both sides.
  [[nodiscard]] Eigen::MatrixXcd assemble_T(int idx, Complex z, Form form,
                                            bool check = true) const {
    if (check) check_point(z);
    const auto& s = sectors_[idx];
    const int n = grid_.n;
    const int nl = s.nl;
    const int N = n * nl;
    if (N > 4000) throw ConfigError("dense T assembly limited to size 4000");
    // Resolvent columns one level at a time.
    std::vector<Eigen::MatrixXcd> r0(static_cast<std::size_t>(nl));
    for (int l = 0; l < nl; ++l) {
      auto h = h_;
      h.shift_diagonal(2.0 * model_.b * (s.jmin + l) - z);
      const linalg::BandedLU<Complex> lu(std::move(h));
      r0[l].resize(n, n);
      for (int c = 0; c < n; ++c) {
        std::vector<Complex> e(static_cast<std::size_t>(n), Complex{});
        e[c] = 1.0;
        const auto x = lu.solve(std::move(e));
        for (int i = 0; i < n; ++i) r0[l](i, c) = x[i];
      }
    }
    Eigen::MatrixXcd t(N, N);
    if (form == Form::unsandwiched) {
      for (int i = 0; i < n; ++i)
        for (int l = 0; l < nl; ++l)
          for (int l2 = 0; l2 < nl; ++l2) {
            const Complex c = s.W(l, l2) * w_theta_[i];
            for (int k = 0; k < n; ++k) t(i * nl + l, k * nl + l2) = c * r0[l2](i, k);
          }
      return t;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.W);
    const Eigen::MatrixXd sq = es.eigenvectors() *
                               es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                               es.eigenvectors().transpose();
    for (int i = 0; i < n; ++i) {
      const Complex left = w_theta_[i] / weight_[i];  // kappa M a with M = w / a^2
      for (int l = 0; l < nl; ++l)
        for (int k = 0; k < n; ++k) {
          const Complex right = weight_[k];
          for (int l2 = 0; l2 < nl; ++l2) {
            Complex acc{};
            for (int l3 = 0; l3 < nl; ++l3) acc += sq(l, l3) * r0[l3](i, k) * sq(l3, l2);
            t(i * nl + l, k * nl + l2) = left * acc * right;
          }
        }
    }
    return t;
  }

 private:
  ModelSpec model_;
  axis::DistortionProfile profile_;
  axis::Grid1D grid_;
  Truncation trunc_;
  int workers_ = 1;
  linalg::BandedMatrix<Complex> h_;
  std::vector<Complex> w_theta_;
  std::vector<Complex> weight_;
  std::vector<Sector> sectors_;
  std::vector<Complex> discrete_;
  std::vector<axis::BoundState> bound_;
  double v_sup_ = 0.0;
};

/// |f_x + i f_y| / |f_x| by centred differences: zero for holomorphic f.
template <class F>
double cauchy_riemann_residual(F&& f, Complex z, double h = 1e-5) {
  const Complex fx = (f(z + h) - f(z - h)) / (2.0 * h);
  const Complex fy = (f(z + Complex{0.0, h}) - f(z - Complex{0.0, h})) / (2.0 * h);
  return std::abs(fx + kI * fy) / std::abs(fx);
}

}  // namespace magres::bs
