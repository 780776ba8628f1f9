// Copyright 2026 The magres Authors
// SPDX-License-Identifier: Apache-2.0
#include <Eigen/SVD>
#include <gtest/gtest.h>

#include "magres/birman_schwinger.hpp"

namespace {

using namespace magres;

bs::ModelSpec model(double kappa) {
  bs::ModelSpec ms;
  ms.b = 2.0;
  ms.v0 = {axis::Family::poschl_teller, -2.0, 1.0};
  ms.V.W = {landau::TransverseFamily::gaussian, 1.0, 1.0};
  ms.V.w = {axis::Family::poschl_teller, 1.0, 1.0};
  ms.V.kappa = kappa;
  return ms;
}

bs::Engine small_engine(double kappa, Complex theta, int n = 100) {
  return {model(kappa), axis::build_distortion(3.0, 7.0, theta), axis::make_grid(12.0, n),
          {2, 3}};
}

Complex wrap(Complex z) { return {z.real(), wrap_angle(z.imag())}; }

TEST(BirmanSchwinger, ZeroPerturbationGivesOne) {
  const auto e = small_engine(0.0, {0.0, 0.1});
  const Complex z{3.1, 0.05};
  const auto v = e.evaluate(z);
  EXPECT_LT(std::abs(v.log_d2), 1e-12);
  EXPECT_LT(std::abs(v.dlog_d2), 1e-12);
  const auto d = bs::det2(e.assemble_T(e.sector_index(0), z, bs::Form::unsandwiched));
  EXPECT_LT(std::abs(d.value - 1.0), 1e-12);
}

TEST(BirmanSchwinger, SandwichedNormSmallFarFromSpectrum) {
  const auto e = small_engine(0.1, {0.0, 0.1});
  const Complex z{4.0, 1000.0};
  for (int m : {-2, 0, 3}) {
    const auto t = e.assemble_T(e.sector_index(m), z, bs::Form::sandwiched);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(t);
    EXPECT_LE(svd.singularValues()(0), 1e-2) << "m=" << m;
  }
}

TEST(BirmanSchwinger, SchwarzReflectionAtZeroTheta) {
  const auto e = small_engine(0.1, 0.0);
  for (Complex z : {Complex{3.02, 0.01}, Complex{1.5, 0.3}, Complex{-0.5, 0.2}}) {
    const Complex a = e.evaluate(z).log_d2;
    const Complex b = e.evaluate(std::conj(z)).log_d2;
    EXPECT_LT(std::abs(std::exp(a) - std::conj(std::exp(b))), 1e-10 * std::abs(std::exp(a)));
  }
}

TEST(BirmanSchwinger, CyclicityOfSandwichedForm) {
  const auto e = small_engine(0.1, {0.0, 0.1});
  for (Complex z : {Complex{3.02, 0.01}, Complex{2.0, -0.05}}) {
    for (int m : {-1, 0, 2}) {
      const auto idx = e.sector_index(m);
      const auto u = bs::det2(e.assemble_T(idx, z, bs::Form::unsandwiched));
      const auto s = bs::det2(e.assemble_T(idx, z, bs::Form::sandwiched));
      EXPECT_LT(std::abs(u.value - s.value), 1e-8 * std::abs(u.value)) << "m=" << m;
    }
  }
}

TEST(BirmanSchwinger, FastRouteMatchesDenseDeterminants) {
  const auto e = small_engine(0.1, {0.0, 0.1});
  const Complex z{3.01, 0.002};
  for (int m : {-2, 0, 1, 3}) {
    const auto idx = e.sector_index(m);
    const auto t = e.assemble_T(idx, z, bs::Form::unsandwiched);
    const auto fast = e.evaluate_sector(idx, z);
    const auto d = bs::det2(t);
    const Complex dense_log{d.log_abs, d.arg_branch};
    EXPECT_LT(std::abs(wrap(fast.log_d2() - dense_log)), 1e-9) << "m=" << m;
    EXPECT_LT(std::abs(bs::det_times_exp_trace(t) - d.value), 1e-10 * std::abs(d.value));
    EXPECT_LT(std::abs(fast.tr_t - t.trace()), 1e-10 * (1.0 + std::abs(fast.tr_t)));
  }
}

TEST(BirmanSchwinger, TraceDerivativeMatchesDense) {
  const auto e = small_engine(0.1, {0.0, 0.1});
  const Complex z{2.5, 0.1};
  const double h = 1e-5;
  const int idx = e.sector_index(1);
  const Complex fd = (e.assemble_T(idx, z + h, bs::Form::unsandwiched).trace() -
                      e.assemble_T(idx, z - h, bs::Form::unsandwiched).trace()) /
                     (2.0 * h);
  EXPECT_LT(std::abs(e.evaluate_sector(idx, z).tr_t_prime - fd), 1e-6 * std::abs(fd));
}

TEST(BirmanSchwinger, LogDerivativeMatchesFiniteDifference) {
  const auto e = small_engine(0.1, {0.0, 0.1}, 200);
  for (Complex z : {Complex{3.02, 0.01}, Complex{3.0, -0.02}, Complex{2.99, 0.005}}) {
    const double h = 1e-6;
    const Complex fd = (wrap(e.evaluate(z + h).log_d2 - e.evaluate(z - h).log_d2)) / (2.0 * h);
    const Complex ad = e.log_derivative(z);
    EXPECT_LT(std::abs(ad - fd), 1e-4 * std::abs(ad)) << z;
  }
}

TEST(BirmanSchwinger, HolomorphicOffTheRays) {
  const auto e = small_engine(0.1, {0.0, 0.1});
  auto f = [&](Complex z) { return e.evaluate(z).dlog_d2; };
  EXPECT_LT(bs::cauchy_riemann_residual(f, {2.4, 0.1}), 1e-5);
}

TEST(BirmanSchwinger, ContourIntegralVanishesWithoutZeros) {
  const auto e = small_engine(0.1, {0.0, 0.1});
  const Complex c{1.5, 0.3};
  const double r = 0.2;
  const int n = 64;
  Complex acc{};
  for (int k = 0; k < n; ++k) {
    const Complex u = std::exp(kI * (2.0 * kPi * k / n));
    acc += e.evaluate(c + r * u).dlog_d2 * r * u * kI * (2.0 * kPi / n);
  }
  EXPECT_LT(std::abs(acc / (2.0 * kPi * kI)), 1e-8);
}

TEST(BirmanSchwinger, IndependentOfThetaInTheCommonDomain) {
  const Complex z{3.05, 0.05};
  auto engine = [](Complex theta) {
    return bs::Engine(model(0.1), axis::build_distortion(6.0, 14.0, theta),
                      axis::make_grid(40.0, 800), {2, 1});
  };
  const auto a = engine({0.0, 0.1}).evaluate(z);
  const auto b = engine({0.0, 0.18}).evaluate(z);
  EXPECT_LT(std::abs(std::exp(a.log_d2) - std::exp(b.log_d2)), 1e-6);
  EXPECT_LT(std::abs(a.dlog_d2 - b.dlog_d2), 1e-5 * std::abs(a.dlog_d2));
}

TEST(BirmanSchwinger, RayCollisionCarriesLevel) {
  const auto e = small_engine(0.1, {0.0, 0.1});
  const Complex z = 4.0 + 0.5 * e.profile().ray_direction();
  try {
    (void)e.evaluate(z);
    FAIL() << "expected RayCollisionError";
  } catch (const RayCollisionError& err) {
    EXPECT_EQ(err.level(), 1);
  }
}

TEST(BirmanSchwinger, DiscreteEigenvalueIsRejected) {
  const auto e = small_engine(0.1, {0.0, 0.1});
  const Complex z = 4.0 + e.axis_discrete().front();
  EXPECT_THROW((void)e.evaluate(z), ConfigError);
}

TEST(BirmanSchwinger, TailBoundRequestsMoreLevels) {
  auto ms = model(0.1);
  ms.V.kappa = 5.0;
  const bs::Engine e(ms, axis::build_distortion(3.0, 7.0, {0.0, 0.1}), axis::make_grid(12.0, 100),
                     {0, 2});
  try {
    (void)e.evaluate({3.0, 0.2});
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& err) {
    EXPECT_NE(std::string(err.what()).find("increase J"), std::string::npos);
  }
}

TEST(BirmanSchwinger, PolesAreLandauShiftedBoundStates) {
  const auto e = small_engine(0.1, {0.0, 0.1});
  ASSERT_EQ(e.axis_discrete().size(), 1u);
  const auto p = e.sector_poles(e.sector_index(1));
  ASSERT_EQ(p.size(), 3u);
  EXPECT_NEAR(p[1].real(), 4.0 + e.axis_discrete().front().real(), 1e-12);
}

}  // namespace
