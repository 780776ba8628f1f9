// Copyright 2026 The magres Authors
// SPDX-License-Identifier: Apache-2.0
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "magres/resonances.hpp"
#include "magres/ssf.hpp"
#include "models.hpp"

namespace {

using namespace magres;
using testing::weak_coupling_engine;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;
std::string filter;

void report(const char* name, const std::function<Outcome()>& check) {
  if (!filter.empty() && std::string(name).find(filter) == std::string::npos) return;
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), s);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

const bs::Engine& weak_engine() {
  static const bs::Engine e = weak_coupling_engine(0.1, {0.0, 0.1}, 600, 2, 8);
  return e;
}

double center() { return 4.0 + weak_engine().bound_states().front().lambda; }

const res::ResonanceSet& weak_set() {
  static const res::ResonanceSet s =
      res::find_resonances(weak_engine(), res::SearchRegion::disc(center(), 0.3, 1));
  return s;
}

const axis::AxisFunction kPoschlTeller{axis::Family::poschl_teller, -2.0, 1.0};
const landau::TransversePotential kGaussian{landau::TransverseFamily::gaussian, 1.0, 1.0};

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> r;
  for (int k = 0; k < n; ++k)
    r.push_back(std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * k / (n - 1)));
  return r;
}

Outcome ray_rotation() {
  const Complex theta{0.0, 0.2};
  const auto p = axis::build_distortion(1.0, 2.0, theta, axis::ProfileShape::pure_dilation);
  const auto s = axis::axis_spectrum(p, axis::make_grid(40.0, 1024), axis::AxisFunction{});
  const Complex dir = 1.0 / ((1.0 + theta) * (1.0 + theta));
  const Complex u = dir / std::abs(dir);
  int on = 0;
  for (const auto& z : s.eigenvalues) {
    const double t = std::max(0.0, (z * std::conj(u)).real());
    if (std::abs(z - t * u) <= 1e-3 * (1.0 + std::abs(z))) ++on;
  }
  const double frac = static_cast<double>(on) / static_cast<double>(s.eigenvalues.size());
  return {frac >= 0.99, fmt("%.4f of %.0f eigenvalues on the ray", frac,
                            static_cast<double>(s.eigenvalues.size()))};
}

Outcome bound_state() {
  const auto g = axis::make_grid(20.0, 2000);
  const auto bs = axis::bound_state(g, kPoschlTeller);
  const auto at = [&](Complex theta) {
    const auto m = axis::assemble_axis_operator(axis::build_distortion(6.0, 14.0, theta), g,
                                                kPoschlTeller);
    return axis::discrete_eigenvalue(m, bs.lambda, &bs.psi);
  };
  const double err = std::abs(bs.lambda + 1.0);
  const double drift = std::abs(at({0.0, 0.15}) - at(0.0));
  return {err < 1e-6 && drift < 1e-8, fmt("|lambda + 1| = %.2e, drift = %.2e", err, drift)};
}

Outcome det2_identities() {
  std::mt19937 gen(2026);
  std::normal_distribution<double> nd(0.0, 1.0 / std::sqrt(20.0));
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    Eigen::MatrixXcd a(20, 20);
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j) a(i, j) = {nd(gen), nd(gen)};
    const Complex d = bs::det2(a).value;
    const Complex ref = bs::det_times_exp_trace(a);
    worst = std::max(worst, std::abs(d - ref) / std::abs(ref));
  }
  double rank1 = 0.0;
  for (int k = 0; k < 10; ++k) {
    Eigen::VectorXcd u(20);
    Eigen::VectorXcd v(20);
    for (int i = 0; i < 20; ++i) {
      u(i) = {nd(gen), nd(gen)};
      v(i) = {nd(gen), nd(gen)};
    }
    const Complex s = v.dot(u);
    const Complex exact = (1.0 + s) * std::exp(-s);
    const Eigen::MatrixXcd a = u * v.adjoint();
    rank1 = std::max(rank1, std::abs(bs::det2(a).value - exact) / std::abs(exact));
  }
  return {worst < 1e-10 && rank1 < 1e-12,
          fmt("random max rel = %.2e, rank-1 max rel = %.2e", worst, rank1)};
}

Outcome toeplitz_closed_form() {
  const auto s = landau::toeplitz_eigenvalues(0, kGaussian, 2.0, 40);
  double worst = 0.0;
  for (int m = 0; m <= 20; ++m)
    worst = std::max(worst, std::abs(s.by_m[m] - std::ldexp(1.0, -(m + 1))));
  const int n = landau::counting_function(0.1, s).count;
  return {worst < 1e-10 && n == 3, fmt("max |mu - 2^-(m+1)| = %.2e, n+(0.1) = %.0f", worst, n)};
}

Outcome counting_asymptotics() {
  std::string detail;
  bool ok = true;
  const auto grid = log_grid(1e-6, 1e-2, 41);
  for (double alpha : {3.0, 4.0}) {
    const landau::TransversePotential p{landau::TransverseFamily::power_law, 1.0, 1.0, alpha};
    const auto s = landau::toeplitz_adaptive(0, p, 2.0, 1e-6);
    const auto f = landau::fit_counting_asymptotics(landau::AsymptoticLaw::power_law, s, grid);
    const double rel = std::abs(f.slope - 2.0 / alpha) / (2.0 / alpha);
    ok = ok && rel < 0.1;
    detail += fmt("alpha %.0f slope %.4f (rel %.3f); ", alpha, f.slope, rel);
  }
  const auto s = landau::toeplitz_adaptive(0, kGaussian, 2.0, 1e-6);
  const auto f = landau::fit_counting_asymptotics(landau::AsymptoticLaw::gaussian, s, grid);
  ok = ok && f.residual < 0.05;
  detail += fmt("gaussian linear fit residual %.4f", f.residual);
  return {ok, detail};
}

Outcome bq_equals_toeplitz() {
  const auto s = landau::toeplitz_eigenvalues(1, kGaussian, 2.0, 30);
  const auto bq = landau::realize_bq(1, kGaussian, 2.0, 30);
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> u(std::log(1e-8), std::log(0.3));
  int checked = 0;
  int equal = 0;
  while (checked < 20) {
    const double r = std::exp(u(gen));
    if (landau::counting_function(r, s).near_crossing) continue;
    ++checked;
    if (landau::count_above(bq, r) == landau::counting_function(r, s).count) ++equal;
  }
  return {equal == 20, fmt("%.0f of %.0f radii give equal counts", equal, checked)};
}

Outcome oracle_equivalence() {
  const auto& e = weak_engine();
  const auto region = res::SearchRegion::disc(center(), 0.3, 1);
  const auto count = res::count_zeros_contour(e, region);
  const auto direct = res::direct_eigenvalues(e, region);
  const auto& set = weak_set();
  int mult = 0;
  for (const auto& r : set.items) mult += r.multiplicity;
  std::vector<bool> used(direct.size(), false);
  double worst = 0.0;
  bool paired = true;
  for (const auto& r : set.items) {
    for (int k = 0; k < r.multiplicity; ++k) {
      int best = -1;
      for (std::size_t j = 0; j < direct.size(); ++j)
        if (!used[j] && direct[j].m == r.m &&
            (best < 0 || std::abs(direct[j].z - r.z) < std::abs(direct[best].z - r.z)))
          best = static_cast<int>(j);
      if (best < 0) {
        paired = false;
        continue;
      }
      used[best] = true;
      worst = std::max(worst, std::abs(direct[best].z - r.z));
    }
  }
  const bool ok = paired && mult == static_cast<int>(direct.size()) && count.total == mult &&
                  worst < 1e-6;
  std::ostringstream os;
  os << set.items.size() << " zeros (multiplicity " << mult << "), " << direct.size()
     << " direct eigenvalues, winding " << count.total << ", max distance " << fmt("%.2e", worst);
  return {ok, os.str()};
}

Outcome theta_independence() {
  const auto& a = weak_set();
  const auto e = weak_coupling_engine(0.1, {0.0, 0.18}, 600, 2, 8);
  const auto b = res::find_resonances(e, res::SearchRegion::disc(center(), 0.3, 1));
  if (a.items.size() != b.items.size())
    return {false, fmt("%.0f vs %.0f resonances", a.items.size(), b.items.size())};
  double worst = 0.0;
  std::vector<bool> used(b.items.size(), false);
  for (const auto& x : a.items) {
    int best = -1;
    for (std::size_t j = 0; j < b.items.size(); ++j)
      if (!used[j] && (best < 0 || std::abs(b.items[j].z - x.z) < std::abs(b.items[best].z - x.z)))
        best = static_cast<int>(j);
    used[best] = true;
    worst = std::max(worst, std::abs(b.items[best].z - x.z) / (1.0 + std::abs(x.z)));
  }
  return {worst < 1e-6, fmt("%.0f resonances, max relative distance %.2e",
                            static_cast<double>(a.items.size()), worst)};
}

Outcome perturbative_placement() {
  double worst = 0.0;
  for (const auto& r : weak_set().items)
    worst = std::max(worst, std::abs(r.z - res::perturbative_position(weak_engine(), 1, r.m)));
  return {!weak_set().items.empty() && worst < 5e-3,
          fmt("%.0f resonances, max distance %.2e", weak_set().items.size(), worst)};
}

Outcome breit_wigner() {
  const auto d = ssf::breit_wigner_reconstruct(weak_engine(), 1, 0.0065, weak_set());
  double peak = 0.0;
  for (const auto& p : d.peaks) peak = std::max(peak, p.relative_error);
  return {d.residual < 0.1 && !d.peaks.empty() && peak < 0.05,
          fmt("residual %.2e, %.0f peaks, max peak error %.2e", d.residual,
              static_cast<double>(d.peaks.size()), peak)};
}

Outcome trace_formula() {
  const auto& e = weak_engine();
  const double c = center();
  const std::vector<double> radii{0.2, 0.1, 0.05};
  const ssf::Window win;
  const auto grid = e.grid();
  const ssf::BoxAverage box{100.0, 24.0, 48, grid.h};
  ssf::BoxAverage refined_box = box;
  refined_box.L0 *= 1.5;
  const double lo = c + radii.back() * (win.mid - win.outer);
  const double hi = c + radii.front() * (win.mid + win.outer);
  const auto base = ssf::window_spectrum(e.model(), e.truncation(), lo, hi, box);
  const auto refined = ssf::window_spectrum(e.model(), e.truncation(), lo, hi, refined_box);
  const auto env = landau::toeplitz_adaptive(1, e.model().V.W.scaled(0.1), 2.0, 1e-6 * radii.back());
  std::vector<res::ResonanceSet> sets;
  for (double r : radii)
    sets.push_back(res::find_resonances(
        e, res::SearchRegion::disc(c + r * win.mid, 1.05 * r * win.inner, 1)));
  bool ok = true;
  std::string detail;
  for (const auto& f : {ssf::polynomial({1.0}), ssf::polynomial({0.0, 1.0}),
                        ssf::polynomial({0.0, 0.0, 1.0})}) {
    std::vector<double> ratio;
    for (std::size_t i = 0; i < radii.size(); ++i)
      ratio.push_back(
          ssf::trace_formula_check(base, refined, c, radii[i], f, sets[i], env).bound_ratio);
    double factor = 0.0;
    const bool trend_ok = res::no_growth_trend(radii, ratio, &factor);
    ok = ok && trend_ok;
    detail += f.name + fmt(" ratios %.2e %.2e %.2e", ratio[0], ratio[1], ratio[2]) +
              fmt(" factor %.3f; ", factor);
  }
  return {ok, detail};
}

Outcome upper_bound_envelope() {
  const auto& e = weak_engine();
  const auto env = landau::toeplitz_eigenvalues(1, e.model().V.W.scaled(0.1), 2.0, 40);
  const std::vector<double> radii{0.0045, 0.00225, 0.001125};
  const auto rows = res::annulus_count_experiment(e, 1, radii, env);
  std::vector<double> ratio;
  std::string detail;
  for (const auto& row : rows) {
    if (row.skipped) return {false, "annulus at r = " + fmt("%.3g", row.r) + " skipped"};
    ratio.push_back(row.ratio);
    detail += fmt("r %.3g count %.0f ratio %.3f; ", row.r, row.count, row.ratio);
  }
  double factor = 0.0;
  const bool ok = res::no_growth_trend(radii, ratio, &factor);
  return {ok, detail + fmt("factor %.3f", factor)};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) filter = argv[1];
  report("ray rotation", ray_rotation);
  report("bound state", bound_state);
  report("det2 identities", det2_identities);
  report("Toeplitz closed form", toeplitz_closed_form);
  report("counting asymptotics", counting_asymptotics);
  report("n+(r, B_q) = n+(r, p_q W p_q)", bq_equals_toeplitz);
  report("oracle equivalence", oracle_equivalence);
  report("theta independence", theta_independence);
  report("perturbative placement", perturbative_placement);
  report("Breit-Wigner reconstruction", breit_wigner);
  report("trace formula", trace_formula);
  report("upper-bound envelope", upper_bound_envelope);
  return failures == 0 ? 0 : 1;
}
