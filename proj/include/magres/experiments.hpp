// Copyright 2026 The magres Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "magres/axis1d.hpp"
#include "magres/birman_schwinger.hpp"
#include "magres/common.hpp"
#include "magres/config.hpp"
#include "magres/landau.hpp"
#include "magres/resonances.hpp"
#include "magres/ssf.hpp"

#ifndef MAGRES_VERSION
#define MAGRES_VERSION "unknown"
#endif

namespace magres::run {

using Json = nlohmann::json;

/// Scientific notation with 17 significant digits, independent of locale.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, 16);
  return {buf, r.ptr};
}

/// One CSV cell.
struct Cell {
  std::string text;
  Cell(double v) : text(format_double(v)) {}            // NOLINT
  Cell(int v) : text(std::to_string(v)) {}              // NOLINT
  Cell(std::string v) : text(std::move(v)) {}           // NOLINT
  Cell(const char* v) : text(v) {}                      // NOLINT
};

using Row = std::vector<Cell>;

/// Files written by one run; removed again when the run fails.
class Artifacts {
 public:
  explicit Artifacts(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  void write_csv(const std::string& name, const std::vector<std::string>& header,
                 const std::vector<Row>& rows) {
    std::string s;
    for (std::size_t i = 0; i < header.size(); ++i) s += (i ? "," : "") + header[i];
    s += "\n";
    for (const auto& row : rows) {
      if (row.size() != header.size()) throw Error("CSV row width mismatch in " + name);
      for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + row[i].text;
      s += "\n";
    }
    write_text(name, s);
  }

  void write_text(const std::string& name, const std::string& text) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    files_.push_back(name);
  }

  void remove_all() {
    std::error_code ec;
    for (const auto& f : files_) std::filesystem::remove(dir_ / f, ec);
    files_.clear();
  }

  [[nodiscard]] const std::vector<std::string>& files() const { return files_; }
  [[nodiscard]] const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

struct RunManifest {
  Json config;
  std::string code_version = MAGRES_VERSION;
  std::string experiment;
  std::vector<std::string> outputs;
  Json diagnostics = Json::object();
  double wall_clock = 0.0;

  [[nodiscard]] Json to_json() const {
    return {{"config", config},       {"code_version", code_version},
            {"experiment", experiment}, {"outputs", outputs},
            {"diagnostics", diagnostics}, {"wall_clock_seconds", wall_clock}};
  }
};

inline Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

namespace detail {

inline axis::DistortionProfile profile(const config::RunConfig& c, Complex theta) {
  return axis::build_distortion(c.R0, c.K, theta, c.shape);
}

inline bs::Engine engine(const config::RunConfig& c, Complex theta, int workers) {
  return {c.model(), profile(c, theta), axis::make_grid(c.L, c.n), c.trunc, workers};
}

inline double embedded_center(const config::RunConfig& c, const bs::Engine& e) {
  if (e.bound_states().empty()) throw ConfigError("no embedded eigenvalue: v0 has no bound state");
  return 2.0 * c.b * c.q + e.bound_states().front().lambda;
}

inline void bound_state_diagnostics(const bs::Engine& e, Json& diag) {
  Json l = Json::array();
  for (const auto& b : e.bound_states()) l.push_back(b.lambda);
  diag["bound_states"] = l;
  diag["multiple_bound_states"] = e.bound_states().size() > 1;
}

inline res::SearchRegion region(const config::RunConfig& c, double center) {
  const Complex z = c.region.auto_center ? Complex{center, 0.0} : c.region.center;
  if (c.region.shape == "annulus") return res::SearchRegion::annulus(z, c.region.radius, c.q);
  if (c.region.shape == "box") return res::SearchRegion::box(c.region.lo, c.region.hi, c.q);
  return res::SearchRegion::disc(z, c.region.radius, c.q);
}

inline std::vector<Row> resonance_rows(const res::ResonanceSet& set, Complex theta) {
  std::vector<Row> rows;
  for (const auto& r : set.items)
    rows.push_back({theta.real(), theta.imag(), r.m, r.z.real(), r.z.imag(), r.multiplicity,
                    r.newton_residual, res::source_name(r.source)});
  return rows;
}

const std::vector<std::string> kResonanceHeader{"theta_re", "theta_im", "m", "re", "im",
                                                "multiplicity", "residual", "source"};

inline void spectrum_map(const config::RunConfig& c, Artifacts& out, Json& diag) {
  std::vector<Row> eig;
  std::vector<Row> features;
  const auto grid = axis::make_grid(c.L, c.n);
  const auto neg = axis::negative_eigenvalues(grid, c.v0);
  std::vector<double> lambdas;
  for (double e : neg) lambdas.push_back(axis::refine_bound_state(grid, c.v0, e).lambda);
  Json per_theta = Json::array();
  for (const auto& th : c.theta) {
    const auto p = profile(c, th);
    const auto s = axis::axis_spectrum(p, grid, c.v0, c.ray_tolerance);
    for (const auto& z : s.on_ray) eig.push_back({th.real(), th.imag(), z.real(), z.imag(), "ray"});
    for (const auto& z : s.discrete)
      eig.push_back({th.real(), th.imag(), z.real(), z.imag(), "discrete"});
    const Complex dir = p.ray_direction();
    for (int j = 0; j <= c.trunc.J; ++j) {
      features.push_back({th.real(), th.imag(), "ray", j, 2.0 * c.b * j, 0.0, dir.real(), dir.imag()});
      for (double l : lambdas)
        features.push_back({th.real(), th.imag(), "embedded", j, 2.0 * c.b * j + l, 0.0, 0.0, 0.0});
    }
    const double frac = s.eigenvalues.empty()
                            ? 0.0
                            : static_cast<double>(s.on_ray.size()) / s.eigenvalues.size();
    per_theta.push_back({{"theta", complex_json(th)},
                         {"eigenvalues", s.eigenvalues.size()},
                         {"on_ray", s.on_ray.size()},
                         {"discrete", s.discrete.size()},
                         {"on_ray_fraction", frac}});
  }
  out.write_csv("spectrum.csv", {"theta_re", "theta_im", "re", "im", "kind"}, eig);
  out.write_csv("features.csv",
                {"theta_re", "theta_im", "kind", "level", "re", "im", "dir_re", "dir_im"}, features);
  diag["per_theta"] = per_theta;
  diag["bound_states"] = lambdas;
}

inline void resonance_search(const config::RunConfig& c, int workers, Artifacts& out, Json& diag) {
  std::vector<Row> rows;
  std::vector<res::ResonanceSet> sets;
  Json per_theta = Json::array();
  for (const auto& th : c.theta) {
    const auto e = engine(c, th, workers);
    const double center = embedded_center(c, e);
    bound_state_diagnostics(e, diag);
    const auto reg = region(c, center);
    auto set = res::find_resonances(e, reg);
    for (auto& r : set.items) r.theta_used = th;
    const auto more = resonance_rows(set, th);
    rows.insert(rows.end(), more.begin(), more.end());
    per_theta.push_back({{"theta", complex_json(th)},
                         {"center", center},
                         {"total_count", set.total_count},
                         {"winding_d2", set.winding_d2},
                         {"unperturbed", set.unperturbed.size()},
                         {"unresolved", set.unresolved.size()}});
    sets.push_back(std::move(set));
  }
  out.write_csv("resonances.csv", kResonanceHeader, rows);
  diag["per_theta"] = per_theta;
  diag["zero_count"] = sets.front().total_count == 0;
  if (sets.front().total_count == 0) diag["note"] = "no resonances in the region";
  if (sets.size() > 1) {
    double worst = 0.0;
    for (std::size_t i = 1; i < sets.size(); ++i)
      worst = std::max(worst, res::match_distance(sets.front(), sets[i]));
    diag["theta_stability"] = worst;
  }
}

inline landau::AsymptoticLaw law_for(const landau::TransversePotential& w) {
  switch (w.family) {
    case landau::TransverseFamily::power_law: return landau::AsymptoticLaw::power_law;
    case landau::TransverseFamily::compact_support: return landau::AsymptoticLaw::compact_support;
    default: return landau::AsymptoticLaw::gaussian;
  }
}

inline void counting(const config::RunConfig& c, Artifacts& out, Json& diag) {
  const auto s = landau::toeplitz_adaptive(c.q, c.W, c.b, c.counting.r_min / c.nu);
  std::vector<Row> tp;
  for (int m = s.m_min; m <= s.m_max(); ++m) tp.push_back({c.q, m, s.at(m)});
  out.write_csv("toeplitz.csv", {"q", "m", "mu"}, tp);
  std::vector<double> grid;
  const int n = c.counting.points;
  for (int i = 0; i < n; ++i)
    grid.push_back(c.counting.r_max *
                   std::pow(c.counting.r_min / c.counting.r_max, static_cast<double>(i) / (n - 1)));
  std::vector<Row> rows;
  for (double r : grid) {
    const auto k = landau::counting_function(r, s, c.nu);
    rows.push_back({r, k.count, k.near_crossing ? 1 : 0});
  }
  out.write_csv("counting.csv", {"r", "n_plus", "near_crossing"}, rows);
  const auto law = law_for(c.W);
  const auto fit = landau::fit_counting_asymptotics(law, s, grid, c.nu);
  diag["law"] = law == landau::AsymptoticLaw::power_law  ? "power_law"
                : law == landau::AsymptoticLaw::gaussian ? "gaussian"
                                                         : "compact_support";
  diag["slope"] = fit.slope;
  diag["intercept"] = fit.intercept;
  diag["residual"] = fit.residual;
  diag["log_slope"] = fit.log_slope;
  diag["points"] = fit.points;
  diag["m_max"] = s.m_max();
  if (law == landau::AsymptoticLaw::power_law) diag["expected_slope"] = 2.0 / c.W.alpha;
}

inline void ssf_window(const config::RunConfig& c, int workers, Artifacts& out, Json& diag) {
  const Complex th = c.theta.front();
  const auto e = engine(c, th, workers);
  const double center = embedded_center(c, e);
  bound_state_diagnostics(e, diag);
  const double r = c.ssf.r;
  ssf::BWOptions opt;
  opt.degree = c.ssf.degree;
  opt.epsilons = c.ssf.epsilons;
  const auto& win = opt.window;
  const auto set = res::find_resonances(
      e, res::SearchRegion::disc(center + r * win.mid, 1.05 * r * win.outer, c.q));
  out.write_csv("resonances.csv", kResonanceHeader, resonance_rows(set, th));
  const auto d = ssf::breit_wigner_reconstruct(e, c.q, r, set, opt);
  std::vector<Row> rows;
  for (const auto& s : d.samples)
    rows.push_back({s.mu, s.xi2_prime, s.xi_prime, s.lorentzian, s.background, s.residual});
  out.write_csv("ssf.csv", {"mu", "xi2_prime", "xi_prime", "lorentzian", "background", "residual"},
                rows);
  Json peaks = Json::array();
  for (const auto& p : d.peaks)
    peaks.push_back({{"w", complex_json(p.w)},
                     {"expected", p.expected},
                     {"lorentzian_height", p.lorentzian_height},
                     {"sampled_height", p.sampled_height},
                     {"relative_error", p.relative_error}});
  Json res_used = Json::array();
  for (const auto& w : d.resonances) res_used.push_back(complex_json(w));
  Json summary = {{"q", c.q},
                  {"r", r},
                  {"center", center},
                  {"interval_t", {win.lo(), win.hi()}},
                  {"interval_mu", {center + r * win.lo(), center + r * win.hi()}},
                  {"omega", {{"center", win.mid}, {"radius", win.outer}}},
                  {"omega_tilde", {{"center", win.mid}, {"radius", win.inner}}},
                  {"epsilons", d.epsilons},
                  {"background_degree", c.ssf.degree},
                  {"background", d.background},
                  {"resonances", res_used},
                  {"delta_locations", d.delta_locations},
                  {"residual", d.residual},
                  {"direct_fit_residual", d.direct_fit_residual},
                  {"xi_norm", d.xi_norm},
                  {"peaks", peaks},
                  {"thresholds", {{"residual", 0.1}, {"peak_height", 0.05}}}};
  out.write_text("bw.json", summary.dump(2) + "\n");
  diag["residual"] = d.residual;
  diag["peaks"] = d.peaks.size();

  if (c.ssf.trace_r.empty()) return;
  double rmin = c.ssf.trace_r.front();
  double rmax = rmin;
  for (double x : c.ssf.trace_r) {
    rmin = std::min(rmin, x);
    rmax = std::max(rmax, x);
  }
  const double lo = center + rmin * (win.mid - win.outer);
  const double hi = center + rmax * (win.mid + win.outer);
  const ssf::BoxAverage box{c.ssf.box_length, c.ssf.box_span, c.ssf.box_count, 2.0 * c.L / (c.n + 1)};
  ssf::BoxAverage refined_box = box;
  refined_box.L0 *= 1.5;
  const auto base = ssf::window_spectrum(c.model(), c.trunc, lo, hi, box, workers);
  const auto refined = ssf::window_spectrum(c.model(), c.trunc, lo, hi, refined_box, workers);
  const auto env = landau::toeplitz_adaptive(
      c.q, c.W.scaled(c.kappa * c.w.sup_abs_real()), c.b, 1e-6 * rmin / c.nu);
  const std::vector<ssf::TestFunction> fs{ssf::polynomial({1.0}), ssf::polynomial({0.0, 1.0}),
                                          ssf::polynomial({0.0, 0.0, 1.0}),
                                          ssf::rational({win.mid, -3.0})};
  std::vector<Row> trows;
  for (double tr : c.ssf.trace_r) {
    const auto tset = res::find_resonances(
        e, res::SearchRegion::disc(center + tr * win.mid, 1.05 * tr * win.inner, c.q));
    for (const auto& f : fs) {
      const auto t = ssf::trace_formula_check(base, refined, center, tr, f, tset, env, c.nu);
      trows.push_back({tr, f.name, t.lhs.real(), t.lhs.imag(), t.rhs.real(), t.rhs.imag(), t.error,
                       t.sup_f, t.n_q, t.bound_ratio, t.refinement_change});
    }
  }
  out.write_csv("trace.csv",
                {"r", "function", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "error", "sup_f", "n_q",
                 "bound_ratio", "refinement_change"},
                trows);
}

}  // namespace detail

/// Runs the configured experiment and writes its artifacts plus
/// manifest.json into `dir`. Partial outputs are removed when it throws.
inline RunManifest run_experiment(const config::RunConfig& c, const std::filesystem::path& dir,
                                  int workers) {
  const auto t0 = std::chrono::steady_clock::now();
  Artifacts out(dir);
  RunManifest m;
  m.config = c.raw;
  m.experiment = config::experiment_name(c.experiment);
  try {
    switch (c.experiment) {
      case config::Experiment::spectrum_map: detail::spectrum_map(c, out, m.diagnostics); break;
      case config::Experiment::resonance_search:
        detail::resonance_search(c, workers, out, m.diagnostics);
        break;
      case config::Experiment::counting: detail::counting(c, out, m.diagnostics); break;
      case config::Experiment::ssf_window: detail::ssf_window(c, workers, out, m.diagnostics); break;
    }
    m.outputs = out.files();
    m.outputs.push_back("manifest.json");
    m.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.write_text("manifest.json", m.to_json().dump(2) + "\n");
  } catch (...) {
    out.remove_all();
    throw;
  }
  return m;
}

}  // namespace magres::run
