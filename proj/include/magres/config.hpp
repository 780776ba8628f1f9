// Copyright 2026 The magres Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "magres/axis1d.hpp"
#include "magres/birman_schwinger.hpp"
#include "magres/common.hpp"
#include "magres/landau.hpp"

namespace magres::config {

using Json = nlohmann::json;

enum class Experiment { spectrum_map, resonance_search, counting, ssf_window };

inline std::string experiment_name(Experiment e) {
  switch (e) {
    case Experiment::spectrum_map: return "spectrum_map";
    case Experiment::resonance_search: return "resonance_search";
    case Experiment::counting: return "counting";
    case Experiment::ssf_window: return "ssf_window";
  }
  return "";
}

struct ExperimentInfo {
  Experiment kind;
  const char* description;
};

inline const std::vector<ExperimentInfo>& experiments() {
  static const std::vector<ExperimentInfo> list{
      {Experiment::spectrum_map, "axis eigenvalues on the rotated rays for each theta"},
      {Experiment::resonance_search, "resonances in a region as zeros of the regularized determinant"},
      {Experiment::counting, "Toeplitz counting function n_+(r) with asymptotic fit"},
      {Experiment::ssf_window, "SSF derivative and Breit-Wigner reconstruction near 2bq + lambda"},
  };
  return list;
}

struct RegionSpec {
  std::string shape = "disc";  // disc | annulus | box
  bool auto_center = true;     // center at 2bq + lambda
  Complex center{};
  double radius = 0.3;
  Complex lo{};
  Complex hi{};
};

struct CountingSpec {
  double r_min = 1e-6;
  double r_max = 1e-2;
  int points = 13;
};

struct SSFSpec {
  double r = 0.0065;
  int degree = 3;
  std::vector<double> epsilons;  // empty: derived from resonance widths
  std::vector<double> trace_r;   // empty: no trace-formula table
  double box_length = 100.0;
  double box_span = 24.0;
  int box_count = 48;
};

struct RunConfig {
  Experiment experiment = Experiment::resonance_search;
  double b = 2.0;
  int q = 1;
  double nu = 1.0;
  axis::AxisFunction v0{axis::Family::poschl_teller, -2.0, 1.0};
  landau::TransversePotential W;
  axis::AxisFunction w{axis::Family::poschl_teller, 1.0, 1.0};
  double kappa = 0.1;
  double R0 = 6.0;
  double K = 14.0;
  axis::ProfileShape shape = axis::ProfileShape::smoothstep;
  std::vector<Complex> theta{{0.0, 0.1}};
  double sector_epsilon = 0.5;
  bs::Truncation trunc;
  int n = 600;
  double L = 40.0;
  RegionSpec region;
  CountingSpec counting;
  SSFSpec ssf;
  double ray_tolerance = 1e-3;
  int workers = 1;
  std::string output = "out";
  Json raw;

  [[nodiscard]] bs::ModelSpec model() const {
    bs::ModelSpec m;
    m.b = b;
    m.v0 = v0;
    m.V.W = W;
    m.V.w = w;
    m.V.kappa = kappa;
    return m;
  }
};

struct Validation {
  RunConfig config;
  std::vector<std::string> violations;
  [[nodiscard]] bool ok() const { return violations.empty(); }
};

namespace detail {

class Reader {
 public:
  explicit Reader(std::vector<std::string>& out) : out_(out) {}

  /// Records unknown keys of an object node.
  void keys(const Json& node, const std::string& path, const std::set<std::string>& allowed) {
    if (!node.is_object()) {
      out_.push_back(path + ": expected an object");
      return;
    }
    for (const auto& [k, v] : node.items())
      if (!allowed.count(k)) out_.push_back("unknown key '" + join(path, k) + "'");
  }

  template <class T>
  void get(const Json& node, const std::string& path, const std::string& key, T& value) {
    if (!node.is_object() || !node.contains(key)) return;
    try {
      value = node.at(key).get<T>();
    } catch (const std::exception&) {
      out_.push_back("'" + join(path, key) + "' has the wrong type");
    }
  }

  void complex_value(const Json& node, const std::string& path, Complex& z) {
    if (node.is_array() && node.size() == 2 && node[0].is_number() && node[1].is_number()) {
      z = {node[0].get<double>(), node[1].get<double>()};
      return;
    }
    out_.push_back("'" + path + "' must be a [re, im] pair");
  }

  static std::string join(const std::string& a, const std::string& b) {
    return a.empty() ? b : a + "." + b;
  }

 private:
  std::vector<std::string>& out_;
};

inline axis::Family axis_family(const std::string& s, bool& ok) {
  ok = true;
  if (s == "poschl_teller") return axis::Family::poschl_teller;
  if (s == "gaussian_well") return axis::Family::gaussian_well;
  if (s == "power_law") return axis::Family::power_law;
  if (s == "zero") return axis::Family::zero;
  ok = false;
  return axis::Family::zero;
}

inline landau::TransverseFamily transverse_family(const std::string& s, bool& ok) {
  ok = true;
  if (s == "gaussian") return landau::TransverseFamily::gaussian;
  if (s == "power_law") return landau::TransverseFamily::power_law;
  if (s == "compact_support") return landau::TransverseFamily::compact_support;
  if (s == "constant") return landau::TransverseFamily::constant;
  ok = false;
  return landau::TransverseFamily::gaussian;
}

inline void read_axis(Reader& rd, const Json& node, const std::string& path,
                      axis::AxisFunction& f, std::vector<std::string>& out) {
  rd.keys(node, path, {"family", "amplitude", "width", "decay"});
  std::string fam = axis::family_name(f.family);
  rd.get(node, path, "family", fam);
  bool ok = true;
  f.family = axis_family(fam, ok);
  if (!ok) out.push_back("'" + path + ".family' unknown: " + fam);
  rd.get(node, path, "amplitude", f.amplitude);
  rd.get(node, path, "width", f.width);
  rd.get(node, path, "decay", f.decay);
  if (!(f.width > 0.0)) out.push_back("'" + path + ".width' must be positive");
}

}  // namespace detail

/// Typed configuration plus every violated hypothesis, by name.
inline Validation validate_config(const Json& raw) {
  Validation v;
  auto& c = v.config;
  auto& out = v.violations;
  c.raw = raw;
  detail::Reader rd(out);
  rd.keys(raw, "", {"experiment", "b", "q", "nu", "potential", "distortion", "truncation",
                    "region", "counting", "ssf", "tolerances", "workers", "output"});
  if (!raw.is_object()) return v;

  std::string exp = experiment_name(c.experiment);
  rd.get(raw, "", "experiment", exp);
  bool known = false;
  for (const auto& e : experiments())
    if (experiment_name(e.kind) == exp) {
      c.experiment = e.kind;
      known = true;
    }
  if (!known) out.push_back("unknown experiment '" + exp + "'");
  rd.get(raw, "", "b", c.b);
  rd.get(raw, "", "q", c.q);
  rd.get(raw, "", "nu", c.nu);
  rd.get(raw, "", "workers", c.workers);
  rd.get(raw, "", "output", c.output);

  if (raw.contains("potential")) {
    const auto& p = raw["potential"];
    rd.keys(p, "potential", {"v0", "W", "w", "kappa"});
    if (p.is_object()) {
      if (p.contains("v0")) detail::read_axis(rd, p["v0"], "potential.v0", c.v0, out);
      if (p.contains("w")) detail::read_axis(rd, p["w"], "potential.w", c.w, out);
      if (p.contains("W")) {
        const auto& w = p["W"];
        rd.keys(w, "potential.W", {"family", "amplitude", "scale", "alpha"});
        std::string fam = landau::family_name(c.W.family);
        rd.get(w, "potential.W", "family", fam);
        bool ok = true;
        c.W.family = detail::transverse_family(fam, ok);
        if (!ok) out.push_back("'potential.W.family' unknown: " + fam);
        rd.get(w, "potential.W", "amplitude", c.W.amplitude);
        rd.get(w, "potential.W", "scale", c.W.scale);
        rd.get(w, "potential.W", "alpha", c.W.alpha);
        if (!(c.W.scale > 0.0)) out.push_back("'potential.W.scale' must be positive");
      }
      rd.get(p, "potential", "kappa", c.kappa);
    }
  }

  if (raw.contains("distortion")) {
    const auto& d = raw["distortion"];
    rd.keys(d, "distortion", {"R0", "K", "theta", "shape", "sector_epsilon"});
    rd.get(d, "distortion", "R0", c.R0);
    rd.get(d, "distortion", "K", c.K);
    rd.get(d, "distortion", "sector_epsilon", c.sector_epsilon);
    std::string shape = "smoothstep";
    rd.get(d, "distortion", "shape", shape);
    if (shape == "pure_dilation")
      c.shape = axis::ProfileShape::pure_dilation;
    else if (shape != "smoothstep")
      out.push_back("'distortion.shape' unknown: " + shape);
    if (d.is_object() && d.contains("theta")) {
      c.theta.clear();
      if (!d["theta"].is_array() || d["theta"].empty()) {
        out.push_back("'distortion.theta' must be a non-empty list of [re, im] pairs");
      } else {
        for (std::size_t i = 0; i < d["theta"].size(); ++i) {
          Complex z;
          rd.complex_value(d["theta"][i], "distortion.theta[" + std::to_string(i) + "]", z);
          c.theta.push_back(z);
        }
      }
    }
  }

  if (raw.contains("truncation")) {
    const auto& t = raw["truncation"];
    rd.keys(t, "truncation", {"J", "M", "n", "L"});
    rd.get(t, "truncation", "J", c.trunc.J);
    rd.get(t, "truncation", "M", c.trunc.M);
    rd.get(t, "truncation", "n", c.n);
    rd.get(t, "truncation", "L", c.L);
  }

  if (raw.contains("region")) {
    const auto& r = raw["region"];
    rd.keys(r, "region", {"shape", "center", "radius", "lo", "hi"});
    rd.get(r, "region", "shape", c.region.shape);
    rd.get(r, "region", "radius", c.region.radius);
    if (r.is_object() && r.contains("center")) {
      if (r["center"].is_string() && r["center"].get<std::string>() == "auto") {
        c.region.auto_center = true;
      } else {
        c.region.auto_center = false;
        rd.complex_value(r["center"], "region.center", c.region.center);
      }
    }
    if (r.is_object() && r.contains("lo")) rd.complex_value(r["lo"], "region.lo", c.region.lo);
    if (r.is_object() && r.contains("hi")) rd.complex_value(r["hi"], "region.hi", c.region.hi);
  }

  if (raw.contains("counting")) {
    const auto& k = raw["counting"];
    rd.keys(k, "counting", {"r_min", "r_max", "points"});
    rd.get(k, "counting", "r_min", c.counting.r_min);
    rd.get(k, "counting", "r_max", c.counting.r_max);
    rd.get(k, "counting", "points", c.counting.points);
  }

  if (raw.contains("ssf")) {
    const auto& s = raw["ssf"];
    rd.keys(s, "ssf", {"r", "degree", "epsilons", "trace_r", "box_length", "box_span",
                       "box_count"});
    rd.get(s, "ssf", "r", c.ssf.r);
    rd.get(s, "ssf", "degree", c.ssf.degree);
    rd.get(s, "ssf", "epsilons", c.ssf.epsilons);
    rd.get(s, "ssf", "trace_r", c.ssf.trace_r);
    rd.get(s, "ssf", "box_length", c.ssf.box_length);
    rd.get(s, "ssf", "box_span", c.ssf.box_span);
    rd.get(s, "ssf", "box_count", c.ssf.box_count);
  }

  if (raw.contains("tolerances")) {
    const auto& t = raw["tolerances"];
    rd.keys(t, "tolerances", {"ray"});
    rd.get(t, "tolerances", "ray", c.ray_tolerance);
  }

  // Hypotheses of the model.
  if (!(c.b > 0.0)) out.push_back("field strength b must be positive (b > 0)");
  if (c.q < 0) out.push_back("Landau level q must be non-negative");
  if (!(c.nu > 0.0)) out.push_back("scaling nu must be positive");
  const double dperp = c.W.decay_exponent();
  if (!(dperp > 2.0))
    out.push_back("transverse decay too slow (requires delta_perp>2), got delta_perp=" +
                  std::to_string(dperp));
  if (!(c.w.decay_exponent() > 1.0))
    out.push_back("axial decay too slow (requires delta_par>1), got delta_par=" +
                  std::to_string(c.w.decay_exponent()));
  if (!(c.v0.decay_exponent() > 1.0))
    out.push_back("axis potential decay too slow (requires delta_0>1), got delta_0=" +
                  std::to_string(c.v0.decay_exponent()));
  if (!(c.sector_epsilon > 0.0 && c.sector_epsilon < 1.0))
    out.push_back("sector aperture must satisfy 0 < epsilon < 1");

  // Distortion and discretization.
  bool grid_ok = true;
  if (c.shape == axis::ProfileShape::smoothstep && !(c.R0 > 0.0 && c.K > c.R0)) {
    out.push_back("distortion requires 0 < R0 < K");
    grid_ok = false;
  }
  if (c.n < 64) {
    out.push_back("axis grid needs n >= 64");
    grid_ok = false;
  }
  if (!(c.L > 0.0)) {
    out.push_back("axis half-length L must be positive");
    grid_ok = false;
  } else if (c.shape == axis::ProfileShape::smoothstep && !(c.L >= 2.0 * c.K)) {
    out.push_back("axis half-length must satisfy L >= 2K");
  }
  if (c.trunc.J < 0) out.push_back("Landau cutoff J must be non-negative");
  if (c.trunc.M < c.q) out.push_back("angular cutoff M must be at least q");
  if (c.trunc.J < c.q) out.push_back("Landau cutoff J must be at least q");
  if (c.workers < 1) out.push_back("workers must be at least 1");
  if (!(c.ray_tolerance > 0.0)) out.push_back("ray tolerance must be positive");
  const double slope = c.shape == axis::ProfileShape::smoothstep && c.K > c.R0 && c.R0 > 0.0
                           ? axis::smoothstep_slope_max(c.R0, c.K)
                           : 1.0;
  for (const auto& th : c.theta) {
    const std::string s = "theta=(" + std::to_string(th.real()) + "," + std::to_string(th.imag()) + ")";
    if (th.imag() < 0.0) out.push_back(s + ": requires Im theta >= 0");
    if (!(std::abs(th) * slope < 1.0))
      out.push_back(s + ": outside the admissible disc |theta| sup|g'| < 1");
    if (std::abs(th.imag()) > c.sector_epsilon * std::abs(1.0 + th.real()))
      out.push_back(s + ": contour leaves the analyticity sector |Im z| <= epsilon |Re z|");
  }

  // Region.
  if (c.region.shape != "disc" && c.region.shape != "annulus" && c.region.shape != "box")
    out.push_back("'region.shape' unknown: " + c.region.shape);
  if (c.region.shape != "box" && !(c.region.radius > 0.0))
    out.push_back("region radius must be positive");
  if (c.region.shape == "box" &&
      !(c.region.lo.real() < c.region.hi.real() && c.region.lo.imag() < c.region.hi.imag()))
    out.push_back("region box requires lo < hi in both coordinates");

  if (!(c.counting.r_min > 0.0 && c.counting.r_max > c.counting.r_min))
    out.push_back("counting grid requires 0 < r_min < r_max");
  if (c.counting.points < 5) out.push_back("counting grid needs at least 5 points");
  if (!(c.ssf.r > 0.0)) out.push_back("ssf window scale r must be positive");
  if (c.ssf.degree < 0 || c.ssf.degree > 8) out.push_back("ssf background degree must be in 0..8");
  if (!c.ssf.epsilons.empty()) {
    bool dec = c.ssf.epsilons.size() >= 3;
    for (std::size_t i = 0; i < c.ssf.epsilons.size(); ++i)
      dec = dec && c.ssf.epsilons[i] > 0.0 && (i == 0 || c.ssf.epsilons[i] < c.ssf.epsilons[i - 1]);
    if (!dec) out.push_back("ssf epsilons must be a decreasing list of at least 3 positive values");
  }
  for (double r : c.ssf.trace_r)
    if (!(r > 0.0)) out.push_back("ssf trace_r values must be positive");
  if (c.ssf.box_count < 1 || !(c.ssf.box_length > 0.0) || !(c.ssf.box_span >= 0.0))
    out.push_back("ssf box average needs box_count >= 1, box_length > 0, box_span >= 0");

  // inf sigma(H0,par) > -2b, on the configured grid.
  if (grid_ok && c.v0.width > 0.0 && c.b > 0.0) {
    try {
      const auto neg = axis::negative_eigenvalues(axis::make_grid(c.L, c.n), c.v0);
      const double lowest = neg.empty() ? 0.0 : neg.front();
      if (!axis::inf_spectrum_check(lowest, c.b))
        out.push_back("axis operator too attractive (requires inf sigma(H0,par) > -2b), got inf=" +
                      std::to_string(lowest) + " with -2b=" + std::to_string(-2.0 * c.b));
      if (neg.empty() && (c.experiment == Experiment::resonance_search ||
                          c.experiment == Experiment::ssf_window))
        out.push_back("no embedded eigenvalue: v0 has no bound state");
    } catch (const Error& e) {
      out.push_back(std::string("axis operator: ") + e.what());
    }
  }
  return v;
}

inline Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
}

}  // namespace magres::config
