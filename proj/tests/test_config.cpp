// Copyright 2026 The magres Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "magres/config.hpp"
#include "magres/experiments.hpp"

namespace magres {
namespace {

namespace fs = std::filesystem;
using config::Json;

Json valid_config() {
  return Json::parse(R"({
    "experiment": "resonance_search",
    "b": 2.0,
    "q": 1,
    "potential": {
      "v0": {"family": "poschl_teller", "amplitude": -2.0, "width": 1.0},
      "W": {"family": "gaussian", "amplitude": 1.0, "scale": 1.0},
      "w": {"family": "poschl_teller", "amplitude": 1.0, "width": 1.0},
      "kappa": 0.1
    },
    "distortion": {"R0": 6.0, "K": 14.0, "theta": [[0.0, 0.1]]},
    "truncation": {"J": 2, "M": 4, "n": 300, "L": 40.0},
    "region": {"shape": "disc", "center": "auto", "radius": 0.3}
  })");
}

bool mentions(const std::vector<std::string>& v, const std::string& text) {
  for (const auto& s : v)
    if (s.find(text) != std::string::npos) return true;
  return false;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("magres_test_" + name);
  fs::remove_all(p);
  return p;
}

TEST(ValidateConfig, PoschlTellerGaussianAccepted) {
  const auto v = config::validate_config(valid_config());
  EXPECT_TRUE(v.ok()) << (v.violations.empty() ? "" : v.violations.front());
  EXPECT_EQ(v.config.experiment, config::Experiment::resonance_search);
  EXPECT_EQ(v.config.trunc.M, 4);
  EXPECT_EQ(v.config.theta.size(), 1u);
}

TEST(ValidateConfig, SlowTransverseDecayRejected) {
  auto raw = valid_config();
  raw["potential"]["W"] = {{"family", "power_law"}, {"alpha", 1.5}};
  const auto v = config::validate_config(raw);
  EXPECT_FALSE(v.ok());
  EXPECT_TRUE(mentions(v.violations, "transverse decay too slow (requires delta_perp>2)"));
}

TEST(ValidateConfig, InfimumBelowMinusTwoBRejected) {
  auto raw = valid_config();
  raw["b"] = 0.4;
  const auto v = config::validate_config(raw);
  EXPECT_TRUE(mentions(v.violations, "inf sigma(H0,par) > -2b"));
}

TEST(ValidateConfig, NonPositiveFieldRejected) {
  auto raw = valid_config();
  raw["b"] = 0.0;
  EXPECT_TRUE(mentions(config::validate_config(raw).violations, "b > 0"));
  raw["b"] = -1.0;
  EXPECT_TRUE(mentions(config::validate_config(raw).violations, "b > 0"));
}

TEST(ValidateConfig, UnknownKeyIsNamed) {
  auto raw = valid_config();
  raw["potential"]["kapa"] = 0.1;
  raw["colour"] = "blue";
  const auto v = config::validate_config(raw);
  EXPECT_TRUE(mentions(v.violations, "unknown key 'potential.kapa'"));
  EXPECT_TRUE(mentions(v.violations, "unknown key 'colour'"));
}

TEST(ValidateConfig, ViolationsAreExhaustive) {
  auto raw = valid_config();
  raw["potential"]["W"] = {{"family", "power_law"}, {"alpha", 2.0}};
  raw["potential"]["w"]["family"] = "power_law";
  raw["potential"]["w"]["decay"] = 1.0;
  raw["distortion"]["theta"] = {{0.0, 0.9}};
  raw["extra"] = 1;
  const auto v = config::validate_config(raw);
  EXPECT_TRUE(mentions(v.violations, "delta_perp>2"));
  EXPECT_TRUE(mentions(v.violations, "delta_par>1"));
  EXPECT_TRUE(mentions(v.violations, "admissible disc"));
  EXPECT_TRUE(mentions(v.violations, "unknown key 'extra'"));
  EXPECT_GE(v.violations.size(), 4u);
}

TEST(ValidateConfig, ThetaOutsideSectorOrLowerHalfPlaneRejected) {
  auto raw = valid_config();
  raw["distortion"] = {{"shape", "pure_dilation"}, {"theta", {{0.0, 0.6}, {0.0, -0.1}}},
                       {"sector_epsilon", 0.5}};
  const auto v = config::validate_config(raw);
  EXPECT_TRUE(mentions(v.violations, "analyticity sector"));
  EXPECT_TRUE(mentions(v.violations, "Im theta >= 0"));
}

TEST(ValidateConfig, WrongTypesAndUnknownNamesRejected) {
  auto raw = valid_config();
  raw["truncation"]["n"] = "many";
  raw["experiment"] = "everything";
  raw["potential"]["v0"]["family"] = "square";
  const auto v = config::validate_config(raw);
  EXPECT_TRUE(mentions(v.violations, "'truncation.n' has the wrong type"));
  EXPECT_TRUE(mentions(v.violations, "unknown experiment 'everything'"));
  EXPECT_TRUE(mentions(v.violations, "'potential.v0.family' unknown: square"));
}

TEST(Output, DoublesUseSeventeenSignificantDigits) {
  EXPECT_EQ(run::format_double(0.1), "1.0000000000000001e-01");
  EXPECT_EQ(run::format_double(-2.0), "-2.0000000000000000e+00");
  EXPECT_EQ(run::format_double(1e-300), "1.0000000000000000e-300");
  EXPECT_EQ(std::stod(run::format_double(3.0165998123456789)), 3.0165998123456789);
}

TEST(RunExperiment, SpectrumMapOnRotatedRay) {
  auto raw = Json::parse(R"({
    "experiment": "spectrum_map", "b": 2.0, "q": 0,
    "potential": {"v0": {"family": "zero"}, "kappa": 0.0},
    "distortion": {"shape": "pure_dilation", "theta": [[0.0, 0.2]]},
    "truncation": {"J": 1, "M": 2, "n": 400, "L": 40.0}
  })");
  const auto v = config::validate_config(raw);
  ASSERT_TRUE(v.ok()) << v.violations.front();
  const auto dir = scratch("spectrum");
  const auto m = run::run_experiment(v.config, dir, 1);
  const auto text = read_file(dir / "spectrum.csv");
  EXPECT_EQ(text.rfind("theta_re,theta_im,re,im,kind\n", 0), 0u);
  EXPECT_EQ(m.diagnostics["per_theta"][0]["eigenvalues"], 400);
  EXPECT_GE(m.diagnostics["per_theta"][0]["on_ray_fraction"].get<double>(), 0.99);
  EXPECT_TRUE(fs::exists(dir / "features.csv"));
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
}

TEST(RunExperiment, ZeroCouplingGivesEmptyResonanceTable) {
  auto raw = valid_config();
  raw["potential"]["kappa"] = 0.0;
  raw["region"]["radius"] = 0.05;
  const auto v = config::validate_config(raw);
  ASSERT_TRUE(v.ok());
  const auto dir = scratch("zero_coupling");
  const auto m = run::run_experiment(v.config, dir, 1);
  EXPECT_EQ(read_file(dir / "resonances.csv"),
            "theta_re,theta_im,m,re,im,multiplicity,residual,source\n");
  EXPECT_TRUE(m.diagnostics["zero_count"].get<bool>());
  EXPECT_EQ(m.diagnostics["note"], "no resonances in the region");
  EXPECT_FALSE(m.diagnostics["multiple_bound_states"].get<bool>());
  EXPECT_NEAR(m.diagnostics["bound_states"][0].get<double>(), -1.0, 1e-3);
  const auto manifest = Json::parse(read_file(dir / "manifest.json"));
  EXPECT_EQ(manifest["outputs"].size(), 2u);
  EXPECT_EQ(manifest["config"], raw);
  EXPECT_TRUE(manifest.contains("wall_clock_seconds"));
  EXPECT_TRUE(manifest.contains("code_version"));
}

Json counting_config(double alpha) {
  Json raw = Json::parse(R"({
    "experiment": "counting", "b": 2.0, "q": 0,
    "counting": {"r_min": 1e-6, "r_max": 1e-2, "points": 13}
  })");
  raw["potential"]["W"] = {{"family", "power_law"}, {"alpha", alpha}};
  return raw;
}

TEST(RunExperiment, PowerLawCountingSlope) {
  const auto v = config::validate_config(counting_config(4.0));
  ASSERT_TRUE(v.ok());
  const auto dir = scratch("counting");
  const auto m = run::run_experiment(v.config, dir, 1);
  EXPECT_NEAR(m.diagnostics["slope"].get<double>(), 0.5, 0.05);
  EXPECT_EQ(read_file(dir / "counting.csv").rfind("r,n_plus,near_crossing\n", 0), 0u);
  EXPECT_EQ(read_file(dir / "toeplitz.csv").rfind("q,m,mu\n", 0), 0u);
}

TEST(RunExperiment, IdenticalConfigGivesIdenticalFiles) {
  const auto v = config::validate_config(counting_config(3.0));
  ASSERT_TRUE(v.ok());
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  (void)run::run_experiment(v.config, a, 1);
  (void)run::run_experiment(v.config, b, 1);
  for (const char* f : {"counting.csv", "toeplitz.csv"})
    EXPECT_EQ(read_file(a / f), read_file(b / f)) << f;

  auto raw = valid_config();
  raw["truncation"]["M"] = 2;
  const auto r = config::validate_config(raw);
  ASSERT_TRUE(r.ok());
  (void)run::run_experiment(r.config, a, 1);
  (void)run::run_experiment(r.config, b, 2);
  EXPECT_EQ(read_file(a / "resonances.csv"), read_file(b / "resonances.csv"));
  EXPECT_GT(read_file(a / "resonances.csv").size(), 80u);
}

TEST(RunExperiment, FailureRemovesPartialOutputs) {
  auto raw = counting_config(4.0);
  raw["counting"] = {{"r_min", 0.5}, {"r_max", 0.9}, {"points", 5}};
  const auto v = config::validate_config(raw);
  ASSERT_TRUE(v.ok());
  const auto dir = scratch("failure");
  EXPECT_THROW(run::run_experiment(v.config, dir, 1), NumericalError);
  EXPECT_FALSE(fs::exists(dir / "toeplitz.csv"));
  EXPECT_FALSE(fs::exists(dir / "counting.csv"));
  EXPECT_FALSE(fs::exists(dir / "manifest.json"));
}

#ifdef MAGRES_CLI_PATH
int cli(const std::string& args) {
  const int status = std::system((std::string(MAGRES_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

fs::path write_config(const std::string& name, const Json& raw) {
  const auto p = fs::temp_directory_path() / ("magres_test_" + name + ".json");
  std::ofstream(p) << raw.dump(2);
  return p;
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli("list-scenarios"), 0);
  EXPECT_EQ(cli("validate --config " + write_config("valid", valid_config()).string()), 0);

  auto bad = valid_config();
  bad["potential"]["W"] = {{"family", "power_law"}, {"alpha", 1.5}};
  const auto out = scratch("cli_bad");
  EXPECT_EQ(cli("validate --config " + write_config("bad", bad).string()), 2);
  EXPECT_EQ(cli("run --config " + write_config("bad", bad).string() + " --out " + out.string()), 2);
  EXPECT_NE(read_file(out / "diagnostics.txt").find("delta_perp>2"), std::string::npos);

  auto fail = counting_config(4.0);
  fail["counting"] = {{"r_min", 0.5}, {"r_max", 0.9}, {"points", 5}};
  const auto out3 = scratch("cli_fail");
  EXPECT_EQ(cli("run --config " + write_config("fail", fail).string() + " --out " + out3.string()),
            3);
  EXPECT_NE(read_file(out3 / "diagnostics.txt").find("numerical failure"), std::string::npos);
  EXPECT_FALSE(fs::exists(out3 / "counting.csv"));

  const auto ok = scratch("cli_ok");
  EXPECT_EQ(cli("run --config " + write_config("count", counting_config(4.0)).string() +
                " --out " + ok.string() + " --workers 2"),
            0);
  EXPECT_TRUE(fs::exists(ok / "manifest.json"));
  EXPECT_EQ(cli("run --config /nonexistent/config.json"), 2);
}
#endif

}  // namespace
}  // namespace magres
