// Copyright 2026 The magres Authors
// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "magres/config.hpp"
#include "magres/experiments.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigViolation = 2;
constexpr int kNumericalFailure = 3;

void write_diagnostics(const std::filesystem::path& dir, const std::string& kind,
                       const std::string& what) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::ofstream out(dir / "diagnostics.txt");
  out << kind << "\n" << what << "\n";
}

int report_violations(const magres::config::Validation& v) {
  std::cerr << "configuration rejected (" << v.violations.size() << " violation"
            << (v.violations.size() == 1 ? "" : "s") << "):\n";
  for (const auto& s : v.violations) std::cerr << "  - " << s << "\n";
  return kConfigViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resonances and spectral shift of a magnetic Schrodinger operator"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  int workers = 0;

  auto* validate = app.add_subcommand("validate", "check a configuration against the model hypotheses");
  validate->add_option("--config", config_path, "configuration file (JSON)")->required();

  auto* run = app.add_subcommand("run", "run the configured experiment");
  run->add_option("--config", config_path, "configuration file (JSON)")->required();
  run->add_option("--out", out_dir, "output directory (overrides the config)");
  run->add_option("--workers", workers, "worker threads (overrides the config)")
      ->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("list-scenarios", "list the available experiments");

  CLI11_PARSE(app, argc, argv);

  if (list->parsed()) {
    for (const auto& e : magres::config::experiments())
      std::cout << magres::config::experiment_name(e.kind) << "  " << e.description << "\n";
    return kOk;
  }

  magres::config::Validation v;
  try {
    v = magres::config::validate_config(magres::config::read_json(config_path));
  } catch (const magres::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kConfigViolation;
  }

  if (validate->parsed()) {
    if (!v.ok()) return report_violations(v);
    std::cout << "valid: experiment " << magres::config::experiment_name(v.config.experiment)
              << "\n";
    return kOk;
  }

  const std::filesystem::path dir = out_dir.empty() ? v.config.output : out_dir;
  if (!v.ok()) {
    std::string text;
    for (const auto& s : v.violations) text += s + "\n";
    write_diagnostics(dir, "configuration violation", text);
    return report_violations(v);
  }
  const int w = workers > 0 ? workers : v.config.workers;
  try {
    const auto m = magres::run::run_experiment(v.config, dir, w);
    std::cout << "wrote " << m.outputs.size() << " files to " << dir.string() << "\n";
    return kOk;
  } catch (const magres::ConfigError& e) {
    write_diagnostics(dir, "configuration violation", e.what());
    std::cerr << "configuration violation: " << e.what() << "\n";
    return kConfigViolation;
  } catch (const std::exception& e) {
    write_diagnostics(dir, "numerical failure", e.what());
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  }
}
