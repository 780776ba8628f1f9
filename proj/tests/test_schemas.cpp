// Copyright 2026 The magres Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "magres/config.hpp"
#include "magres/experiments.hpp"

namespace magres {
namespace {

namespace fs = std::filesystem;
using config::Json;

Json load(const fs::path& p) {
  std::ifstream in(p);
  return Json::parse(in);
}

const fs::path kSchemas{MAGRES_SCHEMA_DIR};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool is_float(const std::string& s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return false;
  const auto e = s.find('e');
  if (e == std::string::npos) return false;
  std::size_t digits = 0;
  for (std::size_t i = 0; i < e; ++i) digits += std::isdigit(static_cast<unsigned char>(s[i])) ? 1 : 0;
  return digits == 17;
}

bool is_int(const std::string& s) {
  long long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size();
}

// Checks header and cell types of a CSV file against its table schema.
void check_table(const fs::path& file) {
  const auto tables = load(kSchemas / "tables.json")["tables"];
  const auto name = file.filename().string();
  ASSERT_TRUE(tables.contains(name)) << name;
  const auto& cols = tables[name];
  std::ifstream in(file);
  std::string line;
  ASSERT_TRUE(std::getline(in, line));
  const auto header = split(line);
  ASSERT_EQ(header.size(), cols.size()) << name;
  for (std::size_t i = 0; i < cols.size(); ++i) EXPECT_EQ(header[i], cols[i]["name"]) << name;
  int rows = 0;
  while (std::getline(in, line)) {
    const auto cells = split(line);
    ASSERT_EQ(cells.size(), cols.size()) << name << ": " << line;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const std::string type = cols[i]["type"];
      const auto& v = cells[i];
      if (type == "float") EXPECT_TRUE(is_float(v)) << name << " " << header[i] << " = " << v;
      if (type == "int") EXPECT_TRUE(is_int(v)) << name << " " << header[i] << " = " << v;
      if (type == "enum") {
        bool found = false;
        for (const auto& a : cols[i]["values"]) found = found || a == v;
        EXPECT_TRUE(found) << name << " " << header[i] << " = " << v;
      }
    }
    ++rows;
  }
  EXPECT_GT(rows, 0) << name;
}

bool type_matches(const Json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "number") return v.is_number();
  if (t == "integer") return v.is_number_integer();
  if (t == "boolean") return v.is_boolean();
  return false;
}

// Subset of JSON Schema used by the shipped schemas.
void check_json(const Json& v, const Json& schema, const std::string& path) {
  if (schema.contains("type")) {
    ASSERT_TRUE(type_matches(v, schema["type"])) << path << " is not " << schema["type"];
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& a : schema["enum"]) found = found || a == v;
    EXPECT_TRUE(found) << path;
  }
  if (schema.contains("required"))
    for (const auto& k : schema["required"]) EXPECT_TRUE(v.contains(k)) << path << "." << k;
  if (schema.contains("properties"))
    for (const auto& [k, sub] : schema["properties"].items())
      if (v.contains(k)) check_json(v[k], sub, path + "." + k);
  if (schema.contains("items"))
    for (std::size_t i = 0; i < v.size(); ++i)
      check_json(v[i], schema["items"], path + "[" + std::to_string(i) + "]");
}

void check_manifest(const fs::path& dir) {
  const auto m = load(dir / "manifest.json");
  check_json(m, load(kSchemas / "manifest.schema.json"), "manifest");
  for (const auto& f : m["outputs"]) {
    const std::string name = f;
    EXPECT_TRUE(fs::exists(dir / name)) << name;
    if (name.ends_with(".csv")) check_table(dir / name);
  }
}

fs::path run(const Json& raw, const std::string& name) {
  const auto v = config::validate_config(raw);
  EXPECT_TRUE(v.ok()) << (v.violations.empty() ? "" : v.violations.front());
  const auto dir = fs::temp_directory_path() / ("magres_schema_" + name);
  fs::remove_all(dir);
  (void)run::run_experiment(v.config, dir, 2);
  return dir;
}

const char* kModel = R"(
  "b": 2.0, "q": 1,
  "potential": {
    "v0": {"family": "poschl_teller", "amplitude": -2.0, "width": 1.0},
    "W": {"family": "gaussian", "amplitude": 1.0, "scale": 1.0},
    "w": {"family": "poschl_teller", "amplitude": 1.0, "width": 1.0},
    "kappa": 0.1
  },)";

TEST(Schemas, SchemaFilesAreWellFormed) {
  for (const char* f : {"tables.json", "manifest.schema.json", "bw.schema.json"})
    EXPECT_NO_THROW((void)load(kSchemas / f)) << f;
  EXPECT_EQ(load(kSchemas / "tables.json")["tables"].size(), 7u);
}

TEST(Schemas, SpectrumMapOutputs) {
  const auto dir = run(Json::parse(std::string(R"({"experiment": "spectrum_map",)") + kModel +
                                   R"("distortion": {"theta": [[0.0, 0.1], [0.0, 0.2]]},
                                      "truncation": {"J": 2, "M": 2, "n": 300, "L": 40.0}})"),
                       "spectrum");
  check_manifest(dir);
  std::ifstream in(dir / "spectrum.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_NE(ss.str().find(",discrete\n"), std::string::npos);
  EXPECT_NE(ss.str().find(",ray\n"), std::string::npos);
}

TEST(Schemas, ResonanceAndCountingOutputs) {
  check_manifest(run(Json::parse(std::string(R"({"experiment": "resonance_search",)") + kModel +
                                 R"("distortion": {"theta": [[0.0, 0.1]]},
                                    "truncation": {"J": 2, "M": 2, "n": 300, "L": 40.0}})"),
                     "resonances"));
  check_manifest(run(Json::parse(R"({"experiment": "counting", "b": 2.0, "q": 0})"), "counting"));
}

TEST(Schemas, SsfWindowOutputs) {
  const auto dir = run(Json::parse(std::string(R"({"experiment": "ssf_window",)") + kModel +
                                   R"("distortion": {"theta": [[0.0, 0.1]]},
                                      "truncation": {"J": 2, "M": 8, "n": 600, "L": 40.0},
                                      "ssf": {"trace_r": [0.008], "box_count": 4}})"),
                       "ssf");
  check_manifest(dir);
  EXPECT_TRUE(fs::exists(dir / "trace.csv"));
  check_json(load(dir / "bw.json"), load(kSchemas / "bw.schema.json"), "bw");
}

}  // namespace
}  // namespace magres
