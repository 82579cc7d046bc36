#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ringmod/error.hpp"
#include "ringmod/runner.hpp"

using namespace ringmod;

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// key,value lookup in a summary.csv body.
double summary_value(const std::string& csv, const std::string& key) {
  std::stringstream ss(csv);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.rfind(key + ",", 0) == 0) return std::stod(line.substr(key.size() + 1));
  }
  FAIL("summary key not found: " << key);
  return 0.0;
}

std::string summary_string(const std::string& csv, const std::string& key) {
  std::stringstream ss(csv);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.rfind(key + ",", 0) == 0) return line.substr(key.size() + 1);
  }
  FAIL("summary key not found: " << key);
  return "";
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("ringmod_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("config parsing validates commands and exponents") {
  CHECK_THROWS_AS(RunConfig::from_json_text("{\"command\":\"nope\"}"), Error);
  CHECK_THROWS_AS(RunConfig::from_json_text("not json"), Error);
  CHECK_THROWS_AS(RunConfig::from_json_text("{\"command\":\"modulus\",\"p\":0.5}"), Error);
  CHECK_THROWS_AS(
      RunConfig::from_json_text("{\"command\":\"modulus\",\"eps\":1.0,\"eps0\":0.5}"), Error);
  CHECK_THROWS_AS(
      RunConfig::from_json_text("{\"command\":\"modulus\",\"metric\":{\"kind\":\"wat\"}}"),
      Error);

  RunConfig cfg = RunConfig::from_json_text(
      R"json({"command":"modulus","metric":{"kind":"poincare-ball","dim":2},
          "eps":0.1,"eps0":0.3,"p":2.5,"seed":7})json");
  CHECK(cfg.command == Command::Modulus);
  CHECK(cfg.metric.kind() == MetricKind::PoincareBall);
  CHECK(cfg.p == doctest::Approx(2.5));
  CHECK(cfg.seed == 7);
  CHECK(cfg.resolved.contains("grid"));
}

TEST_CASE("modulus run writes the pinned outputs") {
  RunConfig cfg = RunConfig::from_json_text(
      R"json({"command":"modulus","metric":{"kind":"euclidean","dim":2},
          "eps":0.5,"eps0":1.0,"p":2.0,
          "grid":{"radial_panels":16,"angular_nodes":64}})json");
  fs::path dir = fresh_dir("modulus");
  run(cfg, dir.string(), 1);

  std::string summary = slurp(dir / "summary.csv");
  CHECK(summary_value(summary, "I") ==
        doctest::Approx(std::log(2.0) / (2.0 * M_PI)).epsilon(1e-8));
  CHECK(summary_value(summary, "gap") <= 1e-3);
  CHECK(summary_value(summary, "extremal_rel_err") <= 1e-4);
  CHECK(summary_string(summary, "config.command") == "modulus");
  CHECK(summary_value(summary, "config.grid.radial_panels") == 16);

  std::string shells = slurp(dir / "shells.csv");
  CHECK(shells.rfind("r,area,qnorm_s,per_shell_infimum_closed,per_shell_infimum_oracle", 0) == 0);
  CHECK(!slurp(dir / "profile.dat").empty());
}

TEST_CASE("runs are byte-identical for a fixed config, seed and threads") {
  RunConfig cfg = RunConfig::from_json_text(
      R"json({"command":"jensen","metric":{"kind":"euclidean","dim":2},
          "eps":0.5,"eps0":1.0,"p":2.0,"seed":11,
          "grid":{"radial_panels":16,"angular_nodes":64},
          "jensen":{"random_draws":10}})json");
  fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
  run(cfg, a.string(), 1);
  run(cfg, b.string(), 1);
  for (const char* name : {"summary.csv", "shells.csv", "profile.dat"})
    CHECK(slurp(a / name) == slurp(b / name));

  std::string summary = slurp(a / "summary.csv");
  CHECK(summary_value(summary, "violations") == 0);
  CHECK(summary_value(summary, "equality_rel_err") <= 1e-4);
}

TEST_CASE("thread count does not change the results") {
  RunConfig cfg = RunConfig::from_json_text(
      R"json({"command":"modulus","metric":{"kind":"euclidean","dim":2},
          "eps":0.5,"eps0":1.0,"p":2.0,
          "grid":{"radial_panels":16,"angular_nodes":64}})json");
  fs::path a = fresh_dir("thr_1"), b = fresh_dir("thr_4");
  run(cfg, a.string(), 1);
  run(cfg, b.string(), 4);
  // Identical except the recorded thread count.
  CHECK(summary_value(slurp(a / "summary.csv"), "I") ==
        summary_value(slurp(b / "summary.csv"), "I"));
  CHECK(slurp(a / "shells.csv") == slurp(b / "shells.csv"));
}

TEST_CASE("dilatation run reports unit dilatations for the identity") {
  RunConfig cfg = RunConfig::from_json_text(
      R"json({"command":"dilatation","metric":{"kind":"euclidean","dim":2},
          "map":{"kind":"identity"},
          "eps":0.5,"eps0":1.0,"p":2.0,
          "grid":{"radial_panels":8,"angular_nodes":32}})json");
  fs::path dir = fresh_dir("dilatation");
  run(cfg, dir.string(), 1);
  std::string summary = slurp(dir / "summary.csv");
  CHECK(summary_value(summary, "kp_min") == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(summary_value(summary, "kp_max") == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(summary_string(summary, "finitely_bilipschitz") == "true");

  // The kp_mean column rides along in shells.csv.
  std::string shells = slurp(dir / "shells.csv");
  CHECK(shells.rfind("r,area,qnorm_s,per_shell_infimum_closed,per_shell_infimum_oracle,kp_mean",
                     0) == 0);
}

TEST_CASE("theorem2 run emits the inequality verdict") {
  RunConfig cfg = RunConfig::from_json_text(
      R"json({"command":"theorem2","metric":{"kind":"euclidean","dim":2},
          "map":{"kind":"linear","matrix":[[2,0],[0,1]]},
          "eps":0.5,"eps0":1.0,"p":2.0,
          "grid":{"radial_panels":24,"angular_nodes":48}})json");
  fs::path dir = fresh_dir("theorem2");
  run(cfg, dir.string(), 1);
  std::string summary = slurp(dir / "summary.csv");
  CHECK(summary_string(summary, "holds") == "true");
  CHECK(summary_value(summary, "rhs_lower_bound_integral") ==
        doctest::Approx(std::log(2.0) / (4.0 * M_PI)).epsilon(1e-4));
}

TEST_CASE("boundary run emits the ladder table and verdict") {
  RunConfig cfg = RunConfig::from_json_text(
      R"json({"command":"boundary","metric":{"kind":"euclidean","dim":2},
          "weight":{"kind":"radial","expr":"3*log(1/r)"},
          "domain":{"kind":"halfspace","normal":[0,1],"offset":0},
          "eps":0.1,"eps0":0.25,
          "boundary":{"delta":0.25,"levels":20}})json");
  fs::path dir = fresh_dir("boundary");
  run(cfg, dir.string(), 1);
  std::string summary = slurp(dir / "summary.csv");
  CHECK(summary_string(summary, "verdict") == "diverges");
  CHECK(summary_string(summary, "is_O_log") == "true");
  std::string shells = slurp(dir / "shells.csv");
  CHECK(shells.rfind("t,knorm_n_minus_1,partial_integral", 0) == 0);
}
