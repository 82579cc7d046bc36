#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "ringmod/boundary.hpp"
#include "ringmod/mapping.hpp"

namespace ringmod {

enum class Command { Modulus, Jensen, Dilatation, Theorem2, Boundary };

const char* command_name(Command c);

// One batch computation, parsed from a JSON config file. Unknown commands,
// unknown catalog names and violated invariants (p > n-1, eps < eps0) fail
// at parse time.
struct RunConfig {
  Command command = Command::Modulus;
  Metric metric;
  Metric target_metric;
  std::optional<MapModel> map;
  WeightField weight;
  Pt center = Pt::Zero();
  double eps = 0.5;
  double eps0 = 1.0;
  double p = 2.0;
  GridOptions grid;
  DomainIndicator domain;
  double boundary_delta = 0.25;
  int boundary_levels = 20;
  int jensen_draws = 100;
  std::uint64_t seed = 0;
  nlohmann::json resolved;  // config with defaults filled, for provenance

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig from_json_text(const std::string& text);
  static RunConfig from_file(const std::string& path);
};

// Executes the configured computation and writes summary.csv, shells.csv and
// profile.dat under out_dir (created if absent). Deterministic output bytes
// for a fixed config, seed and thread count.
void run(const RunConfig& config, const std::string& out_dir, int threads,
         std::optional<std::uint64_t> seed_override = std::nullopt);

// Built-in verification suite (compact versions of the shipped acceptance
// checks at default grids). Writes check.csv plus one line per check to
// stdout; returns the number of failed checks.
int run_check(const std::string& out_dir, int threads, std::uint64_t seed);

}  // namespace ringmod
