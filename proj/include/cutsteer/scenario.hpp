#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "cutsteer/monte_carlo.hpp"
#include "cutsteer/scvx_engine.hpp"

namespace cutsteer::scenario {

using nlohmann::json;

/// Parsed scenario. `effective` is the normalized JSON the problem was built
/// from; it is echoed into every JSON artifact.
struct ScenarioConfig {
  std::string name;
  json effective;
  scvx::SteeringProblem problem;
  scvx::ScvxParams params;
  std::optional<std::string> warm_start;  // preset whose solution seeds the reference
  int samples = mc::kDefaultSamples;
  std::uint64_t seed = 1;
  bool fast = false;
  double halo_period = 0.0;  // corrected orbit period when the scenario uses one
};

/// Strict parse: unknown keys and missing fields raise ErrorCode::schema with
/// the JSON path in the context.
ScenarioConfig parse_config(const json& doc);
ScenarioConfig load_config(const std::filesystem::path& path);

const std::vector<std::string>& preset_names();
json preset_json(const std::string& name, bool fast);
ScenarioConfig preset(const std::string& name, bool fast);

enum class Command { solve, validate, report };
Command parse_command(const std::string& name);

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  std::filesystem::path out = "out";
  scvx::IterationCallback on_iteration;
};

/// solve:    policy.json, iterations.csv, sigma_points.csv, effective_config.json
/// validate: mc_moments.csv, dv.csv, terminal_cloud.csv, validation.json (needs policy.json)
/// report:   moment_comparison.csv (needs policy.json and mc_moments.csv)
/// Returns the JSON summary also written for the command.
json run(Command command, const ScenarioConfig& config, const RunOptions& options);

/// Writes the standard CUT set of the given order and dimension as CSV.
int write_cut_info(int order, int dimension, const std::filesystem::path& out);

// --- artifacts ---------------------------------------------------------------

json policy_to_json(const ScenarioConfig& config, const scvx::ConvergedPolicy& result);

/// Policy plus the CUT means used as feedback centers.
struct StoredPolicy {
  dyn::ImpulsivePolicy policy;
  std::vector<dyn::Vec6> cut_means;
  std::vector<scvx::NodeMoments> moments;
  double dv99_ub = 0.0;
  double expected_fuel = 0.0;
  int iterations = 0;
  bool converged = false;
};
StoredPolicy policy_from_json(const json& doc);

}  // namespace cutsteer::scenario
