#include <CLI11.hpp>
#include <cstdio>
#include <string>

#include "cutsteer/cutsteer.h"

namespace {

int report_failure(cutsteer_status status) {
  std::fprintf(stderr, "%s\n", cutsteer_last_error());
  return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Statistical moment steering with conjugate unscented transform sigma points"};
  app.set_version_flag("--version", std::string(cutsteer_version()));
  app.require_subcommand(1);

  std::string config, preset, out = "out";
  bool fast = false, quiet = false;
  uint64_t seed = 0;
  int samples = 0;

  auto add_scenario = [&](CLI::App* cmd, bool sampling) {
    auto* c = cmd->add_option("--config", config, "scenario JSON file")->check(CLI::ExistingFile);
    auto* p = cmd->add_option("--preset", preset, "built-in scenario: " + std::string(cutsteer_preset_names()));
    c->excludes(p);
    cmd->add_flag("--fast", fast, "desk variant of a preset");
    cmd->add_option("--out", out, "output directory")->capture_default_str();
    cmd->add_flag("--quiet", quiet, "no per-iteration progress");
    if (sampling) {
      cmd->add_option("--seed", seed, "Monte Carlo seed (overrides the config)");
      cmd->add_option("--samples", samples, "Monte Carlo sample count (overrides the config)")
          ->check(CLI::Range(2, 100000000));
    }
  };

  auto* solve = app.add_subcommand("solve", "solve the steering problem and write policy.json");
  auto* validate = app.add_subcommand("validate", "Monte Carlo check of a solved policy");
  auto* report = app.add_subcommand("report", "compare CUT and Monte Carlo moments");
  add_scenario(solve, false);
  add_scenario(validate, true);
  add_scenario(report, false);

  int order = 6, dim = 6;
  auto* cut = app.add_subcommand("cut-info", "write a standard CUT sigma set");
  cut->add_option("--order", order, "4 or 6")->capture_default_str();
  cut->add_option("--dim", dim, "dimension")->capture_default_str();
  cut->add_option("--out", out, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (cut->parsed()) {
    int count = 0;
    const cutsteer_status st = cutsteer_cut_info(order, dim, out.c_str(), &count);
    if (st != CUTSTEER_OK) return report_failure(st);
    std::printf("{\"command\": \"cut-info\", \"order\": %d, \"dimension\": %d, \"points\": %d}\n", order, dim, count);
    return 0;
  }

  CLI::App* cmd = app.get_subcommands().front();
  if (config.empty() && preset.empty()) {
    std::fprintf(stderr,
                 "{\"code\": \"invalid_argument\", \"message\": \"one of --config or --preset is required\", "
                 "\"context\": \"\"}\n");
    return CUTSTEER_E_INVALID_ARGUMENT;
  }

  cutsteer_scenario* scenario = nullptr;
  cutsteer_status st = preset.empty() ? cutsteer_scenario_from_file(config.c_str(), &scenario)
                                      : cutsteer_scenario_from_preset(preset.c_str(), fast ? 1 : 0, &scenario);
  if (st != CUTSTEER_OK) return report_failure(st);
  st = cutsteer_scenario_set_output(scenario, out.c_str());
  if (st == CUTSTEER_OK) st = cutsteer_scenario_set_verbose(scenario, quiet ? 0 : 1);
  const CLI::Option* seed_opt = cmd->get_option_no_throw("--seed");
  const CLI::Option* samples_opt = cmd->get_option_no_throw("--samples");
  if (st == CUTSTEER_OK && seed_opt && seed_opt->count()) st = cutsteer_scenario_set_seed(scenario, seed);
  if (st == CUTSTEER_OK && samples_opt && samples_opt->count()) st = cutsteer_scenario_set_samples(scenario, samples);
  if (st == CUTSTEER_OK) st = cutsteer_scenario_run(scenario, cmd->get_name().c_str());
  if (st != CUTSTEER_OK) {
    cutsteer_scenario_free(scenario);
    return report_failure(st);
  }
  std::printf("%s\n", cutsteer_scenario_result(scenario));
  cutsteer_scenario_free(scenario);
  return 0;
}
