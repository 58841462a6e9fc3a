#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "cutsteer/cutsteer.h"
#include "cutsteer/error.hpp"
#include "cutsteer/scenario.hpp"
#include "doctest.h"

using namespace cutsteer;
using namespace cutsteer::scenario;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cutsteer_test_" + name);
  fs::remove_all(p);
  return p;
}

ErrorCode code_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::invalid_argument;
}

std::string context_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const Error& e) {
    return e.context();
  }
  return {};
}

// Free-space scenario that solves in well under a second.
json tiny() {
  return json{{"name", "tiny"},
              {"model", {{"kind", "free_space"}}},
              {"initial",
               {{"mean", {{"nd", {0, 0, 0, 0, 0, 0}}}},
                {"three_sigma", {{"position", {{"nd", 0.03}}}, {"velocity", {{"nd", 0.03}}}}}}},
              {"grid", {{"nodes", 2}, {"duration", {{"nd", 2.0}}}}},
              {"cut_order", 4},
              {"objective", "expected_fuel"},
              {"constraints", {{{"kind", "mean_eq"}, {"node", "final"}, {"target", {{"nd", {0.2, 0, 0, 0.1, 0, 0}}}}}}},
              {"slack", "final_segment"},
              {"guess", "ballistic"},
              {"scvx", {{"preset", "two_body"}}},
              {"monte_carlo", {{"samples", 400}, {"seed", 3}}}};
}

}  // namespace

TEST_CASE("two-body preset matches the tabulated case") {
  const ScenarioConfig c = preset("twobody_unskew", false);
  const auto& m = c.problem.model;
  CHECK(m.kind == dyn::DynamicsModel::Kind::two_body);
  CHECK(m.mu == doctest::Approx(398600.0 / std::pow(5000.0, 3) * std::pow(m.time_unit_s, 2)));
  CHECK(c.problem.nodes() == 9);
  CHECK(c.problem.initial.mean(0) * m.length_unit_km == doctest::Approx(8000.0));
  CHECK(c.problem.initial.mean(4) * m.velocity_unit_km_s() == doctest::Approx(6.1130));
  CHECK(std::sqrt(c.problem.initial.covariance(0, 0)) * 3.0 * m.length_unit_km == doctest::Approx(50.0));
  CHECK(std::sqrt(c.problem.initial.covariance(5, 5)) * 3.0 * m.velocity_unit_km_s() == doctest::Approx(0.01));
  CHECK(c.problem.initial.lead_in * m.time_unit_s == doctest::Approx(1.9781 * 3600.0));
  CHECK((c.problem.grid.epochs.back() - c.problem.grid.epochs.front()) * m.time_unit_s ==
        doctest::Approx(1.9781 * 3600.0));
  REQUIRE(c.problem.constraints.size() == 2);
  CHECK(c.problem.constraints[1].kind == scvx::MomentKind::standardized_moment_box);
  CHECK(c.problem.constraints[1].bound == 0.01);
  CHECK(c.problem.slack == scvx::SlackPlacement::final_segment);
  CHECK(c.params.eta1 == 0.85);
  CHECK(c.samples == mc::kDefaultSamples);
  CHECK(preset("twobody_unskew", true).samples == mc::kFastSamples);
}

TEST_CASE("halo presets") {
  const ScenarioConfig c = preset("halo_cut4", false);
  const auto& m = c.problem.model;
  CHECK(m.kind == dyn::DynamicsModel::Kind::cr3bp);
  CHECK(c.problem.nodes() == 19);
  CHECK(c.problem.cut_order == 4);
  CHECK(c.problem.grid.epochs.back() == doctest::Approx(6.5379).epsilon(1e-4));
  CHECK(std::sqrt(c.problem.initial.covariance(0, 0)) * 3.0 * m.length_unit_km == doctest::Approx(30.0));
  CHECK(std::sqrt(c.problem.initial.covariance(3, 3)) * 3.0 * m.velocity_unit_km_s() * 1000.0 == doctest::Approx(3.0));
  CHECK(c.problem.slack == scvx::SlackPlacement::all_segments);
  CHECK(c.params.eps_feas == 1e-7);
  bool found = false;
  for (const auto& con : c.problem.constraints)
    if (con.kind == scvx::MomentKind::sqrt_cov_norm_le) {
      found = true;
      CHECK(con.node == scvx::kAllNodes);
      CHECK(con.bound * 3.0 * m.length_unit_km == doctest::Approx(2000.0));
    }
  CHECK(found);
  // the corrected halo stays close to the tabulated one
  CHECK(std::abs(c.problem.initial.mean(2) + 0.1247) < 1e-4);
  CHECK(std::abs(c.problem.initial.mean(4) + 0.2087) < 1e-4);

  const ScenarioConfig s6 = preset("halo_cut6_skew_kurt", false);
  CHECK(s6.problem.cut_order == 6);
  CHECK(s6.warm_start == std::optional<std::string>("halo_cut4"));
  int boxes = 0;
  for (const auto& con : s6.problem.constraints)
    if (con.kind == scvx::MomentKind::standardized_moment_box) {
      ++boxes;
      if (con.order == 4) CHECK(con.center == 3.0);
      CHECK(con.bound == (con.order == 3 ? 0.01 : 0.5));
    }
  CHECK(boxes == 2);
  CHECK_THROWS_AS(preset("nope", false), Error);
}

TEST_CASE("effective config round-trips") {
  for (const auto& name : preset_names()) {
    const ScenarioConfig a = preset(name, true);
    const ScenarioConfig b = parse_config(json::parse(a.effective.dump()));
    CHECK(a.effective == b.effective);
    CHECK(a.problem.grid.epochs == b.problem.grid.epochs);
    CHECK(a.problem.initial.mean == b.problem.initial.mean);
  }
}

TEST_CASE("schema errors") {
  json missing = tiny();
  missing.erase("grid");
  CHECK(code_of(missing) == ErrorCode::schema);
  CHECK(context_of(missing).find("$.grid") != std::string::npos);

  json unknown = tiny();
  unknown["extra"] = 1;
  CHECK(context_of(unknown).find("$.extra") != std::string::npos);

  json unit = tiny();
  unit["grid"]["duration"] = {{"km", 2.0}};
  CHECK(context_of(unit).find("$.grid.duration.km") != std::string::npos);

  json two = tiny();
  two["grid"]["nodes"] = 1;
  two["cut_order"] = 5;
  const std::string ctx = context_of(two);
  CHECK(ctx.find("$.grid.nodes") != std::string::npos);
  CHECK(ctx.find("$.cut_order") != std::string::npos);

  json periods = tiny();
  periods["grid"]["duration"] = {{"periods", 2.0}};
  CHECK(context_of(periods).find("reference orbit") != std::string::npos);

  CHECK(code_of(json::array()) == ErrorCode::schema);
}

TEST_CASE("solve, validate and report a small scenario") {
  const fs::path out = scratch("tiny");
  const ScenarioConfig cfg = parse_config(tiny());
  RunOptions opt;
  opt.out = out;
  try {
    run(Command::validate, cfg, opt);
    FAIL("validate needs a policy");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::missing_policy);
  }
  const json solved = run(Command::solve, cfg, opt);
  CHECK(solved["converged"] == true);
  for (const char* f : {"policy.json", "iterations.csv", "sigma_points.csv", "effective_config.json"})
    CHECK(fs::exists(out / f));
  const json validated = run(Command::validate, cfg, opt);
  CHECK(validated["samples"] == 400);
  CHECK(validated["flagged"] == 0);
  for (const char* f : {"mc_moments.csv", "dv.csv", "terminal_cloud.csv", "validation.json"}) CHECK(fs::exists(out / f));
  // the expected-fuel estimate from sigma points matches sampling for this linear case
  CHECK(std::abs(validated["dv"]["mean_vs_expected_fuel"].get<double>()) < 0.02);
  const json reported = run(Command::report, cfg, opt);
  CHECK(reported["rows"] == 2 * 6 * 4);

  // policies read back identically
  std::ifstream in(out / "policy.json");
  const StoredPolicy stored = policy_from_json(json::parse(in));
  CHECK(stored.converged);
  CHECK(stored.policy.segments() == 1);

  // a changed scenario does not reuse the policy
  json other = tiny();
  other["grid"]["duration"] = {{"nd", 3.0}};
  CHECK_THROWS_AS(run(Command::validate, parse_config(other), opt), Error);
  // a changed sample count does
  json more = tiny();
  more["monte_carlo"]["samples"] = 500;
  CHECK(run(Command::validate, parse_config(more), opt)["samples"] == 500);
  fs::remove_all(out);
}

TEST_CASE("cut-info writes the sigma set") {
  const fs::path out = scratch("cutinfo");
  CHECK(write_cut_info(6, 6, out) == 137);
  std::ifstream in(out / "sigma_set.csv");
  int lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  CHECK(lines == 138);
  CHECK(write_cut_info(4, 6, out) == 76);
  CHECK_THROWS_AS(write_cut_info(5, 6, out), Error);
  fs::remove_all(out);
}

TEST_CASE("C interface") {
  cutsteer_scenario* s = nullptr;
  CHECK(cutsteer_scenario_from_preset("nope", 0, &s) == CUTSTEER_E_UNKNOWN_PRESET);
  CHECK(s == nullptr);
  const json err = json::parse(cutsteer_last_error());
  CHECK(err["code"] == "unknown_preset");
  CHECK(err["context"] == "nope");

  CHECK(cutsteer_scenario_from_json("{not json", &s) == CUTSTEER_E_SCHEMA);
  CHECK(cutsteer_scenario_from_json(nullptr, &s) == CUTSTEER_E_INVALID_ARGUMENT);
  CHECK(cutsteer_scenario_from_file("/nonexistent/x.json", &s) == CUTSTEER_E_IO);

  REQUIRE(cutsteer_scenario_from_json(tiny().dump().c_str(), &s) == CUTSTEER_OK);
  CHECK(std::string(cutsteer_last_error()).empty());
  CHECK(json::parse(cutsteer_scenario_config(s)) == tiny());
  const fs::path out = scratch("capi");
  CHECK(cutsteer_scenario_set_output(s, out.c_str()) == CUTSTEER_OK);
  CHECK(cutsteer_scenario_set_samples(s, 1) == CUTSTEER_E_INVALID_ARGUMENT);
  CHECK(cutsteer_scenario_run(s, "validate") == CUTSTEER_E_MISSING_POLICY);
  CHECK(cutsteer_scenario_run(s, "dance") == CUTSTEER_E_INVALID_ARGUMENT);
  CHECK(cutsteer_scenario_run(s, "solve") == CUTSTEER_OK);
  CHECK(cutsteer_scenario_set_seed(s, 12) == CUTSTEER_OK);
  CHECK(cutsteer_scenario_set_samples(s, 300) == CUTSTEER_OK);
  REQUIRE(cutsteer_scenario_run(s, "validate") == CUTSTEER_OK);
  const json res = json::parse(cutsteer_scenario_result(s));
  CHECK(res["seed"] == 12);
  CHECK(res["samples"] == 300);
  cutsteer_scenario_free(s);

  int count = 0;
  CHECK(cutsteer_cut_info(4, 3, out.c_str(), &count) == CUTSTEER_OK);
  CHECK(count == cut::cut_standard(4, 3).count());
  CHECK(std::string(cutsteer_preset_names()).find("halo_cut4") != std::string::npos);
  fs::remove_all(out);
}
