#include "cutsteer/cutsteer.h"

#include <cstdio>
#include <exception>
#include <new>
#include <string>

#include "cutsteer/error.hpp"
#include "cutsteer/scenario.hpp"

struct cutsteer_scenario {
  cutsteer::scenario::ScenarioConfig config;
  cutsteer::scenario::RunOptions options;
  bool verbose = false;
  std::string config_text;
  std::string result_text;
};

namespace {

using cutsteer::ErrorCode;
using nlohmann::json;

thread_local std::string last_error;

cutsteer_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::invalid_order:
    case ErrorCode::unsupported_dimension:
    case ErrorCode::shape:
    case ErrorCode::invalid_weight:
    case ErrorCode::unsupported_elements:
      return CUTSTEER_E_INVALID_ARGUMENT;
    case ErrorCode::schema: return CUTSTEER_E_SCHEMA;
    case ErrorCode::io: return CUTSTEER_E_IO;
    case ErrorCode::missing_policy: return CUTSTEER_E_MISSING_POLICY;
    case ErrorCode::unknown_preset: return CUTSTEER_E_UNKNOWN_PRESET;
    case ErrorCode::solver:
    case ErrorCode::binding:
    case ErrorCode::build:
    case ErrorCode::reference:
      return CUTSTEER_E_SOLVER;
    case ErrorCode::construction:
    case ErrorCode::degenerate_axis:
    case ErrorCode::propagation:
    case ErrorCode::periodicity:
      return CUTSTEER_E_NUMERICAL;
    case ErrorCode::sampling: return CUTSTEER_E_SAMPLING;
  }
  return CUTSTEER_E_INTERNAL;
}

cutsteer_status fail(const std::string& code, const std::string& message, const std::string& context,
                     cutsteer_status status) {
  last_error = json{{"code", code}, {"message", message}, {"context", context}}.dump();
  return status;
}

template <typename F>
cutsteer_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return CUTSTEER_OK;
  } catch (const cutsteer::Error& e) {
    return fail(cutsteer::error_code_name(e.code()), e.what(), e.context(), status_of(e.code()));
  } catch (const std::bad_alloc&) {
    return fail("internal", "out of memory", "", CUTSTEER_E_INTERNAL);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), "", CUTSTEER_E_INTERNAL);
  }
}

cutsteer_status null_argument(const char* name) {
  return fail("invalid_argument", "null argument", name, CUTSTEER_E_INVALID_ARGUMENT);
}

cutsteer_status make(cutsteer::scenario::ScenarioConfig config, cutsteer_scenario** out) {
  auto* s = new cutsteer_scenario;
  s->config = std::move(config);
  s->config_text = s->config.effective.dump(2);
  *out = s;
  return CUTSTEER_OK;
}

}  // namespace

extern "C" {

const char* cutsteer_version(void) { return "1.0.0"; }

const char* cutsteer_preset_names(void) {
  static const std::string names = [] {
    std::string s;
    for (const auto& n : cutsteer::scenario::preset_names()) s += (s.empty() ? "" : ",") + n;
    return s;
  }();
  return names.c_str();
}

cutsteer_status cutsteer_scenario_from_preset(const char* name, int fast, cutsteer_scenario** out) {
  if (!name) return null_argument("name");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] { make(cutsteer::scenario::preset(name, fast != 0), out); });
}

cutsteer_status cutsteer_scenario_from_file(const char* path, cutsteer_scenario** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] { make(cutsteer::scenario::load_config(path), out); });
}

cutsteer_status cutsteer_scenario_from_json(const char* text, cutsteer_scenario** out) {
  if (!text) return null_argument("text");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::exception& e) {
      throw cutsteer::Error(ErrorCode::schema, "config is not valid JSON", e.what());
    }
    make(cutsteer::scenario::parse_config(doc), out);
  });
}

void cutsteer_scenario_free(cutsteer_scenario* scenario) { delete scenario; }

cutsteer_status cutsteer_scenario_set_seed(cutsteer_scenario* scenario, uint64_t seed) {
  if (!scenario) return null_argument("scenario");
  scenario->options.seed = seed;
  return CUTSTEER_OK;
}

cutsteer_status cutsteer_scenario_set_samples(cutsteer_scenario* scenario, int samples) {
  if (!scenario) return null_argument("scenario");
  if (samples < 2)
    return fail("invalid_argument", "need at least two samples", std::to_string(samples), CUTSTEER_E_INVALID_ARGUMENT);
  scenario->options.samples = samples;
  return CUTSTEER_OK;
}

cutsteer_status cutsteer_scenario_set_output(cutsteer_scenario* scenario, const char* directory) {
  if (!scenario) return null_argument("scenario");
  if (!directory || !*directory) return null_argument("directory");
  scenario->options.out = directory;
  return CUTSTEER_OK;
}

cutsteer_status cutsteer_scenario_set_verbose(cutsteer_scenario* scenario, int verbose) {
  if (!scenario) return null_argument("scenario");
  scenario->verbose = verbose != 0;
  if (scenario->verbose) {
    scenario->options.on_iteration = [](const cutsteer::scvx::IterationRecord& r) {
      std::fprintf(stderr, "iter %3d %s J=%.10g chi=%.3e rho=%.3f delta=%.3e w=%.3e %s\n", r.iteration,
                   r.accepted ? "accept" : "reject", r.j_nl, r.chi, r.rho, r.delta, r.w_p, r.solver_status.c_str());
    };
  } else {
    scenario->options.on_iteration = nullptr;
  }
  return CUTSTEER_OK;
}

const char* cutsteer_scenario_config(const cutsteer_scenario* scenario) {
  return scenario ? scenario->config_text.c_str() : "";
}

cutsteer_status cutsteer_scenario_run(cutsteer_scenario* scenario, const char* command) {
  if (!scenario) return null_argument("scenario");
  if (!command) return null_argument("command");
  return guarded([&] {
    const auto cmd = cutsteer::scenario::parse_command(command);
    scenario->result_text = cutsteer::scenario::run(cmd, scenario->config, scenario->options).dump(2);
  });
}

const char* cutsteer_scenario_result(const cutsteer_scenario* scenario) {
  return scenario ? scenario->result_text.c_str() : "";
}

cutsteer_status cutsteer_cut_info(int order, int dimension, const char* directory, int* count) {
  if (!directory) return null_argument("directory");
  return guarded([&] {
    const int n = cutsteer::scenario::write_cut_info(order, dimension, directory);
    if (count) *count = n;
  });
}

const char* cutsteer_last_error(void) { return last_error.c_str(); }

}  // extern "C"
