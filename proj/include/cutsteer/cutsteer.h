/* C interface to the moment steering library. */
#ifndef CUTSTEER_H
#define CUTSTEER_H

#include <stdint.h>

#if defined(_WIN32)
#define CUTSTEER_API __declspec(dllexport)
#else
#define CUTSTEER_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cutsteer_status {
  CUTSTEER_OK = 0,
  CUTSTEER_E_INVALID_ARGUMENT = 1,
  CUTSTEER_E_SCHEMA = 2,
  CUTSTEER_E_IO = 3,
  CUTSTEER_E_MISSING_POLICY = 4,
  CUTSTEER_E_UNKNOWN_PRESET = 5,
  CUTSTEER_E_SOLVER = 6,
  CUTSTEER_E_NUMERICAL = 7,
  CUTSTEER_E_SAMPLING = 8,
  CUTSTEER_E_INTERNAL = 9
} cutsteer_status;

typedef struct cutsteer_scenario cutsteer_scenario;

/* Library version, for example "1.0.0". */
CUTSTEER_API const char* cutsteer_version(void);

/* Names of the built-in presets, comma separated. */
CUTSTEER_API const char* cutsteer_preset_names(void);

/* On success *out owns a new scenario; release it with cutsteer_scenario_free. */
CUTSTEER_API cutsteer_status cutsteer_scenario_from_preset(const char* name, int fast, cutsteer_scenario** out);
CUTSTEER_API cutsteer_status cutsteer_scenario_from_file(const char* path, cutsteer_scenario** out);
CUTSTEER_API cutsteer_status cutsteer_scenario_from_json(const char* text, cutsteer_scenario** out);
CUTSTEER_API void cutsteer_scenario_free(cutsteer_scenario* scenario);

CUTSTEER_API cutsteer_status cutsteer_scenario_set_seed(cutsteer_scenario* scenario, uint64_t seed);
CUTSTEER_API cutsteer_status cutsteer_scenario_set_samples(cutsteer_scenario* scenario, int samples);
CUTSTEER_API cutsteer_status cutsteer_scenario_set_output(cutsteer_scenario* scenario, const char* directory);
/* Progress lines (one per solver iteration) go to stderr when enabled. */
CUTSTEER_API cutsteer_status cutsteer_scenario_set_verbose(cutsteer_scenario* scenario, int verbose);

/* Effective configuration as JSON. Valid until the scenario is freed or modified. */
CUTSTEER_API const char* cutsteer_scenario_config(const cutsteer_scenario* scenario);

/* command: "solve", "validate" or "report". Artifacts go to the output
   directory; the JSON summary is available from cutsteer_scenario_result. */
CUTSTEER_API cutsteer_status cutsteer_scenario_run(cutsteer_scenario* scenario, const char* command);
CUTSTEER_API const char* cutsteer_scenario_result(const cutsteer_scenario* scenario);

/* Writes sigma_set.csv for the standard CUT set; *count receives the point count. */
CUTSTEER_API cutsteer_status cutsteer_cut_info(int order, int dimension, const char* directory, int* count);

/* JSON {"code", "message", "context"} describing the last failure on this thread,
   or an empty string. */
CUTSTEER_API const char* cutsteer_last_error(void);

#ifdef __cplusplus
}
#endif

#endif
