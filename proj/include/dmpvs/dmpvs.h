// Copyright 2026 The dmpvs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the dmpvs switched visual-servoing core.
 *
 * All objects are opaque handles created by *_load / *_train / *_execute and
 * released by the matching *_free. Every fallible call returns a
 * dmpvs_status; on failure dmpvs_last_error() describes the problem (the
 * message is per-thread and valid until the next call on that thread).
 * Handles may be used from several threads as long as each handle is only
 * mutated by one at a time; all functions taking const handles are
 * read-only. */

#ifndef DMPVS_DMPVS_H_
#define DMPVS_DMPVS_H_

#include <stddef.h>

#if defined(DMPVS_BUILDING_LIBRARY)
#define DMPVS_API __attribute__((visibility("default")))
#else
#define DMPVS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dmpvs_status {
  DMPVS_OK = 0,
  DMPVS_ERR_CONFIG = 2,     /* malformed or invalid input file / argument */
  DMPVS_ERR_CHECK = 3,      /* a verification or certificate failed */
  DMPVS_ERR_DIVERGED = 4,   /* the simulation state became non-finite */
  DMPVS_ERR_CONTRACT = 10,  /* precondition violated by the caller */
  DMPVS_ERR_DEGENERATE = 11,
  DMPVS_ERR_ILL_POSED = 12, /* learning problem rank-deficient */
  DMPVS_ERR_IO = 13,
  DMPVS_ERR_INTERNAL = 14
} dmpvs_status;

typedef struct dmpvs_scenario dmpvs_scenario;
typedef struct dmpvs_model dmpvs_model;
typedef struct dmpvs_run dmpvs_run;

typedef struct dmpvs_dmp_gains {
  double alpha_v, beta_v, alpha_w, beta_w, tau, alpha_zp, alpha_zo;
} dmpvs_dmp_gains;

typedef struct dmpvs_learn_options {
  int n_p;      /* position basis functions */
  int n_o;      /* orientation basis functions */
  double ridge; /* Tikhonov weight, 0 = plain least squares */
} dmpvs_learn_options;

/* Position in meters, roll/pitch/yaw in degrees (R = Rz Ry Rx). */
typedef struct dmpvs_pose {
  double position[3];
  double rpy_deg[3];
} dmpvs_pose;

typedef struct dmpvs_train_stats {
  double residual;       /* least-squares objective at the optimum */
  double rmse;           /* position RMSE of the rollout vs. the demo */
  double path_length;    /* demo translation path length */
  double final_error;    /* ||e_p|| at the end of the rollout */
} dmpvs_train_stats;

DMPVS_API const char* dmpvs_version(void);
DMPVS_API const char* dmpvs_last_error(void);
DMPVS_API const char* dmpvs_status_name(dmpvs_status status);

/* Released with dmpvs_string_free. */
DMPVS_API void dmpvs_string_free(char* text);

/* ---- scenarios ---- */
DMPVS_API dmpvs_status dmpvs_scenario_load(const char* path, dmpvs_scenario** out);
DMPVS_API dmpvs_status dmpvs_scenario_parse(const char* json_text, const char* base_dir,
                                            dmpvs_scenario** out);
DMPVS_API void dmpvs_scenario_free(dmpvs_scenario* scenario);
/* 16 hex digits + NUL; `buf` must hold at least 17 bytes. */
DMPVS_API dmpvs_status dmpvs_scenario_config_hash(const dmpvs_scenario* scenario, char* buf,
                                                  size_t size);

/* ---- DMP models ---- */
DMPVS_API void dmpvs_dmp_gains_default(dmpvs_dmp_gains* gains);
DMPVS_API void dmpvs_learn_options_default(dmpvs_learn_options* options);

/* Minimum-jerk demonstration from `start` to `goal` (camera poses in the
 * world), sampled at rate_hz over `duration` seconds. */
DMPVS_API dmpvs_status dmpvs_model_train_min_jerk(const dmpvs_pose* start, const dmpvs_pose* goal,
                                                  double duration, double rate_hz,
                                                  const dmpvs_dmp_gains* gains,
                                                  const dmpvs_learn_options* options,
                                                  dmpvs_model** out);
/* Same, using the scenario's initial and goal poses. */
DMPVS_API dmpvs_status dmpvs_model_train_for_scenario(const dmpvs_scenario* scenario,
                                                      double duration, double rate_hz,
                                                      const dmpvs_dmp_gains* gains,
                                                      const dmpvs_learn_options* options,
                                                      dmpvs_model** out);
/* Demonstration CSV: t,e_p_0..5,xi_0..5,xi_dot_0..5. */
DMPVS_API dmpvs_status dmpvs_model_train_csv(const char* csv_path, const dmpvs_dmp_gains* gains,
                                             const dmpvs_learn_options* options,
                                             dmpvs_model** out);
/* Only meaningful for trained (not loaded) models. */
DMPVS_API dmpvs_status dmpvs_model_train_stats(const dmpvs_model* model,
                                               dmpvs_train_stats* stats);
DMPVS_API dmpvs_status dmpvs_model_save(const dmpvs_model* model, const char* path);
DMPVS_API dmpvs_status dmpvs_model_load(const char* path, dmpvs_model** out);
DMPVS_API void dmpvs_model_free(dmpvs_model* model);

/* ---- runs ---- */
/* `model` may be NULL to use the one the scenario references. On
 * DMPVS_ERR_DIVERGED *out is still set and holds the records up to the
 * failing tick. */
DMPVS_API dmpvs_status dmpvs_run_execute(const dmpvs_scenario* scenario, const dmpvs_model* model,
                                         dmpvs_run** out);
DMPVS_API void dmpvs_run_free(dmpvs_run* run);
/* Nonzero iff converged, dwell verified and envelopes passed. */
DMPVS_API int dmpvs_run_ok(const dmpvs_run* run);
DMPVS_API size_t dmpvs_run_switch_count(const dmpvs_run* run);
DMPVS_API size_t dmpvs_run_tick_count(const dmpvs_run* run);
/* Borrowed strings, valid for the lifetime of the handle. */
DMPVS_API const char* dmpvs_run_summary_json(const dmpvs_run* run);
DMPVS_API const char* dmpvs_run_csv(const dmpvs_run* run);
/* Writes run.csv, summary.json, manifest.json and scenario.json into
 * `out_dir` (created if missing). `scenario_path` is recorded in the
 * manifest and may be NULL. */
DMPVS_API dmpvs_status dmpvs_run_write(const dmpvs_run* run, const char* out_dir,
                                       const char* scenario_path);

/* ---- certificates ---- */
/* JSON report of gain certificates, Lyapunov constants, dwell time and
 * ultimate bound. Returns DMPVS_OK when the DMP certificate passes and the
 * dwell time is finite, DMPVS_ERR_CHECK otherwise; the report is produced
 * in both cases. `model` may be NULL. */
DMPVS_API dmpvs_status dmpvs_check(const dmpvs_scenario* scenario, const dmpvs_model* model,
                                   char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* DMPVS_DMPVS_H_ */
