/**
 * Copyright 2026 The tabcl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef TABCL_TABCL_H
#define TABCL_TABCL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(TABCL_BUILDING_LIBRARY)
#define TABCL_API __declspec(dllexport)
#else
#define TABCL_API __declspec(dllimport)
#endif
#else
#define TABCL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every fallible call returns a status; on failure the message is available
 * from tabcl_last_error() on the same thread until the next call. */
typedef enum tabcl_status {
  TABCL_OK = 0,
  TABCL_INVALID_ARGUMENT = 1, /* null handle, bad enum, buffer too small */
  TABCL_CONFIG_ERROR = 2,     /* unknown key, value out of range */
  TABCL_IO_ERROR = 3,         /* unreadable or unwritable path */
  TABCL_INGEST_ERROR = 4,     /* malformed dataset or result file */
  TABCL_SHAPE_ERROR = 5,      /* dimension mismatch */
  TABCL_CONTRACT_ERROR = 6,   /* call made in the wrong state */
  TABCL_NUMERIC_ERROR = 7,    /* non-finite values; also an aborted run */
  TABCL_UNDEFINED = 8,        /* the requested value does not exist */
  TABCL_INTERNAL_ERROR = 9
} tabcl_status;

typedef enum tabcl_run_state {
  TABCL_RUN_COMPLETED = 0,
  TABCL_RUN_ABORTED = 1, /* non-finite loss mid-run */
  TABCL_RUN_FAILED = 2   /* never started: bad config or data */
} tabcl_run_state;

typedef enum tabcl_normalizer_kind {
  TABCL_NORMALIZER_GLOBAL = 0,
  TABCL_NORMALIZER_LOCAL = 1,
  TABCL_NORMALIZER_CN = 2,
  TABCL_NORMALIZER_CLEAN = 3
} tabcl_normalizer_kind;

TABCL_API const char* tabcl_version(void);
TABCL_API const char* tabcl_last_error(void);
TABCL_API const char* tabcl_status_name(tabcl_status status);

/* String outputs: `buffer` receives a NUL-terminated copy when `capacity`
 * is large enough; `needed` (optional) always receives the full size
 * including the terminator. Pass buffer = NULL, capacity = 0 to query. */

/* ---- configuration ---- */

typedef struct tabcl_config tabcl_config;

TABCL_API tabcl_status tabcl_config_create(tabcl_config** out);
TABCL_API tabcl_status tabcl_config_clone(const tabcl_config* config, tabcl_config** out);
TABCL_API void tabcl_config_destroy(tabcl_config* config);

/* Applies the keys of a config file / text on top of the current values. */
TABCL_API tabcl_status tabcl_config_load_file(tabcl_config* config, const char* path);
TABCL_API tabcl_status tabcl_config_parse(tabcl_config* config, const char* text);
TABCL_API tabcl_status tabcl_config_set(tabcl_config* config, const char* key, const char* value);
TABCL_API tabcl_status tabcl_config_get(const tabcl_config* config, const char* key, char* buffer,
                                        size_t capacity, size_t* needed);
TABCL_API tabcl_status tabcl_config_validate(const tabcl_config* config);
/* Every key with its resolved value, one "key = value" line each. */
TABCL_API tabcl_status tabcl_config_text(const tabcl_config* config, char* buffer, size_t capacity,
                                         size_t* needed);

/* Directory a run with this config writes to: output.dir if absolute,
 * otherwise below $TABCL_OUTPUT_ROOT (default "runs"); an empty output.dir
 * uses the run label. */
TABCL_API tabcl_status tabcl_config_output_directory(const tabcl_config* config, char* buffer,
                                                     size_t capacity, size_t* needed);

/* ---- single runs ---- */

typedef struct tabcl_run_log tabcl_run_log;

/* Runs the configured experiment. On TABCL_OK the run completed. On
 * TABCL_NUMERIC_ERROR the run was aborted by a non-finite loss and *out
 * still holds the partial log. Other errors leave *out NULL. */
TABCL_API tabcl_status tabcl_run(const tabcl_config* config, tabcl_run_log** out);
TABCL_API void tabcl_run_log_destroy(tabcl_run_log* log);

TABCL_API tabcl_status tabcl_run_log_state(const tabcl_run_log* log, tabcl_run_state* state);
TABCL_API tabcl_status tabcl_run_log_experiences(const tabcl_run_log* log, size_t* planned,
                                                 size_t* completed);
TABCL_API tabcl_status tabcl_run_log_is_oracle(const tabcl_run_log* log, int* oracle);
TABCL_API tabcl_status tabcl_run_log_error(const tabcl_run_log* log, char* buffer, size_t capacity,
                                           size_t* needed);

/* Cell (t, t') of the final accuracy / AUROC tables, 0-based, t' <= t.
 * TABCL_UNDEFINED when the cell is absent (e.g. single-class test set). */
TABCL_API tabcl_status tabcl_run_log_accuracy(const tabcl_run_log* log, size_t t, size_t t_prime,
                                              double* out);
TABCL_API tabcl_status tabcl_run_log_auroc(const tabcl_run_log* log, size_t t, size_t t_prime,
                                           double* out);
TABCL_API tabcl_status tabcl_run_log_average_accuracy(const tabcl_run_log* log, size_t t,
                                                      double* out);
/* TABCL_UNDEFINED for t = 0. */
TABCL_API tabcl_status tabcl_run_log_average_forgetting(const tabcl_run_log* log, size_t t,
                                                        double* out);

TABCL_API tabcl_status tabcl_run_log_metrics_csv(const tabcl_run_log* log, char* buffer,
                                                 size_t capacity, size_t* needed);
TABCL_API tabcl_status tabcl_run_log_summary_json(const tabcl_run_log* log, char* buffer,
                                                  size_t capacity, size_t* needed);
/* metrics.csv, summary.json and config.cfg into `directory`. */
TABCL_API tabcl_status tabcl_run_log_write(const tabcl_run_log* log, const char* directory);

/* ---- grids ---- */

typedef struct tabcl_grid tabcl_grid;

TABCL_API tabcl_status tabcl_grid_create(tabcl_grid** out);
TABCL_API void tabcl_grid_destroy(tabcl_grid* grid);
TABCL_API tabcl_status tabcl_grid_add(tabcl_grid* grid, const tabcl_config* config);
/* Adds the cartesian product of `axes` ("key=v1,v2,...") applied to `base`. */
TABCL_API tabcl_status tabcl_grid_add_product(tabcl_grid* grid, const tabcl_config* base,
                                              const char* const* axes, size_t axis_count);
TABCL_API tabcl_status tabcl_grid_size(const tabcl_grid* grid, size_t* size);
/* Runs every config (up to `threads` at once), writing per-run
 * subdirectories plus comparison.csv and report.csv under `directory`.
 * Returns TABCL_OK when the grid executed, even if some runs failed;
 * `failed` (optional) receives the number of runs that did not complete. */
TABCL_API tabcl_status tabcl_grid_run(tabcl_grid* grid, const char* directory, size_t threads,
                                      size_t* failed);
TABCL_API tabcl_status tabcl_grid_run_state(const tabcl_grid* grid, size_t index,
                                            tabcl_run_state* state);
TABCL_API tabcl_status tabcl_grid_run_directory(const tabcl_grid* grid, size_t index, char* buffer,
                                                size_t capacity, size_t* needed);

/* Aggregates every summary.json below `root` into comparison.csv and
 * report.csv inside `out_directory`. */
TABCL_API tabcl_status tabcl_report(const char* root, const char* out_directory, size_t* runs);

/* ---- building blocks ---- */

typedef struct tabcl_normalizer tabcl_normalizer;

/* Hyperparameters: eta (CLeAN), lambda (CN), epsilon_cn, epsilon_den. */
TABCL_API tabcl_status tabcl_normalizer_create(tabcl_normalizer_kind kind, size_t features,
                                               double eta, double lambda, double epsilon_cn,
                                               double epsilon_den, tabcl_normalizer** out);
TABCL_API void tabcl_normalizer_destroy(tabcl_normalizer* normalizer);
/* Row-major rows x features. The global normalizer takes its bounds from
 * the first call and ignores later ones. */
TABCL_API tabcl_status tabcl_normalizer_update(tabcl_normalizer* normalizer, const double* data,
                                               size_t rows, size_t features);
TABCL_API tabcl_status tabcl_normalizer_transform(const tabcl_normalizer* normalizer,
                                                  const double* data, size_t rows, size_t features,
                                                  double* out);
TABCL_API tabcl_status tabcl_normalizer_version(const tabcl_normalizer* normalizer,
                                                uint64_t* version);

/* TABCL_UNDEFINED when only one class is present. */
TABCL_API tabcl_status tabcl_auroc(const double* scores, const uint8_t* labels, size_t n,
                                   double* out);
TABCL_API tabcl_status tabcl_agem_project(const double* g, const double* g_ref, size_t n,
                                          double* out);

#ifdef __cplusplus
}
#endif

#endif /* TABCL_TABCL_H */
