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

/* Exercises the shared library through its C header only. */

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "tabcl/tabcl.h"

static int failures = 0;

#define EXPECT(cond)                                                     \
  do {                                                                   \
    if (!(cond)) {                                                       \
      fprintf(stderr, "%s:%d: expectation failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                        \
    }                                                                    \
  } while (0)

#define EXPECT_OK(call)                                                  \
  do {                                                                   \
    tabcl_status s_ = (call);                                            \
    if (s_ != TABCL_OK) {                                                \
      fprintf(stderr, "%s:%d: %s returned %s: %s\n", __FILE__, __LINE__, #call, \
              tabcl_status_name(s_), tabcl_last_error());                \
      ++failures;                                                        \
    }                                                                    \
  } while (0)

static const char* kTinyConfig =
    "seed = 3\n"
    "[synthetic]\n"
    "n_experiences = 2\n"
    "rows_per_experience = 200\n"
    "n_features = 4\n"
    "scale_jump_at = 1\n"
    "[training]\n"
    "epochs = 2\n"
    "batch_size = 50\n"
    "hidden_layers = 2\n"
    "hidden_width = 8\n"
    "learning_rate = 0.01\n";

static void test_errors(void) {
  tabcl_config* cfg = NULL;
  EXPECT(tabcl_config_create(NULL) == TABCL_INVALID_ARGUMENT);
  EXPECT_OK(tabcl_config_create(&cfg));
  EXPECT(tabcl_config_set(cfg, "no.such.key", "1") == TABCL_CONFIG_ERROR);
  EXPECT(strstr(tabcl_last_error(), "no.such.key") != NULL);
  EXPECT(tabcl_config_set(cfg, "training.epochs", "many") == TABCL_CONFIG_ERROR);
  EXPECT(tabcl_config_load_file(cfg, "/nonexistent/run.cfg") == TABCL_IO_ERROR);
  EXPECT_OK(tabcl_config_set(cfg, "normalizer.eta", "2"));
  EXPECT(tabcl_config_validate(cfg) == TABCL_CONFIG_ERROR);
  EXPECT(strcmp(tabcl_status_name(TABCL_SHAPE_ERROR), "shape error") == 0);
  tabcl_config_destroy(cfg);
  tabcl_config_destroy(NULL);
}

static void test_strings(void) {
  tabcl_config* cfg = NULL;
  size_t needed = 0;
  char small[4];
  char value[64];
  EXPECT_OK(tabcl_config_create(&cfg));
  EXPECT_OK(tabcl_config_set(cfg, "seed", "12345"));
  EXPECT_OK(tabcl_config_get(cfg, "seed", NULL, 0, &needed));
  EXPECT(needed == 6);
  EXPECT(tabcl_config_get(cfg, "seed", small, sizeof small, &needed) != TABCL_OK);
  EXPECT_OK(tabcl_config_get(cfg, "seed", value, sizeof value, &needed));
  EXPECT(strcmp(value, "12345") == 0);
  tabcl_config_destroy(cfg);
}

static void test_run(const char* out_dir) {
  tabcl_config* cfg = NULL;
  tabcl_run_log* log = NULL;
  tabcl_run_state state = TABCL_RUN_FAILED;
  size_t planned = 0, completed = 0, needed = 0;
  double acc = -1.0, fgt = 0.0, a00 = 0.0, a10 = 0.0, a11 = 0.0;
  int oracle = 1;
  char* csv;
  char path[1024];
  FILE* f;

  EXPECT_OK(tabcl_config_create(&cfg));
  EXPECT_OK(tabcl_config_parse(cfg, kTinyConfig));
  EXPECT_OK(tabcl_config_validate(cfg));
  EXPECT_OK(tabcl_run(cfg, &log));
  if (!log) {
    tabcl_config_destroy(cfg);
    return;
  }
  EXPECT_OK(tabcl_run_log_state(log, &state));
  EXPECT(state == TABCL_RUN_COMPLETED);
  EXPECT_OK(tabcl_run_log_experiences(log, &planned, &completed));
  EXPECT(planned == 2 && completed == 2);
  EXPECT_OK(tabcl_run_log_is_oracle(log, &oracle));
  EXPECT(oracle == 0);
  EXPECT_OK(tabcl_run_log_accuracy(log, 0, 0, &a00));
  EXPECT_OK(tabcl_run_log_accuracy(log, 1, 0, &a10));
  EXPECT_OK(tabcl_run_log_accuracy(log, 1, 1, &a11));
  EXPECT(tabcl_run_log_accuracy(log, 0, 1, &acc) != TABCL_OK);
  EXPECT_OK(tabcl_run_log_average_accuracy(log, 1, &acc));
  EXPECT(fabs(acc - (a10 + a11) / 2.0) < 1e-15);
  EXPECT(tabcl_run_log_average_forgetting(log, 0, &fgt) == TABCL_UNDEFINED);
  EXPECT_OK(tabcl_run_log_average_forgetting(log, 1, &fgt));
  EXPECT(fabs(fgt - (a00 - a10)) < 1e-15);

  EXPECT_OK(tabcl_run_log_metrics_csv(log, NULL, 0, &needed));
  csv = (char*)malloc(needed);
  EXPECT_OK(tabcl_run_log_metrics_csv(log, csv, needed, &needed));
  EXPECT(strncmp(csv, "experience,epoch,normalizer,strategy,metric,value\n", 50) == 0);
  free(csv);

  EXPECT_OK(tabcl_run_log_write(log, out_dir));
  snprintf(path, sizeof path, "%s/summary.json", out_dir);
  f = fopen(path, "r");
  EXPECT(f != NULL);
  if (f) fclose(f);

  tabcl_run_log_destroy(log);
  tabcl_config_destroy(cfg);
}

static void test_grid(const char* out_dir) {
  tabcl_config* base = NULL;
  tabcl_grid* grid = NULL;
  const char* axes[] = {"strategy.kind=finetune,ewc", "normalizer.kind=global,clean"};
  size_t size = 0, failed = 99, runs = 0;
  tabcl_run_state state = TABCL_RUN_FAILED;
  char dir[1024];
  char report_dir[1024];

  EXPECT_OK(tabcl_config_create(&base));
  EXPECT_OK(tabcl_config_parse(base, kTinyConfig));
  EXPECT_OK(tabcl_config_set(base, "training.epochs", "1"));
  EXPECT_OK(tabcl_grid_create(&grid));
  EXPECT_OK(tabcl_grid_add_product(grid, base, axes, 2));
  EXPECT_OK(tabcl_grid_size(grid, &size));
  EXPECT(size == 4);
  snprintf(dir, sizeof dir, "%s/grid", out_dir);
  EXPECT_OK(tabcl_grid_run(grid, dir, 2, &failed));
  EXPECT(failed == 0);
  EXPECT_OK(tabcl_grid_run_state(grid, 3, &state));
  EXPECT(state == TABCL_RUN_COMPLETED);
  EXPECT(tabcl_grid_run_state(grid, 4, &state) == TABCL_INVALID_ARGUMENT);

  snprintf(report_dir, sizeof report_dir, "%s/report", out_dir);
  EXPECT_OK(tabcl_report(dir, report_dir, &runs));
  EXPECT(runs == 4);
  EXPECT(tabcl_report("/nonexistent/root", report_dir, &runs) == TABCL_IO_ERROR);

  tabcl_grid_destroy(grid);
  tabcl_config_destroy(base);
}

static void test_building_blocks(void) {
  tabcl_normalizer* n = NULL;
  const double chunk[] = {10.0, 0.0, 20.0, 4.0};
  const double probe[] = {15.0, 2.0};
  double out[2];
  uint64_t version = 0;
  const double scores[] = {0.1, 0.4, 0.35, 0.8};
  const uint8_t labels[] = {0, 0, 1, 1};
  const uint8_t benign[] = {0, 0, 0, 0};
  const double g[] = {-1.0, 1.0};
  const double g_ref[] = {1.0, 0.0};
  double projected[2];
  double auc = 0.0;

  EXPECT_OK(tabcl_normalizer_create(TABCL_NORMALIZER_LOCAL, 2, 0.9, 0.1, 1e-8, 1e-8, &n));
  EXPECT(tabcl_normalizer_transform(n, probe, 1, 2, out) == TABCL_CONTRACT_ERROR);
  EXPECT_OK(tabcl_normalizer_update(n, chunk, 2, 2));
  EXPECT_OK(tabcl_normalizer_transform(n, probe, 1, 2, out));
  EXPECT(out[0] == 0.5 && out[1] == 0.5);
  EXPECT(tabcl_normalizer_update(n, chunk, 1, 3) == TABCL_SHAPE_ERROR);
  EXPECT_OK(tabcl_normalizer_version(n, &version));
  EXPECT(version == 1);
  tabcl_normalizer_destroy(n);

  EXPECT_OK(tabcl_normalizer_create(TABCL_NORMALIZER_CLEAN, 2, 0.9, 0.1, 1e-8, 1e-8, &n));
  EXPECT_OK(tabcl_normalizer_transform(n, probe, 1, 2, out));
  EXPECT(out[0] == 15.0 && out[1] == 2.0);
  tabcl_normalizer_destroy(n);
  EXPECT(tabcl_normalizer_create(TABCL_NORMALIZER_CLEAN, 2, 3.0, 0.1, 1e-8, 1e-8, &n) ==
         TABCL_CONFIG_ERROR);

  EXPECT_OK(tabcl_auroc(scores, labels, 4, &auc));
  EXPECT(auc == 0.75);
  EXPECT(tabcl_auroc(scores, benign, 4, &auc) == TABCL_UNDEFINED);

  EXPECT_OK(tabcl_agem_project(g, g_ref, 2, projected));
  EXPECT(projected[0] == 0.0 && projected[1] == 1.0);
}

int main(int argc, char** argv) {
  const char* out_dir = argc > 1 ? argv[1] : "capi_out";
  EXPECT(tabcl_version() != NULL && strlen(tabcl_version()) > 0);
  test_errors();
  test_strings();
  test_run(out_dir);
  test_grid(out_dir);
  test_building_blocks();
  if (failures) {
    fprintf(stderr, "%d expectation(s) failed\n", failures);
    return 1;
  }
  printf("capi: all checks passed\n");
  return 0;
}
