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

#include "tabcl/tabcl.h"

#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/error.hpp"
#include "core/experiment.hpp"
#include "core/grid.hpp"
#include "core/metrics.hpp"
#include "core/normalization.hpp"
#include "core/results.hpp"
#include "core/strategies.hpp"

struct tabcl_config {
  tabcl::RunConfig value;
};

struct tabcl_run_log {
  tabcl::RunLog value;
};

struct tabcl_grid {
  std::vector<tabcl::RunConfig> configs;
  tabcl::GridResult result;
  bool ran = false;
};

struct tabcl_normalizer {
  std::unique_ptr<tabcl::Normalizer> value;
};

namespace {

thread_local std::string g_last_error;

tabcl_status fail(tabcl_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <class F>
tabcl_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const tabcl::ConfigError& e) {
    return fail(TABCL_CONFIG_ERROR, e.what());
  } catch (const tabcl::IoError& e) {
    return fail(TABCL_IO_ERROR, e.what());
  } catch (const tabcl::IngestError& e) {
    return fail(TABCL_INGEST_ERROR, e.what());
  } catch (const tabcl::ShapeError& e) {
    return fail(TABCL_SHAPE_ERROR, e.what());
  } catch (const tabcl::ContractError& e) {
    return fail(TABCL_CONTRACT_ERROR, e.what());
  } catch (const tabcl::NumericError& e) {
    return fail(TABCL_NUMERIC_ERROR, e.what());
  } catch (const std::bad_alloc&) {
    return fail(TABCL_INTERNAL_ERROR, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(TABCL_IO_ERROR, e.what());
  } catch (const std::exception& e) {
    return fail(TABCL_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(TABCL_INTERNAL_ERROR, "unknown exception");
  }
}

tabcl_status copy_out(const std::string& text, char* buffer, size_t capacity, size_t* needed) {
  if (needed) *needed = text.size() + 1;
  if (!buffer && capacity == 0) return TABCL_OK;
  if (!buffer || capacity < text.size() + 1) {
    return fail(TABCL_INVALID_ARGUMENT, "buffer too small: need " + std::to_string(text.size() + 1) +
                                            " bytes, got " + std::to_string(capacity));
  }
  std::memcpy(buffer, text.c_str(), text.size() + 1);
  return TABCL_OK;
}

tabcl_status null_argument(const char* name) {
  return fail(TABCL_INVALID_ARGUMENT, std::string(name) + " is null");
}

tabcl_run_state run_state(tabcl::RunStatus s) {
  switch (s) {
    case tabcl::RunStatus::completed: return TABCL_RUN_COMPLETED;
    case tabcl::RunStatus::aborted: return TABCL_RUN_ABORTED;
    case tabcl::RunStatus::failed: return TABCL_RUN_FAILED;
  }
  return TABCL_RUN_FAILED;
}

tabcl::Matrix to_matrix(const double* data, size_t rows, size_t features) {
  return Eigen::Map<const tabcl::Matrix>(data, static_cast<Eigen::Index>(rows),
                                         static_cast<Eigen::Index>(features));
}

}  // namespace

extern "C" {

const char* tabcl_version(void) { return "1.0.0"; }

const char* tabcl_last_error(void) { return g_last_error.c_str(); }

const char* tabcl_status_name(tabcl_status status) {
  switch (status) {
    case TABCL_OK: return "ok";
    case TABCL_INVALID_ARGUMENT: return "invalid argument";
    case TABCL_CONFIG_ERROR: return "config error";
    case TABCL_IO_ERROR: return "io error";
    case TABCL_INGEST_ERROR: return "ingest error";
    case TABCL_SHAPE_ERROR: return "shape error";
    case TABCL_CONTRACT_ERROR: return "contract error";
    case TABCL_NUMERIC_ERROR: return "numeric error";
    case TABCL_UNDEFINED: return "undefined";
    case TABCL_INTERNAL_ERROR: return "internal error";
  }
  return "unknown status";
}

tabcl_status tabcl_config_create(tabcl_config** out) {
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = new tabcl_config{};
    return TABCL_OK;
  });
}

tabcl_status tabcl_config_clone(const tabcl_config* config, tabcl_config** out) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = new tabcl_config{config->value};
    return TABCL_OK;
  });
}

void tabcl_config_destroy(tabcl_config* config) { delete config; }

tabcl_status tabcl_config_load_file(tabcl_config* config, const char* path) {
  if (!config) return null_argument("config");
  if (!path) return null_argument("path");
  return guarded([&] {
    config->value = tabcl::load_config_file(path, config->value);
    return TABCL_OK;
  });
}

tabcl_status tabcl_config_parse(tabcl_config* config, const char* text) {
  if (!config) return null_argument("config");
  if (!text) return null_argument("text");
  return guarded([&] {
    config->value = tabcl::parse_config(text, config->value);
    return TABCL_OK;
  });
}

tabcl_status tabcl_config_set(tabcl_config* config, const char* key, const char* value) {
  if (!config) return null_argument("config");
  if (!key) return null_argument("key");
  if (!value) return null_argument("value");
  return guarded([&] {
    tabcl::apply_setting(config->value, key, value);
    return TABCL_OK;
  });
}

tabcl_status tabcl_config_get(const tabcl_config* config, const char* key, char* buffer,
                              size_t capacity, size_t* needed) {
  if (!config) return null_argument("config");
  if (!key) return null_argument("key");
  return guarded([&] {
    for (const auto& [k, v] : tabcl::config_echo(config->value)) {
      if (k == key) return copy_out(v, buffer, capacity, needed);
    }
    return fail(TABCL_CONFIG_ERROR, std::string(key) + ": unknown configuration key");
  });
}

tabcl_status tabcl_config_validate(const tabcl_config* config) {
  if (!config) return null_argument("config");
  return guarded([&] {
    tabcl::validate(config->value);
    return TABCL_OK;
  });
}

tabcl_status tabcl_config_text(const tabcl_config* config, char* buffer, size_t capacity,
                               size_t* needed) {
  if (!config) return null_argument("config");
  return guarded([&] { return copy_out(tabcl::to_config_text(config->value), buffer, capacity, needed); });
}

tabcl_status tabcl_config_output_directory(const tabcl_config* config, char* buffer,
                                           size_t capacity, size_t* needed) {
  if (!config) return null_argument("config");
  return guarded([&] {
    return copy_out(tabcl::resolve_output_dir(config->value).string(), buffer, capacity, needed);
  });
}

tabcl_status tabcl_run(const tabcl_config* config, tabcl_run_log** out) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    auto log = std::make_unique<tabcl_run_log>();
    log->value = tabcl::run_experiment(config->value);
    const bool aborted = log->value.status == tabcl::RunStatus::aborted;
    const std::string error = log->value.error;
    *out = log.release();
    if (aborted) return fail(TABCL_NUMERIC_ERROR, error);
    return TABCL_OK;
  });
}

void tabcl_run_log_destroy(tabcl_run_log* log) { delete log; }

tabcl_status tabcl_run_log_state(const tabcl_run_log* log, tabcl_run_state* state) {
  if (!log) return null_argument("log");
  if (!state) return null_argument("state");
  *state = run_state(log->value.status);
  return TABCL_OK;
}

tabcl_status tabcl_run_log_experiences(const tabcl_run_log* log, size_t* planned, size_t* completed) {
  if (!log) return null_argument("log");
  if (planned) *planned = log->value.experiences;
  if (completed) *completed = log->value.completed_experiences;
  return TABCL_OK;
}

tabcl_status tabcl_run_log_is_oracle(const tabcl_run_log* log, int* oracle) {
  if (!log) return null_argument("log");
  if (!oracle) return null_argument("oracle");
  *oracle = log->value.oracle() ? 1 : 0;
  return TABCL_OK;
}

tabcl_status tabcl_run_log_error(const tabcl_run_log* log, char* buffer, size_t capacity,
                                 size_t* needed) {
  if (!log) return null_argument("log");
  return guarded([&] { return copy_out(log->value.error, buffer, capacity, needed); });
}

namespace {

tabcl_status table_cell(const tabcl::MetricTable& table, size_t completed, size_t t, size_t t_prime,
                        double* out) {
  if (!out) return null_argument("out");
  if (t >= completed || t_prime > t) {
    return fail(TABCL_CONTRACT_ERROR, "cell (" + std::to_string(t) + ", " + std::to_string(t_prime) +
                                          ") is outside the recorded lower triangle");
  }
  const auto v = table.get(t, t_prime);
  if (!v) return fail(TABCL_UNDEFINED, "cell is absent");
  *out = *v;
  return TABCL_OK;
}

}  // namespace

tabcl_status tabcl_run_log_accuracy(const tabcl_run_log* log, size_t t, size_t t_prime, double* out) {
  if (!log) return null_argument("log");
  return guarded([&] {
    return table_cell(log->value.accuracy, log->value.completed_experiences, t, t_prime, out);
  });
}

tabcl_status tabcl_run_log_auroc(const tabcl_run_log* log, size_t t, size_t t_prime, double* out) {
  if (!log) return null_argument("log");
  return guarded([&] {
    return table_cell(log->value.auroc, log->value.completed_experiences, t, t_prime, out);
  });
}

tabcl_status tabcl_run_log_average_accuracy(const tabcl_run_log* log, size_t t, double* out) {
  if (!log) return null_argument("log");
  if (!out) return null_argument("out");
  return guarded([&] {
    if (t >= log->value.completed_experiences) {
      return fail(TABCL_CONTRACT_ERROR, "experience " + std::to_string(t) + " was not completed");
    }
    *out = tabcl::average_accuracy(log->value.accuracy, t);
    return TABCL_OK;
  });
}

tabcl_status tabcl_run_log_average_forgetting(const tabcl_run_log* log, size_t t, double* out) {
  if (!log) return null_argument("log");
  if (!out) return null_argument("out");
  return guarded([&] {
    if (t >= log->value.completed_experiences) {
      return fail(TABCL_CONTRACT_ERROR, "experience " + std::to_string(t) + " was not completed");
    }
    const auto v = tabcl::average_forgetting(log->value.accuracy, t);
    if (!v) return fail(TABCL_UNDEFINED, "forgetting is undefined for the first experience");
    *out = *v;
    return TABCL_OK;
  });
}

tabcl_status tabcl_run_log_metrics_csv(const tabcl_run_log* log, char* buffer, size_t capacity,
                                       size_t* needed) {
  if (!log) return null_argument("log");
  return guarded([&] { return copy_out(tabcl::metrics_csv(log->value), buffer, capacity, needed); });
}

tabcl_status tabcl_run_log_summary_json(const tabcl_run_log* log, char* buffer, size_t capacity,
                                        size_t* needed) {
  if (!log) return null_argument("log");
  return guarded([&] { return copy_out(tabcl::summary_json(log->value), buffer, capacity, needed); });
}

tabcl_status tabcl_run_log_write(const tabcl_run_log* log, const char* directory) {
  if (!log) return null_argument("log");
  if (!directory) return null_argument("directory");
  return guarded([&] {
    tabcl::write_run(log->value, directory);
    return TABCL_OK;
  });
}

tabcl_status tabcl_grid_create(tabcl_grid** out) {
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = new tabcl_grid{};
    return TABCL_OK;
  });
}

void tabcl_grid_destroy(tabcl_grid* grid) { delete grid; }

tabcl_status tabcl_grid_add(tabcl_grid* grid, const tabcl_config* config) {
  if (!grid) return null_argument("grid");
  if (!config) return null_argument("config");
  return guarded([&] {
    grid->configs.push_back(config->value);
    return TABCL_OK;
  });
}

tabcl_status tabcl_grid_add_product(tabcl_grid* grid, const tabcl_config* base,
                                    const char* const* axes, size_t axis_count) {
  if (!grid) return null_argument("grid");
  if (!base) return null_argument("base");
  if (axis_count > 0 && !axes) return null_argument("axes");
  return guarded([&] {
    tabcl::GridAxes parsed;
    for (size_t i = 0; i < axis_count; ++i) {
      if (!axes[i]) return null_argument("axis");
      parsed.push_back(tabcl::parse_axis(axes[i]));
    }
    for (auto& c : tabcl::expand_grid(base->value, parsed)) grid->configs.push_back(std::move(c));
    return TABCL_OK;
  });
}

tabcl_status tabcl_grid_size(const tabcl_grid* grid, size_t* size) {
  if (!grid) return null_argument("grid");
  if (!size) return null_argument("size");
  *size = grid->configs.size();
  return TABCL_OK;
}

tabcl_status tabcl_grid_run(tabcl_grid* grid, const char* directory, size_t threads, size_t* failed) {
  if (!grid) return null_argument("grid");
  if (!directory) return null_argument("directory");
  return guarded([&] {
    grid->result = tabcl::run_grid(grid->configs, directory, threads);
    grid->ran = true;
    if (failed) {
      *failed = 0;
      for (const auto& r : grid->result.runs) *failed += r.status != tabcl::RunStatus::completed;
    }
    return TABCL_OK;
  });
}

tabcl_status tabcl_grid_run_state(const tabcl_grid* grid, size_t index, tabcl_run_state* state) {
  if (!grid) return null_argument("grid");
  if (!state) return null_argument("state");
  if (!grid->ran) return fail(TABCL_CONTRACT_ERROR, "the grid has not been run");
  if (index >= grid->result.runs.size()) return fail(TABCL_INVALID_ARGUMENT, "run index out of range");
  *state = run_state(grid->result.runs[index].status);
  return TABCL_OK;
}

tabcl_status tabcl_grid_run_directory(const tabcl_grid* grid, size_t index, char* buffer,
                                      size_t capacity, size_t* needed) {
  if (!grid) return null_argument("grid");
  if (!grid->ran) return fail(TABCL_CONTRACT_ERROR, "the grid has not been run");
  if (index >= grid->result.directories.size()) {
    return fail(TABCL_INVALID_ARGUMENT, "run index out of range");
  }
  return guarded([&] {
    return copy_out(grid->result.directories[index].string(), buffer, capacity, needed);
  });
}

tabcl_status tabcl_report(const char* root, const char* out_directory, size_t* runs) {
  if (!root) return null_argument("root");
  if (!out_directory) return null_argument("out_directory");
  return guarded([&] {
    const auto summaries = tabcl::collect_summaries(root);
    std::filesystem::create_directories(out_directory);
    const std::filesystem::path out(out_directory);
    tabcl::write_text(out / "comparison.csv", tabcl::comparison_csv(summaries));
    tabcl::write_text(out / "report.csv", tabcl::aggregate_csv(tabcl::aggregate(summaries)));
    if (runs) *runs = summaries.size();
    return TABCL_OK;
  });
}

tabcl_status tabcl_normalizer_create(tabcl_normalizer_kind kind, size_t features, double eta,
                                     double lambda, double epsilon_cn, double epsilon_den,
                                     tabcl_normalizer** out) {
  if (!out) return null_argument("out");
  if (kind < TABCL_NORMALIZER_GLOBAL || kind > TABCL_NORMALIZER_CLEAN) {
    return fail(TABCL_INVALID_ARGUMENT, "unknown normalizer kind");
  }
  if (features == 0) return fail(TABCL_INVALID_ARGUMENT, "features must be positive");
  return guarded([&] {
    tabcl::NormalizerOptions options{eta, lambda, epsilon_cn, epsilon_den};
    auto n = std::make_unique<tabcl_normalizer>();
    n->value = tabcl::make_normalizer(static_cast<tabcl::NormalizerKind>(kind), features, options);
    *out = n.release();
    return TABCL_OK;
  });
}

void tabcl_normalizer_destroy(tabcl_normalizer* normalizer) { delete normalizer; }

tabcl_status tabcl_normalizer_update(tabcl_normalizer* normalizer, const double* data, size_t rows,
                                     size_t features) {
  if (!normalizer) return null_argument("normalizer");
  if (!data) return null_argument("data");
  return guarded([&] {
    const tabcl::Matrix x = to_matrix(data, rows, features);
    if (auto* g = dynamic_cast<tabcl::GlobalNormalizer*>(normalizer->value.get())) {
      if (!g->fitted()) {
        if (features != g->features()) throw tabcl::ShapeError("feature count differs");
        g->fit(tabcl::column_bounds(x));
      }
    }
    normalizer->value->update(x);
    return TABCL_OK;
  });
}

tabcl_status tabcl_normalizer_transform(const tabcl_normalizer* normalizer, const double* data,
                                        size_t rows, size_t features, double* out) {
  if (!normalizer) return null_argument("normalizer");
  if (!data) return null_argument("data");
  if (!out) return null_argument("out");
  return guarded([&] {
    const tabcl::Matrix y = normalizer->value->transform(to_matrix(data, rows, features));
    std::memcpy(out, y.data(), sizeof(double) * rows * features);
    return TABCL_OK;
  });
}

tabcl_status tabcl_normalizer_version(const tabcl_normalizer* normalizer, uint64_t* version) {
  if (!normalizer) return null_argument("normalizer");
  if (!version) return null_argument("version");
  *version = normalizer->value->version();
  return TABCL_OK;
}

tabcl_status tabcl_auroc(const double* scores, const uint8_t* labels, size_t n, double* out) {
  if ((!scores || !labels) && n > 0) return null_argument("scores/labels");
  if (!out) return null_argument("out");
  return guarded([&] {
    const auto v = tabcl::auroc(std::span<const double>(scores, n), std::span<const uint8_t>(labels, n));
    if (!v) return fail(TABCL_UNDEFINED, "AUROC is undefined with a single class");
    *out = *v;
    return TABCL_OK;
  });
}

tabcl_status tabcl_agem_project(const double* g, const double* g_ref, size_t n, double* out) {
  if ((!g || !g_ref || !out) && n > 0) return null_argument("g/g_ref/out");
  return guarded([&] {
    const auto p = tabcl::agem_project(std::span<const double>(g, n), std::span<const double>(g_ref, n));
    std::copy(p.begin(), p.end(), out);
    return TABCL_OK;
  });
}

}  // extern "C"
