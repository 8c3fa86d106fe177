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

// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tabcl/tabcl.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRunIncomplete = 1;
constexpr int kExitError = 2;

int report_error(const char* what, tabcl_status status) {
  std::fprintf(stderr, "tabcl: %s: %s: %s\n", what, tabcl_status_name(status), tabcl_last_error());
  return kExitError;
}

template <class F>
bool fetch_string(F&& call, std::string& out) {
  size_t needed = 0;
  if (call(nullptr, 0, &needed) != TABCL_OK) return false;
  std::vector<char> buffer(needed);
  if (call(buffer.data(), buffer.size(), &needed) != TABCL_OK) return false;
  out.assign(buffer.data());
  return true;
}

struct ConfigHandle {
  tabcl_config* ptr = nullptr;
  ~ConfigHandle() { tabcl_config_destroy(ptr); }
};

// Loads the optional config file then applies every --set override.
int build_config(const std::string& path, const std::vector<std::string>& sets, ConfigHandle& cfg) {
  if (tabcl_status s = tabcl_config_create(&cfg.ptr); s != TABCL_OK) return report_error("config", s);
  if (!path.empty()) {
    if (tabcl_status s = tabcl_config_load_file(cfg.ptr, path.c_str()); s != TABCL_OK) {
      return report_error(path.c_str(), s);
    }
  }
  for (const auto& assignment : sets) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "tabcl: --set %s: expected key=value\n", assignment.c_str());
      return kExitError;
    }
    const std::string key = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);
    if (tabcl_status s = tabcl_config_set(cfg.ptr, key.c_str(), value.c_str()); s != TABCL_OK) {
      return report_error("--set", s);
    }
  }
  if (tabcl_status s = tabcl_config_validate(cfg.ptr); s != TABCL_OK) return report_error("config", s);
  return kExitOk;
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& sets, std::string out_dir,
            bool quiet) {
  ConfigHandle cfg;
  if (int rc = build_config(config_path, sets, cfg); rc != kExitOk) return rc;
  if (!out_dir.empty()) {
    tabcl_config_set(cfg.ptr, "output.dir", out_dir.c_str());
  }
  if (!fetch_string([&](char* b, size_t c, size_t* n) { return tabcl_config_output_directory(cfg.ptr, b, c, n); },
                    out_dir)) {
    return report_error("output directory", TABCL_INTERNAL_ERROR);
  }

  tabcl_run_log* log = nullptr;
  const tabcl_status status = tabcl_run(cfg.ptr, &log);
  if (!log) return report_error("run", status);

  int rc = kExitOk;
  if (tabcl_status s = tabcl_run_log_write(log, out_dir.c_str()); s != TABCL_OK) {
    rc = report_error("write", s);
  }
  tabcl_run_state state = TABCL_RUN_FAILED;
  tabcl_run_log_state(log, &state);
  size_t planned = 0, completed = 0;
  tabcl_run_log_experiences(log, &planned, &completed);
  if (state != TABCL_RUN_COMPLETED) {
    std::string error;
    fetch_string([&](char* b, size_t c, size_t* n) { return tabcl_run_log_error(log, b, c, n); }, error);
    std::fprintf(stderr, "tabcl: run aborted after %zu/%zu experiences: %s\n", completed, planned,
                 error.c_str());
    if (rc == kExitOk) rc = kExitRunIncomplete;
  } else if (!quiet && completed > 0) {
    double acc = 0.0, fgt = 0.0;
    tabcl_run_log_average_accuracy(log, completed - 1, &acc);
    const bool has_fgt = tabcl_run_log_average_forgetting(log, completed - 1, &fgt) == TABCL_OK;
    int oracle = 0;
    tabcl_run_log_is_oracle(log, &oracle);
    std::printf("experiences %zu  average_accuracy %.4f  average_forgetting %s%s\n", completed, acc,
                has_fgt ? std::to_string(fgt).c_str() : "n/a", oracle ? "  [oracle]" : "");
  }
  if (!quiet) std::printf("results in %s\n", out_dir.c_str());
  tabcl_run_log_destroy(log);
  return rc;
}

int cmd_grid(const std::string& config_path, const std::vector<std::string>& sets,
             const std::vector<std::string>& vary, std::string out_dir, size_t threads, bool quiet) {
  ConfigHandle cfg;
  if (int rc = build_config(config_path, sets, cfg); rc != kExitOk) return rc;
  if (out_dir.empty() &&
      !fetch_string([&](char* b, size_t c, size_t* n) { return tabcl_config_output_directory(cfg.ptr, b, c, n); },
                    out_dir)) {
    return report_error("output directory", TABCL_INTERNAL_ERROR);
  }

  tabcl_grid* grid = nullptr;
  if (tabcl_status s = tabcl_grid_create(&grid); s != TABCL_OK) return report_error("grid", s);
  std::vector<const char*> axes;
  for (const auto& v : vary) axes.push_back(v.c_str());
  int rc = kExitOk;
  size_t failed = 0, size = 0;
  if (tabcl_status s = tabcl_grid_add_product(grid, cfg.ptr, axes.data(), axes.size()); s != TABCL_OK) {
    rc = report_error("--vary", s);
  } else if (tabcl_status s2 = tabcl_grid_run(grid, out_dir.c_str(), threads, &failed); s2 != TABCL_OK) {
    rc = report_error("grid", s2);
  } else {
    tabcl_grid_size(grid, &size);
    if (!quiet) {
      for (size_t i = 0; i < size; ++i) {
        tabcl_run_state state = TABCL_RUN_FAILED;
        tabcl_grid_run_state(grid, i, &state);
        std::string dir;
        fetch_string([&](char* b, size_t c, size_t* n) { return tabcl_grid_run_directory(grid, i, b, c, n); },
                     dir);
        const char* label = state == TABCL_RUN_COMPLETED ? "completed"
                            : state == TABCL_RUN_ABORTED ? "aborted"
                                                         : "failed";
        std::printf("%-9s %s\n", label, dir.c_str());
      }
      std::printf("%zu runs, %zu incomplete; comparison in %s\n", size, failed, out_dir.c_str());
    }
    if (failed > 0) rc = kExitRunIncomplete;
  }
  tabcl_grid_destroy(grid);
  return rc;
}

int cmd_report(const std::string& root, std::string out_dir, bool quiet) {
  if (out_dir.empty()) out_dir = root;
  size_t runs = 0;
  if (tabcl_status s = tabcl_report(root.c_str(), out_dir.c_str(), &runs); s != TABCL_OK) {
    return report_error("report", s);
  }
  if (!quiet) std::printf("%zu runs aggregated into %s\n", runs, out_dir.c_str());
  return kExitOk;
}

int cmd_show_config(const std::string& config_path, const std::vector<std::string>& sets) {
  ConfigHandle cfg;
  if (int rc = build_config(config_path, sets, cfg); rc != kExitOk) return rc;
  std::string text;
  if (!fetch_string([&](char* b, size_t c, size_t* n) { return tabcl_config_text(cfg.ptr, b, c, n); }, text)) {
    return report_error("config", TABCL_INTERNAL_ERROR);
  }
  std::fputs(text.c_str(), stdout);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continual learning of tabular streams with adaptive normalization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tabcl_version()));

  std::string config_path;
  std::vector<std::string> sets;
  std::vector<std::string> vary;
  std::string out_dir;
  std::string root;
  size_t threads = 1;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "Run a single experiment");
  run->add_option("-c,--config", config_path, "Config file (key = value)")->check(CLI::ExistingFile);
  run->add_option("-s,--set", sets, "Override a key: key=value (repeatable)");
  run->add_option("-o,--out", out_dir, "Output directory for this run");
  run->add_flag("-q,--quiet", quiet, "Print nothing on success");

  auto* grid = app.add_subcommand("grid", "Run the cartesian product of --vary axes");
  grid->add_option("-c,--config", config_path, "Base config file")->check(CLI::ExistingFile);
  grid->add_option("-s,--set", sets, "Override a key of the base config: key=value");
  grid->add_option("-v,--vary", vary, "Grid axis: key=v1,v2,... (repeatable)");
  grid->add_option("-o,--out", out_dir, "Grid output directory");
  grid->add_option("-j,--threads", threads, "Runs executed concurrently")->check(CLI::PositiveNumber);
  grid->add_flag("-q,--quiet", quiet, "Print nothing on success");

  auto* report = app.add_subcommand("report", "Aggregate run summaries into comparison tables");
  report->add_option("root", root, "Directory searched for summary.json files")->required();
  report->add_option("-o,--out", out_dir, "Where comparison.csv and report.csv go (default: root)");
  report->add_flag("-q,--quiet", quiet, "Print nothing on success");

  auto* show = app.add_subcommand("show-config", "Print the resolved configuration");
  show->add_option("-c,--config", config_path, "Config file")->check(CLI::ExistingFile);
  show->add_option("-s,--set", sets, "Override a key: key=value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitError;
  }

  if (run->parsed()) return cmd_run(config_path, sets, out_dir, quiet);
  if (grid->parsed()) return cmd_grid(config_path, sets, vary, out_dir, threads, quiet);
  if (report->parsed()) return cmd_report(root, out_dir, quiet);
  return cmd_show_config(config_path, sets);
}
