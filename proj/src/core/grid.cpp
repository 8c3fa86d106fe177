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

#include "core/grid.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <thread>

#include "core/csv.hpp"
#include "core/error.hpp"
#include "core/experiment.hpp"

namespace tabcl {

std::pair<std::string, std::vector<std::string>> parse_axis(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("grid axis '" + std::string(text) + "' is not of the form key=v1,v2");
  }
  std::pair<std::string, std::vector<std::string>> axis;
  axis.first = std::string(trim(text.substr(0, eq)));
  std::string_view rest = text.substr(eq + 1);
  while (true) {
    const auto comma = rest.find(',');
    const std::string_view item = trim(rest.substr(0, comma));
    if (item.empty()) throw ConfigError(axis.first + ": empty value in grid axis");
    axis.second.emplace_back(item);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return axis;
}

std::vector<RunConfig> expand_grid(const RunConfig& base, const GridAxes& axes) {
  std::vector<RunConfig> out{base};
  for (const auto& [key, values] : axes) {
    std::vector<RunConfig> next;
    for (const auto& cfg : out) {
      for (const auto& v : values) {
        RunConfig c = cfg;
        apply_setting(c, key, v);
        next.push_back(std::move(c));
      }
    }
    out = std::move(next);
  }
  return out;
}

bool GridResult::all_completed() const {
  return std::all_of(runs.begin(), runs.end(),
                     [](const RunSummary& r) { return r.status == RunStatus::completed; });
}

std::vector<std::string> run_directory_names(const std::vector<RunConfig>& configs) {
  std::map<std::string, std::size_t> uses;
  for (const auto& c : configs) ++uses[c.label()];
  std::map<std::string, std::size_t> seen;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const std::string label = configs[i].label();
    if (uses[label] == 1) {
      names.push_back(label);
    } else {
      names.push_back(label + "-" + std::to_string(seen[label]++));
    }
  }
  return names;
}

namespace {

RunSummary failed_summary(const RunConfig& cfg, const std::string& error) {
  RunLog log;
  log.config = cfg;
  log.config_echo = config_echo(cfg);
  log.status = RunStatus::failed;
  log.error = error;
  return summarize(log);
}

RunSummary execute(RunConfig cfg, const std::filesystem::path& dir) {
  cfg.output_dir = std::filesystem::absolute(dir).string();
  try {
    const RunLog log = run_experiment(cfg);
    write_run(log, dir);
    return summarize(log);
  } catch (const std::exception& e) {
    RunLog log;
    log.config = cfg;
    log.config_echo = config_echo(cfg);
    log.status = RunStatus::failed;
    log.error = e.what();
    try {
      write_run(log, dir);
    } catch (const std::exception&) {
      // The failure is still reported in the comparison table.
    }
    return failed_summary(cfg, e.what());
  }
}

}  // namespace

GridResult run_grid(const std::vector<RunConfig>& configs, const std::filesystem::path& out_dir,
                    std::size_t threads) {
  GridResult result;
  if (configs.empty()) return result;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());

  const auto names = run_directory_names(configs);
  result.runs.resize(configs.size());
  for (const auto& n : names) result.directories.push_back(out_dir / n);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      result.runs[i] = execute(configs[i], result.directories[i]);
    }
  };
  threads = std::clamp<std::size_t>(threads, 1, configs.size());
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  write_text(out_dir / "comparison.csv", comparison_csv(result.runs));
  write_text(out_dir / "report.csv", aggregate_csv(aggregate(result.runs)));
  return result;
}

}  // namespace tabcl
