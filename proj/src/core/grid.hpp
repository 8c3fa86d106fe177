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

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "core/config.hpp"
#include "core/results.hpp"

namespace tabcl {

// key -> candidate values; the grid is their cartesian product, first axis
// slowest.
using GridAxes = std::vector<std::pair<std::string, std::vector<std::string>>>;

// Parses "key=v1,v2,...".
std::pair<std::string, std::vector<std::string>> parse_axis(std::string_view text);
std::vector<RunConfig> expand_grid(const RunConfig& base, const GridAxes& axes);

struct GridResult {
  std::vector<RunSummary> runs;  // in input order
  std::vector<std::filesystem::path> directories;

  bool all_completed() const;
};

// Runs every config in isolation on up to `threads` workers. Each run
// writes into its own subdirectory of `out_dir`; comparison.csv and
// report.csv land in `out_dir` itself. A failing run is recorded and does
// not stop the others. An empty list writes nothing.
GridResult run_grid(const std::vector<RunConfig>& configs, const std::filesystem::path& out_dir,
                    std::size_t threads = 1);

// Distinct directory names for a list of configs.
std::vector<std::string> run_directory_names(const std::vector<RunConfig>& configs);

}  // namespace tabcl
