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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "core/experiment.hpp"
#include "core/metrics.hpp"

namespace tabcl {

// One row of the long-format metric log.
struct MetricRow {
  std::size_t experience = 0;
  std::size_t epoch = 0;
  std::string normalizer;
  std::string strategy;
  std::string metric;
  std::optional<double> value;  // empty cell when absent
};

// Normalizer name as it appears in outputs; the oracle carries a marker.
std::string normalizer_label(const RunConfig& cfg);

std::vector<MetricRow> metric_rows(const RunLog& log);
std::string metrics_csv(const RunLog& log);
std::string summary_json(const RunLog& log, int indent = 2);

// Writes metrics.csv, summary.json and config.cfg into `dir` (created if
// needed). Throws IoError when the directory cannot be written.
void write_run(const RunLog& log, const std::filesystem::path& dir);

std::vector<MetricRow> read_metrics_csv(const std::filesystem::path& path);
std::vector<MetricRow> parse_metrics_csv(const std::string& text);

// Final accuracy matrix: for each experience t, the last evaluated epoch's
// accuracy@t' rows.
AccuracyMatrix accuracy_from_rows(const std::vector<MetricRow>& rows);

struct RunSummary {
  std::string label;
  std::string normalizer;  // plain kind name
  std::string strategy;
  std::uint64_t seed = 0;
  bool oracle = false;
  RunStatus status = RunStatus::completed;
  std::string error;
  std::size_t experiences = 0;
  std::size_t completed_experiences = 0;
  AccuracyMatrix accuracy;
  MetricTable auroc;
  std::optional<double> final_average_accuracy;
  std::optional<double> final_average_forgetting;
  std::optional<double> final_average_auroc;
  double wall_clock_seconds = 0.0;
};

RunSummary summarize(const RunLog& log);
RunSummary parse_summary_json(const std::string& text);
RunSummary read_summary_json(const std::filesystem::path& path);

// One row per run.
std::string comparison_csv(const std::vector<RunSummary>& runs);

// Runs grouped by (normalizer, strategy): seed count, completed count and
// the mean of each final metric over completed runs.
struct ComparisonCell {
  std::string normalizer;
  std::string strategy;
  bool oracle = false;
  std::size_t runs = 0;
  std::size_t completed = 0;
  std::optional<double> average_accuracy;
  std::optional<double> average_forgetting;
  std::optional<double> average_auroc;
};

std::vector<ComparisonCell> aggregate(const std::vector<RunSummary>& runs);
std::string aggregate_csv(const std::vector<ComparisonCell>& cells);

// Reads every summary.json below `root`.
std::vector<RunSummary> collect_summaries(const std::filesystem::path& root);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace tabcl
