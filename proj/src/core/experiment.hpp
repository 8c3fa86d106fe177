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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core/config.hpp"
#include "core/metrics.hpp"
#include "core/types.hpp"

namespace tabcl {

enum class RunStatus { completed, aborted, failed };
std::string_view to_string(RunStatus status);
RunStatus parse_run_status(std::string_view text);

// Metrics of one epoch boundary of experience `experience` (0-based);
// `epoch` is 1-based. The per-cell vectors are empty when the epoch was not
// evaluated (experience-end cadence).
struct EpochRecord {
  std::size_t experience = 0;
  std::size_t epoch = 0;
  double train_loss = 0.0;
  std::uint64_t normalizer_version = 0;
  std::vector<double> accuracy;                // index t' = 0..experience
  std::vector<std::optional<double>> auroc;    // absent for single-class test sets
  std::optional<double> average_accuracy;
  std::optional<double> average_auroc;
  std::optional<double> average_forgetting;

  bool evaluated() const { return !accuracy.empty(); }
};

struct RunLog {
  RunConfig config;
  std::vector<std::pair<std::string, std::string>> config_echo;
  RunStatus status = RunStatus::completed;
  std::string error;

  std::size_t experiences = 0;  // planned
  std::size_t completed_experiences = 0;
  std::size_t features = 0;
  std::vector<std::size_t> test_rows;

  // Final state of each experience: row t is the last evaluation of t.
  AccuracyMatrix accuracy;
  MetricTable auroc;
  std::vector<EpochRecord> epochs;
  std::vector<double> experience_seconds;

  std::string diagnostic_snapshot;  // path, set when the run aborted

  bool oracle() const { return config.oracle(); }
  double total_seconds() const;
  std::optional<double> final_average_accuracy() const;
  std::optional<double> final_average_forgetting() const;
  std::optional<double> final_average_auroc() const;
};

// Seen by tests and tools at every evaluation: the normalizer version used
// and how many updates the harness has applied so far.
struct EvaluationStamp {
  std::size_t experience = 0;
  std::size_t epoch = 0;
  std::uint64_t normalizer_version = 0;
  std::uint64_t updates_applied = 0;
};

struct RunHooks {
  std::function<void(const EvaluationStamp&)> on_evaluate;
  // Stop (status completed) once this many experiences are done.
  std::optional<std::size_t> stop_after;
  // Debug fault injection: the loss of this global step is replaced by NaN.
  std::optional<std::uint64_t> poison_step;
};

// Loads the configured data source and builds the experience stream.
ExperienceStream load_stream(const RunConfig& cfg);

// Executes the per-experience protocol. Startup problems (bad config,
// unreadable data, bad snapshot) throw; a non-finite loss mid-run returns a
// log with status aborted, the partial results and, when the config has an
// output directory, a diagnostic snapshot.
RunLog run_experiment(const RunConfig& cfg, const RunHooks& hooks = {});
RunLog run_experiment(const RunConfig& cfg, const ExperienceStream& stream,
                      const RunHooks& hooks = {});

// Where a run writes: output.dir if absolute, else under the output root
// (TABCL_OUTPUT_ROOT, default "runs"); an empty output.dir uses the label.
std::filesystem::path output_root();
std::filesystem::path resolve_output_dir(const RunConfig& cfg);

std::filesystem::path snapshot_path(const std::filesystem::path& run_dir, std::size_t experience);

}  // namespace tabcl
