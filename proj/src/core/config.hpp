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
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "core/normalization.hpp"
#include "core/strategies.hpp"
#include "core/stream.hpp"

namespace tabcl {

enum class DatasetSource { synthetic, unsw_csv, cicids_csv };
enum class EvaluationCadence { epoch, experience };
enum class CleanUpdateMode { experience, minibatch };

struct TrainingOptions {
  std::size_t epochs = 20;
  std::size_t batch_size = 20000;
  double learning_rate = 1e-3;
  double kappa = 0.5;
  double dropout = 0.5;
  std::size_t hidden_layers = 4;
  std::size_t hidden_width = 128;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  bool shuffle = true;
};

// Everything needed to reproduce one run. Defaults follow the reference
// experimental setup where it states a value.
struct RunConfig {
  std::string name;  // empty: derived from normalizer, strategy and seed
  std::uint64_t seed = 1;

  DatasetSource source = DatasetSource::synthetic;
  std::string dataset_path;  // one file or a comma-separated list read in order
  bool has_header = true;    // false: UNSW files without a header row
  std::string label_column = "label";
  std::vector<std::string> drop_columns;
  std::size_t chunk_size = 500000;
  double split_ratio = 0.8;
  bool drop_partial = false;

  DriftConfig synthetic;
  std::optional<std::uint64_t> synthetic_seed;  // unset: follows `seed`

  NormalizerKind normalizer = NormalizerKind::clean;
  NormalizerOptions normalizer_options;
  CleanUpdateMode clean_update = CleanUpdateMode::experience;

  StrategyKind strategy = StrategyKind::finetune;
  StrategyOptions strategy_options;

  TrainingOptions training;
  EvaluationCadence cadence = EvaluationCadence::epoch;

  std::string output_dir;
  bool snapshots = false;
  std::string resume_from;

  DriftConfig resolved_synthetic() const;
  std::string label() const;
  bool oracle() const { return normalizer == NormalizerKind::global; }
};

// Sets one dotted key. Throws ConfigError naming the key on an unknown key
// or a malformed value.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);
// "key=value"
void apply_override(RunConfig& cfg, std::string_view assignment);

// Flat "key = value" text; '#' starts a comment; "[section]" prefixes the
// following keys with "section.".
RunConfig parse_config(std::string_view text, RunConfig base = {});
RunConfig load_config_file(const std::filesystem::path& path, RunConfig base = {});

// Range checks across fields. Throws ConfigError with the field path.
void validate(const RunConfig& cfg);

// Every key with its resolved value, in schema order.
std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& cfg);
std::string to_config_text(const RunConfig& cfg);

// Keys accepted by apply_setting.
std::vector<std::string> config_keys();

std::string_view to_string(DatasetSource source);
std::string_view to_string(EvaluationCadence cadence);
std::string_view to_string(CleanUpdateMode mode);

// Shortest text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace tabcl
