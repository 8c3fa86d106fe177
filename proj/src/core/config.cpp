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

#include "core/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "core/csv.hpp"
#include "core/error.hpp"

namespace tabcl {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw ContractError("format_double failed");
  return std::string(buf, ptr);
}

std::string_view to_string(DatasetSource source) {
  switch (source) {
    case DatasetSource::synthetic: return "synthetic";
    case DatasetSource::unsw_csv: return "unsw-csv";
    case DatasetSource::cicids_csv: return "cicids-csv";
  }
  return "unknown";
}

std::string_view to_string(EvaluationCadence cadence) {
  return cadence == EvaluationCadence::epoch ? "epoch" : "experience";
}

std::string_view to_string(CleanUpdateMode mode) {
  return mode == CleanUpdateMode::experience ? "experience" : "minibatch";
}

DriftConfig RunConfig::resolved_synthetic() const {
  DriftConfig d = synthetic;
  d.seed = synthetic_seed.value_or(seed);
  return d;
}

std::string RunConfig::label() const {
  if (!name.empty()) return name;
  return std::string(to_string(normalizer)) + "-" + std::string(to_string(strategy)) + "-s" +
         std::to_string(seed);
}

namespace {

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view what) {
  throw ConfigError(std::string(key) + ": " + std::string(what) + " (got '" + std::string(value) +
                    "')");
}

std::uint64_t parse_u64(std::string_view key, std::string_view value) {
  value = trim(value);
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
    bad_value(key, value, "expected a non-negative integer");
  }
  return out;
}

std::size_t parse_size(std::string_view key, std::string_view value) {
  return static_cast<std::size_t>(parse_u64(key, value));
}

double parse_real(std::string_view key, std::string_view value) {
  value = trim(value);
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty() ||
      !std::isfinite(out)) {
    bad_value(key, value, "expected a finite number");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  const std::string v = to_lower(trim(value));
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, value, "expected true or false");
}

std::vector<std::string> parse_list(std::string_view value) {
  std::vector<std::string> out;
  std::string_view rest = trim(value);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = trim(rest.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    out += items[i];
  }
  return out;
}

struct Field {
  const char* key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define TABCL_SIZE_FIELD(KEY, MEMBER)                                                  \
  Field {                                                                              \
    KEY, [](RunConfig& c, std::string_view v) { c.MEMBER = parse_size(KEY, v); },      \
        [](const RunConfig& c) { return std::to_string(c.MEMBER); }                    \
  }
#define TABCL_REAL_FIELD(KEY, MEMBER)                                                  \
  Field {                                                                              \
    KEY, [](RunConfig& c, std::string_view v) { c.MEMBER = parse_real(KEY, v); },      \
        [](const RunConfig& c) { return format_double(c.MEMBER); }                     \
  }
#define TABCL_BOOL_FIELD(KEY, MEMBER)                                                  \
  Field {                                                                              \
    KEY, [](RunConfig& c, std::string_view v) { c.MEMBER = parse_bool(KEY, v); },      \
        [](const RunConfig& c) { return std::string(c.MEMBER ? "true" : "false"); }    \
  }
#define TABCL_STRING_FIELD(KEY, MEMBER)                                                \
  Field {                                                                              \
    KEY, [](RunConfig& c, std::string_view v) { c.MEMBER = std::string(trim(v)); },    \
        [](const RunConfig& c) { return c.MEMBER; }                                    \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      TABCL_STRING_FIELD("name", name),
      Field{"seed", [](RunConfig& c, std::string_view v) { c.seed = parse_u64("seed", v); },
            [](const RunConfig& c) { return std::to_string(c.seed); }},

      Field{"dataset.source",
            [](RunConfig& c, std::string_view v) {
              const std::string s = to_lower(trim(v));
              if (s == "synthetic") c.source = DatasetSource::synthetic;
              else if (s == "unsw-csv" || s == "unsw") c.source = DatasetSource::unsw_csv;
              else if (s == "cicids-csv" || s == "cicids") c.source = DatasetSource::cicids_csv;
              else bad_value("dataset.source", v, "expected synthetic, unsw-csv or cicids-csv");
            },
            [](const RunConfig& c) { return std::string(to_string(c.source)); }},
      TABCL_STRING_FIELD("dataset.path", dataset_path),
      TABCL_BOOL_FIELD("dataset.header", has_header),
      TABCL_STRING_FIELD("dataset.label_column", label_column),
      Field{"dataset.drop_columns",
            [](RunConfig& c, std::string_view v) { c.drop_columns = parse_list(v); },
            [](const RunConfig& c) { return join(c.drop_columns); }},
      TABCL_SIZE_FIELD("dataset.chunk_size", chunk_size),
      TABCL_REAL_FIELD("dataset.split_ratio", split_ratio),
      TABCL_BOOL_FIELD("dataset.drop_partial", drop_partial),

      TABCL_SIZE_FIELD("synthetic.n_experiences", synthetic.n_experiences),
      TABCL_SIZE_FIELD("synthetic.rows_per_experience", synthetic.rows_per_experience),
      TABCL_SIZE_FIELD("synthetic.n_features", synthetic.n_features),
      TABCL_SIZE_FIELD("synthetic.scale_jump_at", synthetic.scale_jump_at),
      TABCL_REAL_FIELD("synthetic.scale_factor", synthetic.scale_factor),
      TABCL_REAL_FIELD("synthetic.class_balance", synthetic.class_balance),
      Field{"synthetic.seed",
            [](RunConfig& c, std::string_view v) {
              if (trim(v).empty()) c.synthetic_seed.reset();
              else c.synthetic_seed = parse_u64("synthetic.seed", v);
            },
            [](const RunConfig& c) { return std::to_string(c.resolved_synthetic().seed); }},

      Field{"normalizer.kind",
            [](RunConfig& c, std::string_view v) { c.normalizer = parse_normalizer_kind(v); },
            [](const RunConfig& c) { return std::string(to_string(c.normalizer)); }},
      TABCL_REAL_FIELD("normalizer.eta", normalizer_options.eta),
      TABCL_REAL_FIELD("normalizer.lambda", normalizer_options.lambda),
      TABCL_REAL_FIELD("normalizer.epsilon_cn", normalizer_options.epsilon_cn),
      TABCL_REAL_FIELD("normalizer.epsilon_den", normalizer_options.epsilon_den),
      Field{"normalizer.clean_update",
            [](RunConfig& c, std::string_view v) {
              const std::string s = to_lower(trim(v));
              if (s == "experience") c.clean_update = CleanUpdateMode::experience;
              else if (s == "minibatch") c.clean_update = CleanUpdateMode::minibatch;
              else bad_value("normalizer.clean_update", v, "expected experience or minibatch");
            },
            [](const RunConfig& c) { return std::string(to_string(c.clean_update)); }},

      Field{"strategy.kind",
            [](RunConfig& c, std::string_view v) { c.strategy = parse_strategy_kind(v); },
            [](const RunConfig& c) { return std::string(to_string(c.strategy)); }},
      TABCL_SIZE_FIELD("strategy.buffer_capacity", strategy_options.buffer_capacity),
      TABCL_REAL_FIELD("strategy.replay_fraction", strategy_options.replay_fraction),
      TABCL_SIZE_FIELD("strategy.reference_batch", strategy_options.reference_batch),
      TABCL_REAL_FIELD("strategy.ewc_lambda", strategy_options.ewc_lambda),
      TABCL_SIZE_FIELD("strategy.fisher_sample", strategy_options.fisher_sample),

      TABCL_SIZE_FIELD("training.epochs", training.epochs),
      TABCL_SIZE_FIELD("training.batch_size", training.batch_size),
      TABCL_REAL_FIELD("training.learning_rate", training.learning_rate),
      TABCL_REAL_FIELD("training.kappa", training.kappa),
      TABCL_REAL_FIELD("training.dropout", training.dropout),
      TABCL_SIZE_FIELD("training.hidden_layers", training.hidden_layers),
      TABCL_SIZE_FIELD("training.hidden_width", training.hidden_width),
      TABCL_REAL_FIELD("training.adam_beta1", training.adam_beta1),
      TABCL_REAL_FIELD("training.adam_beta2", training.adam_beta2),
      TABCL_REAL_FIELD("training.adam_epsilon", training.adam_epsilon),
      TABCL_BOOL_FIELD("training.shuffle", training.shuffle),

      Field{"evaluation.cadence",
            [](RunConfig& c, std::string_view v) {
              const std::string s = to_lower(trim(v));
              if (s == "epoch") c.cadence = EvaluationCadence::epoch;
              else if (s == "experience") c.cadence = EvaluationCadence::experience;
              else bad_value("evaluation.cadence", v, "expected epoch or experience");
            },
            [](const RunConfig& c) { return std::string(to_string(c.cadence)); }},

      TABCL_STRING_FIELD("output.dir", output_dir),
      TABCL_BOOL_FIELD("output.snapshots", snapshots),
      TABCL_STRING_FIELD("resume.from", resume_from),
  };
  return table;
}

#undef TABCL_SIZE_FIELD
#undef TABCL_REAL_FIELD
#undef TABCL_BOOL_FIELD
#undef TABCL_STRING_FIELD

}  // namespace

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
  const std::string k = to_lower(trim(key));
  for (const auto& f : fields()) {
    if (k == f.key) {
      f.set(cfg, value);
      return;
    }
  }
  throw ConfigError(std::string(trim(key)) + ": unknown configuration key");
}

void apply_override(RunConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
  }
  apply_setting(cfg, assignment.substr(0, eq), assignment.substr(eq + 1));
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::string section;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    if (view.front() == '[') {
      if (view.back() != ']') throw ConfigError("line " + std::to_string(number) + ": bad section");
      section = std::string(trim(view.substr(1, view.size() - 2)));
      continue;
    }
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    }
    std::string key(trim(view.substr(0, eq)));
    if (!section.empty()) key = section + "." + key;
    apply_setting(base, key, view.substr(eq + 1));
  }
  return base;
}

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), std::move(base));
}

void validate(const RunConfig& cfg) {
  auto fail = [](const char* key, const std::string& why) {
    throw ConfigError(std::string(key) + ": " + why);
  };
  if (cfg.source != DatasetSource::synthetic) {
    if (cfg.dataset_path.empty()) fail("dataset.path", "required for CSV sources");
    if (!cfg.has_header && cfg.source != DatasetSource::unsw_csv) {
      fail("dataset.header", "headerless files are only supported for unsw-csv");
    }
    if (cfg.chunk_size < 2) fail("dataset.chunk_size", "must be >= 2");
  } else {
    cfg.resolved_synthetic().validate();
  }
  if (!(cfg.split_ratio > 0.0 && cfg.split_ratio < 1.0)) fail("dataset.split_ratio", "must lie in (0, 1)");
  const auto& n = cfg.normalizer_options;
  if (!(n.eta >= 0.0 && n.eta <= 1.0)) fail("normalizer.eta", "must lie in [0, 1]");
  if (!(n.lambda > 0.0 && n.lambda <= 1.0)) fail("normalizer.lambda", "must lie in (0, 1]");
  if (!(n.epsilon_cn > 0.0)) fail("normalizer.epsilon_cn", "must be positive");
  if (!(n.epsilon_den > 0.0)) fail("normalizer.epsilon_den", "must be positive");
  const auto& s = cfg.strategy_options;
  if (s.buffer_capacity == 0) fail("strategy.buffer_capacity", "must be positive");
  if (!(s.replay_fraction >= 0.0 && s.replay_fraction <= 1.0)) {
    fail("strategy.replay_fraction", "must lie in [0, 1]");
  }
  if (s.reference_batch == 0) fail("strategy.reference_batch", "must be positive");
  if (!(s.ewc_lambda >= 0.0)) fail("strategy.ewc_lambda", "must be >= 0");
  if (s.fisher_sample == 0) fail("strategy.fisher_sample", "must be positive");
  const auto& t = cfg.training;
  if (t.epochs == 0) fail("training.epochs", "must be positive");
  if (t.batch_size == 0) fail("training.batch_size", "must be positive");
  if (!(t.learning_rate > 0.0)) fail("training.learning_rate", "must be positive");
  if (!(t.kappa >= 0.0 && t.kappa <= 1.0)) fail("training.kappa", "must lie in [0, 1]");
  if (!(t.dropout >= 0.0 && t.dropout < 1.0)) fail("training.dropout", "must lie in [0, 1)");
  if (t.hidden_width == 0) fail("training.hidden_width", "must be positive");
  if (!(t.adam_beta1 >= 0.0 && t.adam_beta1 < 1.0)) fail("training.adam_beta1", "must lie in [0, 1)");
  if (!(t.adam_beta2 >= 0.0 && t.adam_beta2 < 1.0)) fail("training.adam_beta2", "must lie in [0, 1)");
  if (!(t.adam_epsilon > 0.0)) fail("training.adam_epsilon", "must be positive");
}

std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(cfg));
  return out;
}

std::string to_config_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : config_echo(cfg)) out += k + " = " + v + "\n";
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.emplace_back(f.key);
  return out;
}

}  // namespace tabcl
