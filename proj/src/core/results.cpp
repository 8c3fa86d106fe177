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

#include "core/results.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "core/csv.hpp"
#include "core/error.hpp"

namespace tabcl {

using nlohmann::json;

namespace {

constexpr const char* kCsvHeader = "experience,epoch,normalizer,strategy,metric,value";

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> json_optional(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

std::string optional_text(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

double parse_double_cell(std::string_view text, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw IngestError("metrics csv line " + std::to_string(line) + ": bad number '" +
                      std::string(text) + "'");
  }
  return v;
}

std::size_t parse_index_cell(std::string_view text, std::size_t line) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw IngestError("metrics csv line " + std::to_string(line) + ": bad index '" +
                      std::string(text) + "'");
  }
  return v;
}

json table_json(const MetricTable& m, std::size_t rows) {
  json out = json::array();
  for (std::size_t t = 0; t < rows; ++t) {
    json row = json::array();
    for (std::size_t s = 0; s <= t; ++s) row.push_back(optional_json(m.get(t, s)));
    out.push_back(std::move(row));
  }
  return out;
}

MetricTable json_table(const json& j, std::size_t experiences) {
  MetricTable m(experiences);
  if (j.size() > experiences) throw IngestError("summary table has more rows than experiences");
  for (std::size_t t = 0; t < j.size(); ++t) {
    const json& row = j.at(t);
    if (row.size() != t + 1) throw IngestError("summary table row " + std::to_string(t) + " has wrong length");
    for (std::size_t s = 0; s <= t; ++s) {
      if (auto v = json_optional(row.at(s))) m.set(t, s, *v);
    }
  }
  return m;
}

}  // namespace

std::string normalizer_label(const RunConfig& cfg) {
  std::string name(to_string(cfg.normalizer));
  if (cfg.oracle()) name += "[oracle]";
  return name;
}

std::vector<MetricRow> metric_rows(const RunLog& log) {
  const std::string normalizer = normalizer_label(log.config);
  const std::string strategy(to_string(log.config.strategy));
  std::vector<MetricRow> rows;
  auto add = [&](const EpochRecord& e, std::string metric, std::optional<double> value) {
    rows.push_back(MetricRow{e.experience, e.epoch, normalizer, strategy, std::move(metric), value});
  };
  for (const auto& e : log.epochs) {
    add(e, "train_loss", e.train_loss);
    if (!e.evaluated()) continue;
    for (std::size_t s = 0; s < e.accuracy.size(); ++s) add(e, "accuracy@" + std::to_string(s), e.accuracy[s]);
    for (std::size_t s = 0; s < e.auroc.size(); ++s) add(e, "auroc@" + std::to_string(s), e.auroc[s]);
    add(e, "average_accuracy", e.average_accuracy);
    add(e, "average_auroc", e.average_auroc);
    add(e, "average_forgetting", e.average_forgetting);
  }
  return rows;
}

std::string metrics_csv(const RunLog& log) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : metric_rows(log)) {
    out += std::to_string(r.experience) + "," + std::to_string(r.epoch) + "," + r.normalizer + "," +
           r.strategy + "," + r.metric + "," + optional_text(r.value) + "\n";
  }
  return out;
}

std::vector<MetricRow> parse_metrics_csv(const std::string& text) {
  std::istringstream in(text);
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw IngestError("metrics csv is empty");
  std::string header;
  for (std::size_t i = 0; i < fields.size(); ++i) header += (i ? "," : "") + fields[i];
  if (header != kCsvHeader) throw IngestError("metrics csv has unexpected header '" + header + "'");
  std::vector<MetricRow> rows;
  while (reader.next(fields)) {
    if (fields.size() != 6) {
      throw IngestError("metrics csv line " + std::to_string(reader.line()) + ": expected 6 fields");
    }
    MetricRow r;
    r.experience = parse_index_cell(fields[0], reader.line());
    r.epoch = parse_index_cell(fields[1], reader.line());
    r.normalizer = fields[2];
    r.strategy = fields[3];
    r.metric = fields[4];
    if (!fields[5].empty()) r.value = parse_double_cell(fields[5], reader.line());
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<MetricRow> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_metrics_csv(buffer.str());
}

AccuracyMatrix accuracy_from_rows(const std::vector<MetricRow>& rows) {
  // Last evaluated epoch per experience.
  std::map<std::size_t, std::size_t> last_epoch;
  for (const auto& r : rows) {
    if (r.metric.rfind("accuracy@", 0) == 0) {
      auto& e = last_epoch[r.experience];
      e = std::max(e, r.epoch);
    }
  }
  const std::size_t experiences = last_epoch.empty() ? 0 : last_epoch.rbegin()->first + 1;
  AccuracyMatrix m(experiences);
  for (const auto& r : rows) {
    if (r.metric.rfind("accuracy@", 0) != 0) continue;
    if (r.epoch != last_epoch[r.experience] || !r.value) continue;
    const std::string_view idx = std::string_view(r.metric).substr(9);
    m.set(r.experience, parse_index_cell(idx, 0), *r.value);
  }
  return m;
}

std::string summary_json(const RunLog& log, int indent) {
  const std::size_t done = log.completed_experiences;
  json j;
  j["format"] = "tabcl-run-summary";
  j["format_version"] = 1;
  j["label"] = log.config.label();
  j["status"] = std::string(to_string(log.status));
  j["error"] = log.error;
  j["oracle"] = log.oracle();
  j["normalizer"] = std::string(to_string(log.config.normalizer));
  j["strategy"] = std::string(to_string(log.config.strategy));
  j["seed"] = log.config.seed;
  j["experiences"] = log.experiences;
  j["completed_experiences"] = done;
  j["features"] = log.features;
  j["test_rows"] = log.test_rows;
  j["accuracy"] = table_json(log.accuracy, done);
  j["auroc"] = table_json(log.auroc, done);

  json avg_acc = json::array(), avg_auc = json::array(), avg_fgt = json::array();
  for (std::size_t t = 0; t < done; ++t) {
    avg_acc.push_back(average_accuracy(log.accuracy, t));
    avg_auc.push_back(optional_json(average_present(log.auroc, t)));
    avg_fgt.push_back(optional_json(average_forgetting(log.accuracy, t)));
  }
  j["average_accuracy"] = avg_acc;
  j["average_auroc"] = avg_auc;
  j["average_forgetting"] = avg_fgt;
  j["final"] = {{"average_accuracy", optional_json(log.final_average_accuracy())},
                {"average_forgetting", optional_json(log.final_average_forgetting())},
                {"average_auroc", optional_json(log.final_average_auroc())}};

  json epochs = json::array();
  for (const auto& e : log.epochs) {
    json r;
    r["experience"] = e.experience;
    r["epoch"] = e.epoch;
    r["train_loss"] = e.train_loss;
    r["normalizer_version"] = e.normalizer_version;
    if (e.evaluated()) {
      r["accuracy"] = e.accuracy;
      json a = json::array();
      for (const auto& v : e.auroc) a.push_back(optional_json(v));
      r["auroc"] = a;
      r["average_accuracy"] = optional_json(e.average_accuracy);
      r["average_auroc"] = optional_json(e.average_auroc);
      r["average_forgetting"] = optional_json(e.average_forgetting);
    }
    epochs.push_back(std::move(r));
  }
  j["epochs"] = epochs;
  j["wall_clock_seconds"] = {{"per_experience", log.experience_seconds},
                             {"total", log.total_seconds()}};
  json config = json::object();
  for (const auto& [k, v] : log.config_echo) config[k] = v;
  j["config"] = config;
  if (!log.diagnostic_snapshot.empty()) j["diagnostic_snapshot"] = log.diagnostic_snapshot;
  return j.dump(indent) + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw IoError("short write to " + path.string());
}

void write_run(const RunLog& log, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  write_text(dir / "metrics.csv", metrics_csv(log));
  write_text(dir / "summary.json", summary_json(log));
  write_text(dir / "config.cfg", to_config_text(log.config));
}

RunSummary summarize(const RunLog& log) {
  RunSummary s;
  s.label = log.config.label();
  s.normalizer = std::string(to_string(log.config.normalizer));
  s.strategy = std::string(to_string(log.config.strategy));
  s.seed = log.config.seed;
  s.oracle = log.oracle();
  s.status = log.status;
  s.error = log.error;
  s.experiences = log.experiences;
  s.completed_experiences = log.completed_experiences;
  s.accuracy = log.accuracy;
  s.auroc = log.auroc;
  if (log.status == RunStatus::completed) {
    s.final_average_accuracy = log.final_average_accuracy();
    s.final_average_forgetting = log.final_average_forgetting();
    s.final_average_auroc = log.final_average_auroc();
  }
  s.wall_clock_seconds = log.total_seconds();
  return s;
}

RunSummary parse_summary_json(const std::string& text) {
  RunSummary s;
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "tabcl-run-summary") throw IngestError("not a tabcl run summary");
    s.label = j.at("label").get<std::string>();
    s.normalizer = j.at("normalizer").get<std::string>();
    s.strategy = j.at("strategy").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.oracle = j.at("oracle").get<bool>();
    s.status = parse_run_status(j.at("status").get<std::string>());
    s.error = j.value("error", "");
    s.experiences = j.at("experiences").get<std::size_t>();
    s.completed_experiences = j.at("completed_experiences").get<std::size_t>();
    s.accuracy = json_table(j.at("accuracy"), s.experiences);
    s.auroc = json_table(j.at("auroc"), s.experiences);
    if (s.status == RunStatus::completed) {
      const json& f = j.at("final");
      s.final_average_accuracy = json_optional(f.at("average_accuracy"));
      s.final_average_forgetting = json_optional(f.at("average_forgetting"));
      s.final_average_auroc = json_optional(f.at("average_auroc"));
    }
    s.wall_clock_seconds = j.at("wall_clock_seconds").at("total").get<double>();
  } catch (const json::exception& e) {
    throw IngestError(std::string("malformed run summary: ") + e.what());
  }
  return s;
}

RunSummary read_summary_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_summary_json(buffer.str());
  } catch (const IngestError& e) {
    throw IngestError(path.string() + ": " + e.what());
  }
}

std::string comparison_csv(const std::vector<RunSummary>& runs) {
  std::string out =
      "run,normalizer,strategy,seed,oracle,status,completed_experiences,final_average_accuracy,"
      "final_average_forgetting,final_average_auroc,error\n";
  for (const auto& r : runs) {
    std::string error = r.error;
    for (char& c : error) {
      if (c == ',' || c == '\n' || c == '"') c = ' ';
    }
    out += r.label + "," + r.normalizer + "," + r.strategy + "," + std::to_string(r.seed) + "," +
           (r.oracle ? "true" : "false") + "," + std::string(to_string(r.status)) + "," +
           std::to_string(r.completed_experiences) + "," + optional_text(r.final_average_accuracy) +
           "," + optional_text(r.final_average_forgetting) + "," +
           optional_text(r.final_average_auroc) + "," + error + "\n";
  }
  return out;
}

std::vector<ComparisonCell> aggregate(const std::vector<RunSummary>& runs) {
  struct Acc {
    ComparisonCell cell;
    double acc = 0.0, fgt = 0.0, auc = 0.0;
    std::size_t n_acc = 0, n_fgt = 0, n_auc = 0;
  };
  std::map<std::pair<std::string, std::string>, Acc> groups;
  for (const auto& r : runs) {
    Acc& a = groups[{r.normalizer, r.strategy}];
    a.cell.normalizer = r.normalizer;
    a.cell.strategy = r.strategy;
    a.cell.oracle = r.oracle;
    ++a.cell.runs;
    if (r.status != RunStatus::completed) continue;
    ++a.cell.completed;
    if (r.final_average_accuracy) a.acc += *r.final_average_accuracy, ++a.n_acc;
    if (r.final_average_forgetting) a.fgt += *r.final_average_forgetting, ++a.n_fgt;
    if (r.final_average_auroc) a.auc += *r.final_average_auroc, ++a.n_auc;
  }
  std::vector<ComparisonCell> out;
  for (auto& [key, a] : groups) {
    if (a.n_acc) a.cell.average_accuracy = a.acc / static_cast<double>(a.n_acc);
    if (a.n_fgt) a.cell.average_forgetting = a.fgt / static_cast<double>(a.n_fgt);
    if (a.n_auc) a.cell.average_auroc = a.auc / static_cast<double>(a.n_auc);
    out.push_back(a.cell);
  }
  return out;
}

std::string aggregate_csv(const std::vector<ComparisonCell>& cells) {
  std::string out =
      "normalizer,strategy,oracle,runs,completed,mean_final_average_accuracy,"
      "mean_final_average_forgetting,mean_final_average_auroc\n";
  for (const auto& c : cells) {
    out += c.normalizer + "," + c.strategy + "," + (c.oracle ? "true" : "false") + "," +
           std::to_string(c.runs) + "," + std::to_string(c.completed) + "," +
           optional_text(c.average_accuracy) + "," + optional_text(c.average_forgetting) + "," +
           optional_text(c.average_auroc) + "\n";
  }
  return out;
}

std::vector<RunSummary> collect_summaries(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root)) throw IoError(root.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().filename() == "summary.json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<RunSummary> out;
  for (const auto& f : files) out.push_back(read_summary_json(f));
  return out;
}

}  // namespace tabcl
