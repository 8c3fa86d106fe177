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

#include "core/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <random>

#include "core/adam.hpp"
#include "core/csv.hpp"
#include "core/error.hpp"
#include "core/mlp.hpp"
#include "core/normalization.hpp"
#include "core/pipeline.hpp"
#include "core/preprocess.hpp"
#include "core/serialize.hpp"
#include "core/strategies.hpp"
#include "core/stream.hpp"

namespace tabcl {

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::completed: return "completed";
    case RunStatus::aborted: return "aborted";
    case RunStatus::failed: return "failed";
  }
  return "unknown";
}

RunStatus parse_run_status(std::string_view text) {
  if (text == "completed") return RunStatus::completed;
  if (text == "aborted") return RunStatus::aborted;
  if (text == "failed") return RunStatus::failed;
  throw ConfigError("unknown run status '" + std::string(text) + "'");
}

double RunLog::total_seconds() const {
  return std::accumulate(experience_seconds.begin(), experience_seconds.end(), 0.0);
}

std::optional<double> RunLog::final_average_accuracy() const {
  if (completed_experiences == 0) return std::nullopt;
  return average_accuracy(accuracy, completed_experiences - 1);
}

std::optional<double> RunLog::final_average_forgetting() const {
  if (completed_experiences == 0) return std::nullopt;
  return average_forgetting(accuracy, completed_experiences - 1);
}

std::optional<double> RunLog::final_average_auroc() const {
  if (completed_experiences == 0) return std::nullopt;
  return average_present(auroc, completed_experiences - 1);
}

namespace {

std::vector<std::filesystem::path> dataset_paths(const RunConfig& cfg) {
  std::vector<std::filesystem::path> out;
  std::string_view rest = cfg.dataset_path;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = trim(rest.substr(0, comma));
    if (!item.empty()) out.emplace_back(std::string(item));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ConfigError("dataset.path: no file given");
  return out;
}

}  // namespace

ExperienceStream load_stream(const RunConfig& cfg) {
  switch (cfg.source) {
    case DatasetSource::synthetic:
      return generate_drift_stream(cfg.resolved_synthetic(), cfg.split_ratio);
    case DatasetSource::unsw_csv: {
      UnswOptions options;
      options.label_column = cfg.label_column;
      options.drop_columns = cfg.drop_columns;
      if (!cfg.has_header) options.column_names = unsw_column_names();
      const TabularDataset data = preprocess_unsw_files(dataset_paths(cfg), options);
      return chunk_stream(data.data, cfg.chunk_size, cfg.split_ratio, cfg.drop_partial);
    }
    case DatasetSource::cicids_csv: {
      CicidsOptions options;
      options.label_column = cfg.label_column;
      const TabularDataset data = preprocess_cicids_files(dataset_paths(cfg), options);
      return chunk_stream(data.data, cfg.chunk_size, cfg.split_ratio, cfg.drop_partial);
    }
  }
  throw ConfigError("dataset.source: unsupported");
}

std::filesystem::path output_root() {
  if (const char* env = std::getenv("TABCL_OUTPUT_ROOT"); env && *env) return env;
  return "runs";
}

std::filesystem::path resolve_output_dir(const RunConfig& cfg) {
  if (cfg.output_dir.empty()) return output_root() / cfg.label();
  std::filesystem::path p(cfg.output_dir);
  if (p.is_absolute()) return p;
  return output_root() / p;
}

std::filesystem::path snapshot_path(const std::filesystem::path& run_dir, std::size_t experience) {
  return run_dir / "snapshots" / ("experience_" + std::to_string(experience) + ".snap");
}

namespace {

constexpr char kSnapshotMagic[] = "TABCLSNP";
constexpr std::uint64_t kSnapshotVersion = 1;
enum class SnapshotKind : std::uint8_t { checkpoint = 0, diagnostic = 1 };

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix(seed ^ splitmix(stream));
}

// Keys that may differ between a run and the run it resumes from.
bool resume_neutral(const std::string& key) {
  return key == "output.dir" || key == "output.snapshots" || key == "resume.from" || key == "name";
}

struct Session {
  Session(const RunConfig& cfg, const ExperienceStream& stream)
      : cfg(cfg),
        stream(stream),
        normalizer(make_normalizer(cfg.normalizer, stream.features(), cfg.normalizer_options)),
        model(stream.features(), mlp_options(cfg)),
        pipeline(model, normalizer->trainable_scaling()),
        adam(pipeline.parameter_count(),
             AdamOptions{cfg.training.learning_rate, cfg.training.adam_beta1,
                         cfg.training.adam_beta2, cfg.training.adam_epsilon}),
        strategy(make_strategy(cfg.strategy, cfg.strategy_options, stream.features(),
                               derive_seed(cfg.seed, 2))),
        rng(derive_seed(cfg.seed, 3)) {}

  static MlpOptions mlp_options(const RunConfig& cfg) {
    MlpOptions o;
    o.hidden.assign(cfg.training.hidden_layers, cfg.training.hidden_width);
    o.dropout = cfg.training.dropout;
    o.seed = derive_seed(cfg.seed, 1);
    return o;
  }

  const RunConfig& cfg;
  const ExperienceStream& stream;
  std::unique_ptr<Normalizer> normalizer;
  MlpModel model;
  TrainablePipeline pipeline;
  AdamState adam;
  std::unique_ptr<Strategy> strategy;
  std::mt19937_64 rng;
  std::uint64_t updates_applied = 0;
  std::uint64_t global_step = 0;
};

void write_log_state(BinaryWriter& out, const RunLog& log) {
  out.u64(log.completed_experiences);
  for (std::size_t t = 0; t < log.completed_experiences; ++t) {
    for (std::size_t s = 0; s <= t; ++s) {
      out.f64(log.accuracy.at(t, s));
      const auto a = log.auroc.get(t, s);
      out.u8(a ? 1 : 0);
      out.f64(a.value_or(0.0));
    }
  }
  out.doubles(log.experience_seconds);
  out.u64(log.epochs.size());
  for (const auto& e : log.epochs) {
    out.u64(e.experience);
    out.u64(e.epoch);
    out.f64(e.train_loss);
    out.u64(e.normalizer_version);
    out.doubles(e.accuracy);
    out.u64(e.auroc.size());
    for (const auto& a : e.auroc) {
      out.u8(a ? 1 : 0);
      out.f64(a.value_or(0.0));
    }
  }
}

std::optional<double> read_optional(BinaryReader& in) {
  const bool present = in.u8() != 0;
  const double v = in.f64();
  return present ? std::optional<double>(v) : std::nullopt;
}

void fill_epoch_averages(EpochRecord& e, const AccuracyMatrix& finals);

void read_log_state(BinaryReader& in, RunLog& log) {
  log.completed_experiences = in.u64();
  if (log.completed_experiences > log.experiences) {
    throw IoError("snapshot holds more experiences than the configured stream");
  }
  for (std::size_t t = 0; t < log.completed_experiences; ++t) {
    for (std::size_t s = 0; s <= t; ++s) {
      log.accuracy.set(t, s, in.f64(), log.test_rows[s]);
      if (auto a = read_optional(in)) log.auroc.set(t, s, *a, log.test_rows[s]);
    }
  }
  log.experience_seconds = in.doubles();
  const std::uint64_t n = in.u64();
  log.epochs.clear();
  for (std::uint64_t i = 0; i < n; ++i) {
    EpochRecord e;
    e.experience = in.u64();
    e.epoch = in.u64();
    e.train_loss = in.f64();
    e.normalizer_version = in.u64();
    e.accuracy = in.doubles();
    const std::uint64_t k = in.u64();
    for (std::uint64_t j = 0; j < k; ++j) e.auroc.push_back(read_optional(in));
    fill_epoch_averages(e, log.accuracy);
    log.epochs.push_back(std::move(e));
  }
}

void write_snapshot(const std::filesystem::path& path, SnapshotKind kind, const Session& s,
                    const RunLog& log, std::uint64_t next_experience, const std::string& message) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot write snapshot " + path.string());
  BinaryWriter out(file);
  out.str(kSnapshotMagic);
  out.u64(kSnapshotVersion);
  out.u8(static_cast<std::uint8_t>(kind));
  out.str(to_config_text(s.cfg));
  out.u64(next_experience);
  out.u64(s.updates_applied);
  out.u64(s.global_step);
  out.doubles(s.model.parameters());
  out.generator(s.model.generator());
  out.doubles(s.adam.first_moment);
  out.doubles(s.adam.second_moment);
  out.u64(s.adam.step);
  s.normalizer->save(out);
  s.strategy->save(out);
  out.generator(s.rng);
  write_log_state(out, log);
  out.str(message);
  if (!file) throw IoError("short write to snapshot " + path.string());
}

std::uint64_t read_snapshot(const std::filesystem::path& path, Session& s, RunLog& log) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open snapshot " + path.string());
  BinaryReader in(file);
  if (in.str() != kSnapshotMagic) throw IoError(path.string() + " is not a tabcl snapshot");
  if (const auto v = in.u64(); v != kSnapshotVersion) {
    throw IoError(path.string() + ": unsupported snapshot version " + std::to_string(v));
  }
  if (static_cast<SnapshotKind>(in.u8()) != SnapshotKind::checkpoint) {
    throw IoError(path.string() + " is a diagnostic snapshot and cannot be resumed");
  }
  const RunConfig saved = parse_config(in.str());
  const auto mine = config_echo(s.cfg);
  const auto theirs = config_echo(saved);
  for (std::size_t i = 0; i < mine.size(); ++i) {
    if (resume_neutral(mine[i].first)) continue;
    if (mine[i].second != theirs[i].second) {
      throw ConfigError(mine[i].first + ": differs from the snapshot being resumed ('" +
                        mine[i].second + "' vs '" + theirs[i].second + "')");
    }
  }
  const std::uint64_t next = in.u64();
  s.updates_applied = in.u64();
  s.global_step = in.u64();
  const std::vector<double> params = in.doubles();
  if (params.size() != s.model.parameter_count()) throw IoError("snapshot parameter count mismatch");
  s.model.set_parameters(params);
  in.generator(s.model.generator());
  s.adam.first_moment = in.doubles();
  s.adam.second_moment = in.doubles();
  s.adam.step = in.u64();
  if (s.adam.first_moment.size() != s.pipeline.parameter_count() ||
      s.adam.second_moment.size() != s.pipeline.parameter_count()) {
    throw IoError("snapshot optimizer state mismatch");
  }
  s.normalizer->load(in);
  s.strategy->load(in);
  in.generator(s.rng);
  read_log_state(in, log);
  if (next != log.completed_experiences) throw IoError("snapshot experience count is inconsistent");
  return next;
}

void fill_epoch_averages(EpochRecord& e, const AccuracyMatrix& finals) {
  if (!e.evaluated()) return;
  const std::size_t t = e.experience;
  double sum = 0.0;
  for (double a : e.accuracy) sum += a;
  e.average_accuracy = sum / static_cast<double>(e.accuracy.size());

  double auroc_sum = 0.0;
  std::size_t present = 0;
  for (const auto& a : e.auroc) {
    if (a) {
      auroc_sum += *a;
      ++present;
    }
  }
  e.average_auroc = present ? std::optional<double>(auroc_sum / static_cast<double>(present))
                            : std::nullopt;

  // Earlier rows are the finished experiences; row t is this epoch.
  if (t == 0) {
    e.average_forgetting.reset();
    return;
  }
  AccuracyMatrix m(t + 1);
  for (std::size_t r = 0; r < t; ++r) {
    for (std::size_t c = 0; c <= r; ++c) m.set(r, c, finals.at(r, c));
  }
  for (std::size_t c = 0; c <= t; ++c) m.set(t, c, e.accuracy[c]);
  e.average_forgetting = average_forgetting(m, t);
}

EpochRecord evaluate(Session& s, std::size_t t, std::size_t epoch, double train_loss,
                     const RunHooks& hooks) {
  EpochRecord rec;
  rec.experience = t;
  rec.epoch = epoch;
  rec.train_loss = train_loss;
  rec.normalizer_version = s.normalizer->version();
  if (rec.normalizer_version != s.updates_applied) {
    throw ContractError("evaluation at experience " + std::to_string(t) + " saw normalizer version " +
                        std::to_string(rec.normalizer_version) + " but " +
                        std::to_string(s.updates_applied) + " updates were applied");
  }
  if (hooks.on_evaluate) {
    hooks.on_evaluate(EvaluationStamp{t, epoch, rec.normalizer_version, s.updates_applied});
  }
  for (std::size_t tp = 0; tp <= t; ++tp) {
    const FeatureMatrix& test = s.stream.chunks[tp].test;
    const Matrix x = s.normalizer->fixed_transform(test.values);
    const Vector probs = s.pipeline.predict(x);
    const std::span<const double> p(probs.data(), static_cast<std::size_t>(probs.size()));
    rec.accuracy.push_back(accuracy(threshold_all(p, s.cfg.training.kappa), test.labels));
    rec.auroc.push_back(auroc(p, test.labels));
  }
  return rec;
}

struct NonFiniteLoss {
  std::string message;
};

}  // namespace

RunLog run_experiment(const RunConfig& cfg, const RunHooks& hooks) {
  validate(cfg);
  const ExperienceStream stream = load_stream(cfg);
  return run_experiment(cfg, stream, hooks);
}

RunLog run_experiment(const RunConfig& cfg, const ExperienceStream& stream, const RunHooks& hooks) {
  validate(cfg);
  if (stream.size() == 0) throw IngestError("the data stream has no experiences");

  RunLog log;
  log.config = cfg;
  log.config_echo = config_echo(cfg);
  log.experiences = stream.size();
  log.features = stream.features();
  for (const auto& c : stream.chunks) log.test_rows.push_back(c.test.rows());
  log.accuracy.resize(log.experiences);
  log.auroc.resize(log.experiences);

  Session s(cfg, stream);
  if (auto* global = dynamic_cast<GlobalNormalizer*>(s.normalizer.get())) global->fit(stream);

  std::size_t start = 0;
  if (!cfg.resume_from.empty()) start = read_snapshot(cfg.resume_from, s, log);

  const bool per_batch_update =
      cfg.normalizer == NormalizerKind::clean && cfg.clean_update == CleanUpdateMode::minibatch;
  const std::filesystem::path run_dir =
      (cfg.snapshots || !cfg.output_dir.empty()) ? resolve_output_dir(cfg) : std::filesystem::path();
  const std::size_t end =
      hooks.stop_after ? std::min(*hooks.stop_after, log.experiences) : log.experiences;

  try {
    for (std::size_t t = start; t < end; ++t) {
      const auto started = std::chrono::steady_clock::now();
      const FeatureMatrix& train = stream.chunks[t].train;
      if (!per_batch_update) {
        s.normalizer->update(train.values);
        ++s.updates_applied;
      }
      TrainingContext ctx{s.pipeline, *s.normalizer};

      std::vector<std::size_t> order(train.rows());
      std::iota(order.begin(), order.end(), std::size_t{0});
      const std::size_t batch = cfg.training.batch_size;
      EpochRecord last;
      for (std::size_t epoch = 1; epoch <= cfg.training.epochs; ++epoch) {
        if (cfg.training.shuffle) std::shuffle(order.begin(), order.end(), s.rng);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t b = 0; b < order.size(); b += batch) {
          const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(b),
                                             order.begin() + static_cast<std::ptrdiff_t>(
                                                                 std::min(order.size(), b + batch)));
          const FeatureMatrix current = train.gather(idx);
          if (per_batch_update && epoch == 1) {
            s.normalizer->update(current.values);
            ++s.updates_applied;
          }
          const FeatureMatrix composed = s.strategy->compose_batch(current);
          s.model.set_mode(Mode::training);
          LossGradient lg =
              s.pipeline.loss_and_gradient(s.normalizer->fixed_transform(composed.values),
                                           composed.labels);
          double loss = lg.loss + s.strategy->adjust_gradient(ctx, lg.gradient);
          if (hooks.poison_step && *hooks.poison_step == s.global_step) {
            loss = std::numeric_limits<double>::quiet_NaN();
          }
          if (!std::isfinite(loss)) {
            throw NonFiniteLoss{"non-finite training loss at experience " + std::to_string(t) +
                                ", epoch " + std::to_string(epoch) + ", step " +
                                std::to_string(s.global_step)};
          }
          std::vector<double> params = s.pipeline.parameters();
          try {
            adam_step(s.adam, params, lg.gradient);
          } catch (const NumericError& e) {
            throw NonFiniteLoss{std::string(e.what()) + " at experience " + std::to_string(t) +
                                ", epoch " + std::to_string(epoch) + ", step " +
                                std::to_string(s.global_step)};
          }
          s.pipeline.set_parameters(params);
          ++s.global_step;
          loss_sum += loss;
          ++batches;
        }
        const double train_loss = loss_sum / static_cast<double>(std::max<std::size_t>(batches, 1));
        const bool evaluate_now =
            cfg.cadence == EvaluationCadence::epoch || epoch == cfg.training.epochs;
        EpochRecord rec;
        if (evaluate_now) {
          rec = evaluate(s, t, epoch, train_loss, hooks);
          fill_epoch_averages(rec, log.accuracy);
          last = rec;
        } else {
          rec.experience = t;
          rec.epoch = epoch;
          rec.train_loss = train_loss;
          rec.normalizer_version = s.normalizer->version();
        }
        log.epochs.push_back(std::move(rec));
      }

      for (std::size_t tp = 0; tp <= t; ++tp) {
        log.accuracy.set(t, tp, last.accuracy[tp], log.test_rows[tp]);
        if (last.auroc[tp]) log.auroc.set(t, tp, *last.auroc[tp], log.test_rows[tp]);
      }
      s.model.set_mode(Mode::evaluation);
      s.strategy->end_experience(ctx, train);
      s.model.set_mode(Mode::training);
      log.completed_experiences = t + 1;
      log.experience_seconds.push_back(
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
      if (cfg.snapshots) {
        write_snapshot(snapshot_path(run_dir, t), SnapshotKind::checkpoint, s, log, t + 1, {});
      }
    }
  } catch (const NonFiniteLoss& failure) {
    log.status = RunStatus::aborted;
    log.error = failure.message;
    if (!run_dir.empty()) {
      const auto path = run_dir / "diagnostic.snap";
      write_snapshot(path, SnapshotKind::diagnostic, s, log, log.completed_experiences,
                     failure.message);
      log.diagnostic_snapshot = path.string();
    }
  }
  return log;
}

}  // namespace tabcl
