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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "core/error.hpp"
#include "core/experiment.hpp"
#include "core/grid.hpp"
#include "core/results.hpp"

using namespace tabcl;
namespace fs = std::filesystem;

namespace {

RunConfig tiny_config(std::size_t experiences = 2) {
  RunConfig c;
  c.seed = 4;
  c.synthetic.n_experiences = experiences;
  c.synthetic.rows_per_experience = 200;
  c.synthetic.n_features = 4;
  c.synthetic.scale_jump_at = experiences - 1;
  c.synthetic.scale_factor = 10.0;
  c.training.epochs = 2;
  c.training.batch_size = 50;
  c.training.hidden_layers = 2;
  c.training.hidden_width = 8;
  c.training.learning_rate = 1e-2;
  c.normalizer = NormalizerKind::local;
  c.strategy = StrategyKind::finetune;
  return c;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tabcl_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Stream whose first test split holds benign rows only.
ExperienceStream single_class_first_test() {
  DriftConfig d;
  d.n_experiences = 2;
  d.rows_per_experience = 200;
  d.n_features = 3;
  d.scale_jump_at = 1;
  auto stream = generate_drift_stream(d, 0.8);
  auto& test = stream.chunks[0].test;
  std::vector<std::size_t> benign;
  for (std::size_t i = 0; i < test.rows(); ++i) {
    if (test.labels[i] == 0) benign.push_back(i);
  }
  test = test.gather(benign);
  return stream;
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("two experiences fill a 2x2 lower-triangular matrix") {
    auto log = run_experiment(tiny_config());
    CHECK(log.status == RunStatus::completed);
    CHECK(log.completed_experiences == 2);
    CHECK(log.accuracy.has(0, 0));
    CHECK(log.accuracy.has(1, 0));
    CHECK(log.accuracy.has(1, 1));
    CHECK(log.epochs.size() == 4);
    CHECK(log.experience_seconds.size() == 2);
    CHECK(log.final_average_accuracy().has_value());
    CHECK(*log.final_average_accuracy() == doctest::Approx(average_accuracy(log.accuracy, 1)));
  }

  TEST_CASE("same config and seed give bit-identical logs") {
    for (auto n : {NormalizerKind::clean, NormalizerKind::cn}) {
      for (auto st : {StrategyKind::reservoir, StrategyKind::agem, StrategyKind::ewc}) {
        auto c = tiny_config();
        c.normalizer = n;
        c.strategy = st;
        c.strategy_options.buffer_capacity = 40;
        c.strategy_options.reference_batch = 16;
        CHECK(metrics_csv(run_experiment(c)) == metrics_csv(run_experiment(c)));
      }
    }
    auto a = tiny_config();
    auto b = a;
    b.seed = 5;
    CHECK(metrics_csv(run_experiment(a)) != metrics_csv(run_experiment(b)));
  }

  TEST_CASE("evaluation always uses the latest normalizer state") {
    for (auto mode : {CleanUpdateMode::experience, CleanUpdateMode::minibatch}) {
      auto c = tiny_config(3);
      c.normalizer = NormalizerKind::clean;
      c.clean_update = mode;
      std::vector<EvaluationStamp> stamps;
      RunHooks hooks;
      hooks.on_evaluate = [&](const EvaluationStamp& s) { stamps.push_back(s); };
      auto log = run_experiment(c, hooks);
      REQUIRE(stamps.size() == 6);
      for (const auto& s : stamps) {
        CHECK(s.normalizer_version == s.updates_applied);
        // 160 train rows in batches of 50 give 4 minibatches per experience.
        const std::uint64_t expected =
            mode == CleanUpdateMode::experience ? s.experience + 1 : 4 * (s.experience + 1);
        CHECK(s.normalizer_version == expected);
      }
      CHECK(log.epochs.back().normalizer_version == stamps.back().normalizer_version);
    }
  }

  TEST_CASE("experience-end cadence evaluates only the last epoch") {
    auto c = tiny_config();
    c.training.epochs = 3;
    c.cadence = EvaluationCadence::experience;
    auto log = run_experiment(c);
    REQUIRE(log.epochs.size() == 6);
    CHECK_FALSE(log.epochs[0].evaluated());
    CHECK(log.epochs[2].evaluated());
    auto full = c;
    full.cadence = EvaluationCadence::epoch;
    auto every = run_experiment(full);
    // Evaluation draws no randomness, so the final matrix is the same.
    CHECK(every.accuracy.at(1, 0) == log.accuracy.at(1, 0));
  }

  TEST_CASE("non-finite loss aborts with a diagnostic snapshot") {
    const auto dir = scratch("abort");
    auto c = tiny_config();
    c.output_dir = dir.string();
    RunHooks hooks;
    hooks.poison_step = 9;  // second experience: 8 steps per experience
    auto log = run_experiment(c, hooks);
    CHECK(log.status == RunStatus::aborted);
    CHECK(log.completed_experiences == 1);
    CHECK(log.error.find("non-finite") != std::string::npos);
    REQUIRE_FALSE(log.diagnostic_snapshot.empty());
    CHECK(fs::exists(log.diagnostic_snapshot));
    CHECK(log.accuracy.has(0, 0));
    auto resume = c;
    resume.resume_from = log.diagnostic_snapshot;
    CHECK_THROWS_AS(run_experiment(resume), IoError);
    fs::remove_all(dir);
  }

  TEST_CASE("resuming from a snapshot reproduces the uninterrupted run") {
    const auto dir = scratch("resume");
    for (auto st : {StrategyKind::reservoir, StrategyKind::ewc, StrategyKind::agem}) {
      auto c = tiny_config(3);
      c.normalizer = NormalizerKind::clean;
      c.strategy = st;
      c.strategy_options.buffer_capacity = 30;
      c.output_dir = (dir / "full").string();
      c.snapshots = true;
      const auto full = run_experiment(c);

      auto partial_cfg = c;
      partial_cfg.output_dir = (dir / "partial").string();
      RunHooks stop;
      stop.stop_after = 1;
      run_experiment(partial_cfg, stop);

      auto resumed_cfg = c;
      resumed_cfg.snapshots = false;
      resumed_cfg.output_dir = (dir / "resumed").string();
      resumed_cfg.resume_from = snapshot_path(dir / "partial", 0).string();
      const auto resumed = run_experiment(resumed_cfg);
      CHECK(metrics_csv(resumed) == metrics_csv(full));

      auto mismatched = resumed_cfg;
      mismatched.training.learning_rate = 0.5;
      CHECK_THROWS_AS(run_experiment(mismatched), ConfigError);
    }
    fs::remove_all(dir);
  }

  TEST_CASE("startup errors") {
    auto c = tiny_config();
    c.source = DatasetSource::unsw_csv;
    c.dataset_path = "/nonexistent/data.csv";
    CHECK_THROWS_AS(run_experiment(c), IoError);
    c = tiny_config();
    c.training.epochs = 0;
    CHECK_THROWS_AS(run_experiment(c), ConfigError);
  }

  TEST_CASE("output directory resolution") {
    RunConfig c;
    c.output_dir = "/abs/place";
    CHECK(resolve_output_dir(c) == fs::path("/abs/place"));
    c.output_dir.clear();
    c.seed = 2;
    CHECK(resolve_output_dir(c).filename() == "clean-finetune-s2");
  }
}

TEST_SUITE("results") {
  TEST_CASE("csv rows cover every experience, epoch and metric") {
    auto c = tiny_config();
    c.training.epochs = 3;
    auto log = run_experiment(c);
    auto rows = parse_metrics_csv(metrics_csv(log));
    std::set<std::tuple<std::size_t, std::size_t, std::string>> seen;
    for (const auto& r : rows) {
      CHECK(r.normalizer == "local");
      CHECK(r.strategy == "finetune");
      CHECK(seen.insert({r.experience, r.epoch, r.metric}).second);
    }
    for (std::size_t t = 0; t < 2; ++t) {
      for (std::size_t e = 1; e <= 3; ++e) {
        for (std::string m : {"train_loss", "average_accuracy", "average_auroc", "average_forgetting"}) {
          CHECK(seen.count({t, e, m}) == 1);
        }
        for (std::size_t k = 0; k <= t; ++k) {
          CHECK(seen.count({t, e, "accuracy@" + std::to_string(k)}) == 1);
          CHECK(seen.count({t, e, "auroc@" + std::to_string(k)}) == 1);
        }
      }
    }
    CHECK(rows.size() == 2 * 3 * 4 + 3 * 2 * 1 + 3 * 2 * 2);
  }

  TEST_CASE("accuracy matrix survives json and csv round trips exactly") {
    auto log = run_experiment(tiny_config(3));
    auto from_json = parse_summary_json(summary_json(log));
    auto from_csv = accuracy_from_rows(parse_metrics_csv(metrics_csv(log)));
    for (std::size_t t = 0; t < 3; ++t) {
      for (std::size_t s = 0; s <= t; ++s) {
        CHECK(from_json.accuracy.at(t, s) == log.accuracy.at(t, s));
        CHECK(from_csv.at(t, s) == log.accuracy.at(t, s));
      }
    }
    CHECK(from_json.final_average_accuracy == log.final_average_accuracy());
  }

  TEST_CASE("absent auroc is null in json and an empty csv cell") {
    auto c = tiny_config();
    auto log = run_experiment(c, single_class_first_test());
    CHECK_FALSE(log.auroc.has(0, 0));
    CHECK(log.accuracy.has(0, 0));
    CHECK(log.auroc.has(1, 1));
    auto j = nlohmann::json::parse(summary_json(log));
    CHECK(j["auroc"][0][0].is_null());
    CHECK(j["auroc"][1][1].is_number());
    CHECK(j["average_forgetting"][0].is_null());
    bool found = false;
    for (const auto& r : parse_metrics_csv(metrics_csv(log))) {
      if (r.metric == "auroc@0") {
        CHECK_FALSE(r.value.has_value());
        found = true;
      }
      if (r.metric == "average_auroc" && r.experience == 0) CHECK_FALSE(r.value.has_value());
    }
    CHECK(found);
    CHECK(metrics_csv(log).find("auroc@0,\n") != std::string::npos);
    // The average skips the absent cell.
    CHECK(*log.final_average_auroc() == doctest::Approx(*log.auroc.get(1, 1)));
  }

  TEST_CASE("oracle runs are flagged everywhere") {
    auto c = tiny_config();
    c.normalizer = NormalizerKind::global;
    auto log = run_experiment(c);
    CHECK(metrics_csv(log).find(",global[oracle],") != std::string::npos);
    CHECK(nlohmann::json::parse(summary_json(log))["oracle"] == true);
    auto s = summarize(log);
    CHECK(comparison_csv({s}).find(",true,") != std::string::npos);
  }

  TEST_CASE("write_run produces the three files and rejects unwritable targets") {
    const auto dir = scratch("write");
    auto log = run_experiment(tiny_config());
    write_run(log, dir / "run");
    CHECK(slurp(dir / "run" / "metrics.csv") == metrics_csv(log));
    CHECK(fs::exists(dir / "run" / "summary.json"));
    CHECK(parse_config(slurp(dir / "run" / "config.cfg")).seed == log.config.seed);
    auto back = read_summary_json(dir / "run" / "summary.json");
    CHECK(back.label == log.config.label());
    std::ofstream(dir / "file") << "x";
    CHECK_THROWS_AS(write_run(log, dir / "file" / "sub"), IoError);
    fs::remove_all(dir);
  }
}

TEST_SUITE("grid") {
  TEST_CASE("axes parse and expand as a cartesian product") {
    auto axis = parse_axis("normalizer.kind = clean, cn");
    CHECK(axis.first == "normalizer.kind");
    CHECK(axis.second == std::vector<std::string>{"clean", "cn"});
    CHECK_THROWS_AS(parse_axis("novalue"), ConfigError);
    auto configs = expand_grid(RunConfig{}, {{"seed", {"1", "2", "3"}}, {"strategy.kind", {"ewc", "agem"}}});
    REQUIRE(configs.size() == 6);
    CHECK(configs[1].seed == 1);
    CHECK(configs[1].strategy == StrategyKind::agem);
    CHECK(configs[2].seed == 2);
    CHECK_THROWS_AS(expand_grid(RunConfig{}, {{"nope", {"1"}}}), ConfigError);
  }

  TEST_CASE("four normalizers by four strategies give sixteen runs and one table") {
    const auto dir = scratch("grid16");
    auto base = tiny_config();
    base.training.epochs = 1;
    auto configs = expand_grid(base, {{"normalizer.kind", {"global", "local", "cn", "clean"}},
                                      {"strategy.kind", {"finetune", "reservoir", "agem", "ewc"}}});
    auto result = run_grid(configs, dir, 2);
    CHECK(result.runs.size() == 16);
    CHECK(result.all_completed());
    for (const auto& d : result.directories) CHECK(fs::exists(d / "metrics.csv"));
    const auto table = slurp(dir / "comparison.csv");
    CHECK(std::count(table.begin(), table.end(), '\n') == 17);
    const auto report = slurp(dir / "report.csv");
    CHECK(std::count(report.begin(), report.end(), '\n') == 17);
    // A grid cell matches the same config run on its own.
    CHECK(slurp(result.directories[5] / "metrics.csv") == metrics_csv(run_experiment(configs[5])));
    auto collected = collect_summaries(dir);
    CHECK(collected.size() == 16);
    fs::remove_all(dir);
  }

  TEST_CASE("one diverging run does not stop the others") {
    const auto dir = scratch("grid_fail");
    auto base = tiny_config();
    base.training.epochs = 1;
    auto configs = expand_grid(base, {{"seed", {"1", "2", "3", "4", "5"}}, {"strategy.kind", {"finetune", "ewc", "reservoir"}}});
    configs.push_back(base);
    configs.back().name = "diverging";
    configs.back().training.learning_rate = 1e300;
    REQUIRE(configs.size() == 16);
    auto result = run_grid(configs, dir, 1);
    std::size_t completed = 0;
    for (std::size_t i = 0; i < 15; ++i) completed += result.runs[i].status == RunStatus::completed;
    CHECK(completed == 15);
    CHECK(result.runs[15].status == RunStatus::aborted);
    CHECK_FALSE(result.runs[15].error.empty());
    CHECK_FALSE(result.all_completed());
    CHECK(slurp(dir / "comparison.csv").find("diverging,local,finetune,4,false,aborted") != std::string::npos);
    fs::remove_all(dir);
  }

  TEST_CASE("startup failures are recorded as failed runs") {
    const auto dir = scratch("grid_startup");
    auto good = tiny_config();
    good.training.epochs = 1;
    auto bad = good;
    bad.name = "broken";
    bad.source = DatasetSource::cicids_csv;
    bad.dataset_path = "/nonexistent.csv";
    auto result = run_grid({good, bad}, dir);
    CHECK(result.runs[0].status == RunStatus::completed);
    CHECK(result.runs[1].status == RunStatus::failed);
    CHECK(fs::exists(dir / "broken" / "summary.json"));
    fs::remove_all(dir);
  }

  TEST_CASE("empty grid writes nothing") {
    const auto dir = fs::temp_directory_path() / "tabcl_test_grid_empty";
    fs::remove_all(dir);
    auto result = run_grid({}, dir);
    CHECK(result.runs.empty());
    CHECK(result.all_completed());
    CHECK_FALSE(fs::exists(dir));
  }

  TEST_CASE("duplicate labels get distinct directories") {
    RunConfig a;
    auto names = run_directory_names({a, a, RunConfig{}});
    CHECK(std::set<std::string>(names.begin(), names.end()).size() == 3);
  }

  TEST_CASE("aggregation averages completed runs only") {
    RunSummary r1, r2, r3;
    r1.normalizer = r2.normalizer = r3.normalizer = "clean";
    r1.strategy = r2.strategy = r3.strategy = "ewc";
    r1.final_average_accuracy = 0.8;
    r2.final_average_accuracy = 0.6;
    r3.status = RunStatus::failed;
    auto cells = aggregate({r1, r2, r3});
    REQUIRE(cells.size() == 1);
    CHECK(cells[0].runs == 3);
    CHECK(cells[0].completed == 2);
    CHECK(*cells[0].average_accuracy == doctest::Approx(0.7));
    CHECK_FALSE(cells[0].average_forgetting.has_value());
  }
}
