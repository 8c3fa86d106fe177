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
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "core/normalization.hpp"
#include "core/pipeline.hpp"
#include "core/types.hpp"

namespace tabcl {

class BinaryReader;
class BinaryWriter;

// Fixed-capacity uniform sample of every row ever offered (Vitter's
// algorithm R). Rows are stored raw; callers normalize them with whatever
// state is current when they are replayed.
class ReservoirBuffer {
 public:
  ReservoirBuffer(std::size_t capacity, std::size_t features, std::uint64_t seed);

  void offer(std::span<const double> row, Label label);
  void offer_all(const FeatureMatrix& data);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t features() const { return static_cast<std::size_t>(rows_.cols()); }
  std::uint64_t seen() const { return seen_; }
  bool empty() const { return size_ == 0; }

  // Stored rows in slot order.
  FeatureMatrix contents() const;
  FeatureMatrix sample_with_replacement(std::size_t n);
  FeatureMatrix sample_without_replacement(std::size_t n);

  std::mt19937_64& generator() { return rng_; }

  void save(BinaryWriter& out) const;
  void load(BinaryReader& in);

 private:
  std::size_t capacity_;
  std::size_t size_ = 0;
  std::uint64_t seen_ = 0;
  Matrix rows_;
  Labels labels_;
  std::mt19937_64 rng_;
};

// Current batch followed by floor(replay_fraction * current.rows()) rows
// drawn uniformly with replacement from the buffer. An empty buffer or a
// zero fraction returns the current batch unchanged.
FeatureMatrix replay_mix(ReservoirBuffer& buffer, const FeatureMatrix& current,
                         double replay_fraction);

// g is returned unchanged when g_ref . g >= 0; otherwise its component
// along g_ref is removed.
std::vector<double> agem_project(std::span<const double> g, std::span<const double> g_ref);

struct EwcAnchor {
  std::vector<double> parameters;
  std::vector<double> importance;  // diagonal Fisher estimate, >= 0
  double lambda = 100.0;
};

struct EwcPenalty {
  double value = 0.0;
  std::vector<double> gradient;
};

// Per-parameter mean of squared per-sample gradients.
std::vector<double> mean_squared_gradients(std::span<const std::vector<double>> per_sample);

// Snapshot of the current parameters with importance estimated on
// `x_normalized` (already through the fixed normalizer part). When
// `previous` is given, importances are summed and the newest parameters kept.
EwcAnchor ewc_consolidate(const TrainablePipeline& pipeline, const Matrix& x_normalized,
                          const Labels& y, double lambda,
                          const std::optional<EwcAnchor>& previous = std::nullopt);

// (lambda / 2) sum_i importance_i (theta_i - anchor_i)^2 and its gradient.
EwcPenalty ewc_penalty(std::span<const double> theta, const EwcAnchor& anchor);

enum class StrategyKind { finetune, reservoir, agem, ewc };

std::string_view to_string(StrategyKind kind);
StrategyKind parse_strategy_kind(std::string_view name);

struct StrategyOptions {
  std::size_t buffer_capacity = 5000;
  double replay_fraction = 0.5;
  std::size_t reference_batch = 1024;
  double ewc_lambda = 100.0;
  std::size_t fisher_sample = 10000;
};

struct TrainingContext {
  TrainablePipeline& pipeline;
  const Normalizer& normalizer;
};

// Hooks a forgetting-mitigation method into the training loop.
class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual StrategyKind kind() const = 0;

  // Raw rows to train on for this step.
  virtual FeatureMatrix compose_batch(const FeatureMatrix& current) { return current; }
  // May rewrite the gradient; returns any loss term it added.
  virtual double adjust_gradient(TrainingContext&, std::vector<double>&) { return 0.0; }
  // Called once the experience's training epochs are done.
  virtual void end_experience(TrainingContext&, const FeatureMatrix&) {}

  virtual void save(BinaryWriter&) const {}
  virtual void load(BinaryReader&) {}
};

class FinetuneStrategy final : public Strategy {
 public:
  StrategyKind kind() const override { return StrategyKind::finetune; }
};

class ReplayStrategy final : public Strategy {
 public:
  ReplayStrategy(const StrategyOptions& options, std::size_t features, std::uint64_t seed);
  StrategyKind kind() const override { return StrategyKind::reservoir; }
  FeatureMatrix compose_batch(const FeatureMatrix& current) override;
  void end_experience(TrainingContext&, const FeatureMatrix& train) override;
  const ReservoirBuffer& buffer() const { return buffer_; }
  void save(BinaryWriter& out) const override;
  void load(BinaryReader& in) override;

 private:
  ReservoirBuffer buffer_;
  double replay_fraction_;
};

class AgemStrategy final : public Strategy {
 public:
  AgemStrategy(const StrategyOptions& options, std::size_t features, std::uint64_t seed);
  StrategyKind kind() const override { return StrategyKind::agem; }
  double adjust_gradient(TrainingContext& ctx, std::vector<double>& grad) override;
  void end_experience(TrainingContext&, const FeatureMatrix& train) override;
  const ReservoirBuffer& buffer() const { return buffer_; }
  std::uint64_t projections() const { return projections_; }
  void save(BinaryWriter& out) const override;
  void load(BinaryReader& in) override;

 private:
  ReservoirBuffer buffer_;
  std::size_t reference_batch_;
  std::uint64_t projections_ = 0;
};

class EwcStrategy final : public Strategy {
 public:
  EwcStrategy(const StrategyOptions& options, std::uint64_t seed);
  StrategyKind kind() const override { return StrategyKind::ewc; }
  double adjust_gradient(TrainingContext& ctx, std::vector<double>& grad) override;
  void end_experience(TrainingContext& ctx, const FeatureMatrix& train) override;
  const std::optional<EwcAnchor>& anchor() const { return anchor_; }
  void save(BinaryWriter& out) const override;
  void load(BinaryReader& in) override;

 private:
  double lambda_;
  std::size_t fisher_sample_;
  std::optional<EwcAnchor> anchor_;
  std::mt19937_64 rng_;
};

std::unique_ptr<Strategy> make_strategy(StrategyKind kind, const StrategyOptions& options,
                                        std::size_t features, std::uint64_t seed);

}  // namespace tabcl
