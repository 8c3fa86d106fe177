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

#include "core/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "core/csv.hpp"
#include "core/error.hpp"
#include "core/serialize.hpp"

namespace tabcl {

ReservoirBuffer::ReservoirBuffer(std::size_t capacity, std::size_t features, std::uint64_t seed)
    : capacity_(capacity),
      rows_(static_cast<Eigen::Index>(capacity), static_cast<Eigen::Index>(features)),
      labels_(capacity),
      rng_(seed) {
  if (capacity == 0) throw ConfigError("strategy.buffer_capacity: must be positive");
}

void ReservoirBuffer::offer(std::span<const double> row, Label label) {
  if (row.size() != features()) {
    throw ShapeError("ReservoirBuffer::offer: expected " + std::to_string(features()) +
                     " features, got " + std::to_string(row.size()));
  }
  ++seen_;
  std::size_t slot = size_;
  if (size_ < capacity_) {
    ++size_;
  } else {
    std::uniform_int_distribution<std::uint64_t> draw(0, seen_ - 1);
    const std::uint64_t j = draw(rng_);
    if (j >= capacity_) return;
    slot = static_cast<std::size_t>(j);
  }
  rows_.row(static_cast<Eigen::Index>(slot)) =
      Eigen::Map<const RowVector>(row.data(), static_cast<Eigen::Index>(row.size()));
  labels_[slot] = label;
}

void ReservoirBuffer::offer_all(const FeatureMatrix& data) {
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    offer(std::span<const double>(data.values.row(r).data(), data.features()), data.labels[i]);
  }
}

FeatureMatrix ReservoirBuffer::contents() const {
  FeatureMatrix out;
  out.values = rows_.topRows(static_cast<Eigen::Index>(size_));
  out.labels.assign(labels_.begin(), labels_.begin() + static_cast<std::ptrdiff_t>(size_));
  return out;
}

FeatureMatrix ReservoirBuffer::sample_with_replacement(std::size_t n) {
  FeatureMatrix out;
  out.values.resize(static_cast<Eigen::Index>(size_ == 0 ? 0 : n), rows_.cols());
  if (size_ == 0) return out;
  out.labels.resize(n);
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = pick(rng_);
    out.values.row(static_cast<Eigen::Index>(i)) = rows_.row(static_cast<Eigen::Index>(j));
    out.labels[i] = labels_[j];
  }
  return out;
}

FeatureMatrix ReservoirBuffer::sample_without_replacement(std::size_t n) {
  n = std::min(n, size_);
  std::vector<std::size_t> all(size_);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> chosen;
  chosen.reserve(n);
  std::sample(all.begin(), all.end(), std::back_inserter(chosen), n, rng_);
  FeatureMatrix out;
  out.values.resize(static_cast<Eigen::Index>(n), rows_.cols());
  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.values.row(static_cast<Eigen::Index>(i)) = rows_.row(static_cast<Eigen::Index>(chosen[i]));
    out.labels[i] = labels_[chosen[i]];
  }
  return out;
}

void ReservoirBuffer::save(BinaryWriter& out) const {
  out.u64(capacity_);
  out.u64(size_);
  out.u64(seen_);
  out.matrix(rows_);
  out.labels(labels_);
  out.generator(rng_);
}

void ReservoirBuffer::load(BinaryReader& in) {
  if (in.u64() != capacity_) throw IoError("snapshot buffer capacity differs from config");
  size_ = in.u64();
  seen_ = in.u64();
  rows_ = in.matrix();
  labels_ = in.labels();
  in.generator(rng_);
  if (size_ > capacity_ || seen_ < size_ || static_cast<std::size_t>(rows_.rows()) != capacity_ ||
      labels_.size() != capacity_) {
    throw IoError("snapshot corrupt: reservoir buffer");
  }
}

FeatureMatrix replay_mix(ReservoirBuffer& buffer, const FeatureMatrix& current,
                         double replay_fraction) {
  if (!(replay_fraction >= 0.0 && replay_fraction <= 1.0)) {
    throw ContractError("replay_mix: replay_fraction must lie in [0, 1]");
  }
  const auto extra = static_cast<std::size_t>(
      std::floor(replay_fraction * static_cast<double>(current.rows()) + 1e-9));
  if (buffer.empty() || extra == 0) return current;
  const FeatureMatrix replay = buffer.sample_with_replacement(extra);
  if (replay.features() != current.features()) throw ShapeError("replay_mix: feature count differs");

  FeatureMatrix out;
  out.values.resize(current.values.rows() + replay.values.rows(), current.values.cols());
  out.values << current.values, replay.values;
  out.labels = current.labels;
  out.labels.insert(out.labels.end(), replay.labels.begin(), replay.labels.end());
  return out;
}

std::vector<double> agem_project(std::span<const double> g, std::span<const double> g_ref) {
  if (g.size() != g_ref.size()) {
    throw ShapeError("agem_project: gradient lengths differ (" + std::to_string(g.size()) + " vs " +
                     std::to_string(g_ref.size()) + ")");
  }
  double dot = 0.0;
  double ref_norm2 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i]) || !std::isfinite(g_ref[i])) {
      throw NumericError("agem_project: non-finite entry at index " + std::to_string(i));
    }
    dot += g[i] * g_ref[i];
    ref_norm2 += g_ref[i] * g_ref[i];
  }
  std::vector<double> out(g.begin(), g.end());
  if (dot >= 0.0 || ref_norm2 == 0.0) return out;
  const double coef = dot / ref_norm2;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= coef * g_ref[i];
  return out;
}

std::vector<double> mean_squared_gradients(std::span<const std::vector<double>> per_sample) {
  if (per_sample.empty()) throw ContractError("mean_squared_gradients: no samples");
  std::vector<double> out(per_sample.front().size(), 0.0);
  for (const auto& g : per_sample) {
    if (g.size() != out.size()) throw ShapeError("mean_squared_gradients: lengths differ");
    for (std::size_t i = 0; i < g.size(); ++i) out[i] += g[i] * g[i];
  }
  for (double& v : out) v /= static_cast<double>(per_sample.size());
  return out;
}

EwcAnchor ewc_consolidate(const TrainablePipeline& pipeline, const Matrix& x_normalized,
                          const Labels& y, double lambda, const std::optional<EwcAnchor>& previous) {
  if (y.empty()) throw ContractError("ewc_consolidate: empty sample");
  if (!(lambda >= 0.0)) throw ConfigError("strategy.ewc_lambda: must be >= 0");
  EwcAnchor anchor;
  anchor.parameters = pipeline.parameters();
  anchor.importance = pipeline.mean_squared_sample_gradients(x_normalized, y);
  anchor.lambda = lambda;
  if (previous) {
    if (previous->importance.size() != anchor.importance.size()) {
      throw ShapeError("ewc_consolidate: previous anchor has a different parameter count");
    }
    for (std::size_t i = 0; i < anchor.importance.size(); ++i) {
      anchor.importance[i] += previous->importance[i];
    }
  }
  for (std::size_t i = 0; i < anchor.importance.size(); ++i) {
    if (!std::isfinite(anchor.importance[i])) {
      throw NumericError("ewc_consolidate: non-finite importance at index " + std::to_string(i));
    }
  }
  return anchor;
}

EwcPenalty ewc_penalty(std::span<const double> theta, const EwcAnchor& anchor) {
  if (theta.size() != anchor.parameters.size() || theta.size() != anchor.importance.size()) {
    throw ShapeError("ewc_penalty: parameter count differs from anchor");
  }
  EwcPenalty out;
  out.gradient.resize(theta.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double diff = theta[i] - anchor.parameters[i];
    sum += anchor.importance[i] * diff * diff;
    out.gradient[i] = anchor.lambda * anchor.importance[i] * diff;
  }
  out.value = 0.5 * anchor.lambda * sum;
  return out;
}

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::finetune: return "finetune";
    case StrategyKind::reservoir: return "reservoir";
    case StrategyKind::agem: return "agem";
    case StrategyKind::ewc: return "ewc";
  }
  return "unknown";
}

StrategyKind parse_strategy_kind(std::string_view name) {
  const std::string s = to_lower(trim(name));
  if (s == "finetune" || s == "finetuning") return StrategyKind::finetune;
  if (s == "reservoir" || s == "replay" || s == "rer") return StrategyKind::reservoir;
  if (s == "agem" || s == "a-gem") return StrategyKind::agem;
  if (s == "ewc") return StrategyKind::ewc;
  throw ConfigError("strategy.kind: unknown strategy '" + std::string(name) +
                    "' (expected finetune, reservoir, agem or ewc)");
}

// -- replay ------------------------------------------------------------------

ReplayStrategy::ReplayStrategy(const StrategyOptions& options, std::size_t features,
                               std::uint64_t seed)
    : buffer_(options.buffer_capacity, features, seed), replay_fraction_(options.replay_fraction) {
  if (!(replay_fraction_ >= 0.0 && replay_fraction_ <= 1.0)) {
    throw ConfigError("strategy.replay_fraction: must lie in [0, 1]");
  }
}

FeatureMatrix ReplayStrategy::compose_batch(const FeatureMatrix& current) {
  return replay_mix(buffer_, current, replay_fraction_);
}

void ReplayStrategy::end_experience(TrainingContext&, const FeatureMatrix& train) {
  buffer_.offer_all(train);
}

void ReplayStrategy::save(BinaryWriter& out) const { buffer_.save(out); }
void ReplayStrategy::load(BinaryReader& in) { buffer_.load(in); }

// -- A-GEM -------------------------------------------------------------------

AgemStrategy::AgemStrategy(const StrategyOptions& options, std::size_t features,
                           std::uint64_t seed)
    : buffer_(options.buffer_capacity, features, seed), reference_batch_(options.reference_batch) {
  if (reference_batch_ == 0) throw ConfigError("strategy.reference_batch: must be positive");
}

double AgemStrategy::adjust_gradient(TrainingContext& ctx, std::vector<double>& grad) {
  if (buffer_.empty()) return 0.0;
  const FeatureMatrix ref = buffer_.sample_without_replacement(reference_batch_);
  const Matrix x = ctx.normalizer.fixed_transform(ref.values);
  const LossGradient reference = ctx.pipeline.loss_and_gradient(x, ref.labels);
  std::vector<double> projected = agem_project(grad, reference.gradient);
  if (projected != grad) ++projections_;
  grad = std::move(projected);
  return 0.0;
}

void AgemStrategy::end_experience(TrainingContext&, const FeatureMatrix& train) {
  buffer_.offer_all(train);
}

void AgemStrategy::save(BinaryWriter& out) const {
  buffer_.save(out);
  out.u64(projections_);
}

void AgemStrategy::load(BinaryReader& in) {
  buffer_.load(in);
  projections_ = in.u64();
}

// -- EWC ---------------------------------------------------------------------

EwcStrategy::EwcStrategy(const StrategyOptions& options, std::uint64_t seed)
    : lambda_(options.ewc_lambda), fisher_sample_(options.fisher_sample), rng_(seed) {
  if (!(lambda_ >= 0.0)) throw ConfigError("strategy.ewc_lambda: must be >= 0");
  if (fisher_sample_ == 0) throw ConfigError("strategy.fisher_sample: must be positive");
}

double EwcStrategy::adjust_gradient(TrainingContext& ctx, std::vector<double>& grad) {
  if (!anchor_) return 0.0;
  const std::vector<double> theta = ctx.pipeline.parameters();
  const EwcPenalty penalty = ewc_penalty(theta, *anchor_);
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += penalty.gradient[i];
  return penalty.value;
}

void EwcStrategy::end_experience(TrainingContext& ctx, const FeatureMatrix& train) {
  std::vector<std::size_t> all(train.rows());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> chosen;
  std::sample(all.begin(), all.end(), std::back_inserter(chosen),
              std::min(fisher_sample_, train.rows()), rng_);
  const FeatureMatrix sample = train.gather(chosen);
  const Matrix x = ctx.normalizer.fixed_transform(sample.values);
  anchor_ = ewc_consolidate(ctx.pipeline, x, sample.labels, lambda_, anchor_);
}

void EwcStrategy::save(BinaryWriter& out) const {
  out.generator(rng_);
  out.u8(anchor_ ? 1 : 0);
  if (anchor_) {
    out.f64(anchor_->lambda);
    out.doubles(anchor_->parameters);
    out.doubles(anchor_->importance);
  }
}

void EwcStrategy::load(BinaryReader& in) {
  in.generator(rng_);
  anchor_.reset();
  if (in.u8() != 0) {
    EwcAnchor a;
    a.lambda = in.f64();
    a.parameters = in.doubles();
    a.importance = in.doubles();
    anchor_ = std::move(a);
  }
}

std::unique_ptr<Strategy> make_strategy(StrategyKind kind, const StrategyOptions& options,
                                        std::size_t features, std::uint64_t seed) {
  switch (kind) {
    case StrategyKind::finetune: return std::make_unique<FinetuneStrategy>();
    case StrategyKind::reservoir: return std::make_unique<ReplayStrategy>(options, features, seed);
    case StrategyKind::agem: return std::make_unique<AgemStrategy>(options, features, seed);
    case StrategyKind::ewc: return std::make_unique<EwcStrategy>(options, seed);
  }
  throw ContractError("make_strategy: unknown kind");
}

}  // namespace tabcl
