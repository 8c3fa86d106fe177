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

#include "core/normalization.hpp"

#include <cmath>
#include <string>

#include "core/csv.hpp"
#include "core/error.hpp"
#include "core/serialize.hpp"

namespace tabcl {

MinMaxBounds column_bounds(const Matrix& x) {
  if (x.rows() == 0) throw ContractError("column_bounds: empty matrix");
  return MinMaxBounds{x.colwise().minCoeff(), x.colwise().maxCoeff()};
}

MinMaxBounds global_fit(std::span<const FeatureMatrix> chunks) {
  MinMaxBounds bounds;
  bool any = false;
  for (const auto& chunk : chunks) {
    if (chunk.rows() == 0) continue;
    const MinMaxBounds b = column_bounds(chunk.values);
    if (!any) {
      bounds = b;
      any = true;
      continue;
    }
    if (b.features() != bounds.features()) throw ShapeError("global_fit: feature count differs");
    bounds.min = bounds.min.cwiseMin(b.min);
    bounds.max = bounds.max.cwiseMax(b.max);
  }
  if (!any) throw ContractError("global_fit: no rows in any chunk");
  return bounds;
}

MinMaxBounds global_fit(const ExperienceStream& stream) {
  std::vector<FeatureMatrix> parts;
  parts.reserve(2 * stream.size());
  for (const auto& e : stream.chunks) {
    parts.push_back(e.train);
    parts.push_back(e.test);
  }
  return global_fit(parts);
}

Matrix minmax_transform(const Matrix& x, const MinMaxBounds& bounds, double eps_den) {
  if (static_cast<std::size_t>(x.cols()) != bounds.features()) {
    throw ShapeError("minmax_transform: expected " + std::to_string(bounds.features()) +
                     " features, got " + std::to_string(x.cols()));
  }
  const RowVector denom = (bounds.max - bounds.min).cwiseMax(eps_den);
  Matrix out = x.rowwise() - bounds.min;
  out.array().rowwise() /= denom.array();
  return out;
}

Matrix local_update_transform(MinMaxBounds& bounds, const Matrix& chunk, double eps_den) {
  bounds = column_bounds(chunk);
  return minmax_transform(chunk, bounds, eps_den);
}

void cn_update(CnState& state, const Matrix& chunk) {
  if (chunk.rows() == 0) throw ContractError("cn_update: empty chunk");
  const RowVector mean = chunk.colwise().mean();
  const RowVector stddev =
      ((chunk.rowwise() - mean).cwiseAbs2().colwise().sum() / static_cast<double>(chunk.rows()))
          .cwiseSqrt();
  if (!state.initialized) {
    state.mean = mean;
    state.stddev = stddev;
    state.initialized = true;
    return;
  }
  if (state.mean.size() != mean.size()) throw ShapeError("cn_update: feature count differs");
  state.mean = (1.0 - state.lambda) * state.mean + state.lambda * mean;
  state.stddev = (1.0 - state.lambda) * state.stddev + state.lambda * stddev;
}

Matrix cn_transform(const CnState& state, const Matrix& x) {
  if (!state.initialized) throw ContractError("cn_transform: state not initialized");
  if (x.cols() != state.mean.size()) throw ShapeError("cn_transform: feature count differs");
  Matrix out = x.rowwise() - state.mean;
  out.array().rowwise() /= (state.stddev.array() + state.epsilon);
  return out;
}

CleanState CleanState::initial(std::size_t features, double eta, double epsilon_den) {
  const auto d = static_cast<Eigen::Index>(features);
  CleanState s;
  s.estimated_max = RowVector::Ones(d);
  s.estimated_min = RowVector::Zero(d);
  s.eta = eta;
  s.scaling = DiagonalAffine::identity(features);
  s.epsilon_den = epsilon_den;
  return s;
}

void clean_update(CleanState& state, const Matrix& chunk) {
  const MinMaxBounds local = column_bounds(chunk);
  if (local.features() != static_cast<std::size_t>(state.estimated_max.size())) {
    throw ShapeError("clean_update: feature count differs");
  }
  state.estimated_max = (1.0 - state.eta) * local.max + state.eta * state.estimated_max;
  state.estimated_min = (1.0 - state.eta) * local.min + state.eta * state.estimated_min;
}

Matrix clean_estimated_minmax(const CleanState& state, const Matrix& x) {
  return minmax_transform(x, MinMaxBounds{state.estimated_min, state.estimated_max},
                          state.epsilon_den);
}

Matrix clean_transform(const CleanState& state, const Matrix& x) {
  return state.scaling.forward(clean_estimated_minmax(state, x));
}

std::string_view to_string(NormalizerKind kind) {
  switch (kind) {
    case NormalizerKind::global: return "global";
    case NormalizerKind::local: return "local";
    case NormalizerKind::cn: return "cn";
    case NormalizerKind::clean: return "clean";
  }
  return "unknown";
}

NormalizerKind parse_normalizer_kind(std::string_view name) {
  const std::string s = to_lower(trim(name));
  if (s == "global") return NormalizerKind::global;
  if (s == "local") return NormalizerKind::local;
  if (s == "cn" || s == "continual") return NormalizerKind::cn;
  if (s == "clean") return NormalizerKind::clean;
  throw ConfigError("normalizer.kind: unknown normalizer '" + std::string(name) +
                    "' (expected global, local, cn or clean)");
}

void Normalizer::update(const Matrix& train) {
  check_features(train, "update");
  if (train.rows() == 0) throw ContractError("Normalizer::update: empty chunk");
  do_update(train);
  ++version_;
}

void Normalizer::check_features(const Matrix& x, std::string_view who) const {
  if (static_cast<std::size_t>(x.cols()) != features_) {
    throw ShapeError(std::string(to_string(kind())) + " normalizer " + std::string(who) +
                     ": expected " + std::to_string(features_) + " features, got " +
                     std::to_string(x.cols()));
  }
}

void Normalizer::save(BinaryWriter& out) const {
  out.u8(static_cast<std::uint8_t>(kind()));
  out.u64(features_);
  out.u64(version_);
  save_state(out);
}

void Normalizer::load(BinaryReader& in) {
  const auto k = static_cast<NormalizerKind>(in.u8());
  if (k != kind()) throw IoError("snapshot holds a different normalizer kind");
  if (in.u64() != features_) throw IoError("snapshot normalizer feature count differs");
  version_ = in.u64();
  load_state(in);
}

// -- global ------------------------------------------------------------------

GlobalNormalizer::GlobalNormalizer(std::size_t features, double epsilon_den)
    : Normalizer(features), epsilon_den_(epsilon_den) {}

void GlobalNormalizer::fit(const ExperienceStream& stream) { fit(global_fit(stream)); }

void GlobalNormalizer::fit(MinMaxBounds b) {
  if (b.features() != features()) throw ShapeError("GlobalNormalizer::fit: feature count differs");
  bounds_ = std::move(b);
  fitted_ = true;
}

Matrix GlobalNormalizer::transform(const Matrix& x) const {
  if (!fitted_) throw ContractError("global normalizer used before fit()");
  return minmax_transform(x, bounds_, epsilon_den_);
}

void GlobalNormalizer::save_state(BinaryWriter& out) const {
  out.u8(fitted_ ? 1 : 0);
  out.f64(epsilon_den_);
  out.row_vector(bounds_.min);
  out.row_vector(bounds_.max);
}

void GlobalNormalizer::load_state(BinaryReader& in) {
  fitted_ = in.u8() != 0;
  epsilon_den_ = in.f64();
  bounds_.min = in.row_vector();
  bounds_.max = in.row_vector();
}

// -- local -------------------------------------------------------------------

LocalNormalizer::LocalNormalizer(std::size_t features, double epsilon_den)
    : Normalizer(features), epsilon_den_(epsilon_den) {}

void LocalNormalizer::do_update(const Matrix& train) {
  bounds_ = column_bounds(train);
  fitted_ = true;
}

Matrix LocalNormalizer::transform(const Matrix& x) const {
  if (!fitted_) throw ContractError("local normalizer used before its first update");
  check_features(x, "transform");
  return minmax_transform(x, bounds_, epsilon_den_);
}

void LocalNormalizer::save_state(BinaryWriter& out) const {
  out.u8(fitted_ ? 1 : 0);
  out.f64(epsilon_den_);
  out.row_vector(bounds_.min);
  out.row_vector(bounds_.max);
}

void LocalNormalizer::load_state(BinaryReader& in) {
  fitted_ = in.u8() != 0;
  epsilon_den_ = in.f64();
  bounds_.min = in.row_vector();
  bounds_.max = in.row_vector();
}

// -- continual normalization -------------------------------------------------

ContinualNormalizer::ContinualNormalizer(std::size_t features, double lambda, double epsilon)
    : Normalizer(features) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ConfigError("normalizer.lambda: must lie in (0, 1]");
  if (!(epsilon > 0.0)) throw ConfigError("normalizer.epsilon_cn: must be positive");
  state_.lambda = lambda;
  state_.epsilon = epsilon;
}

void ContinualNormalizer::do_update(const Matrix& train) { cn_update(state_, train); }

Matrix ContinualNormalizer::transform(const Matrix& x) const {
  check_features(x, "transform");
  return cn_transform(state_, x);
}

void ContinualNormalizer::save_state(BinaryWriter& out) const {
  out.u8(state_.initialized ? 1 : 0);
  out.f64(state_.lambda);
  out.f64(state_.epsilon);
  out.row_vector(state_.mean);
  out.row_vector(state_.stddev);
}

void ContinualNormalizer::load_state(BinaryReader& in) {
  state_.initialized = in.u8() != 0;
  state_.lambda = in.f64();
  state_.epsilon = in.f64();
  state_.mean = in.row_vector();
  state_.stddev = in.row_vector();
}

// -- CLeAN -------------------------------------------------------------------

CleanNormalizer::CleanNormalizer(std::size_t features, double eta, double epsilon_den)
    : Normalizer(features), state_(CleanState::initial(features, eta, epsilon_den)) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("normalizer.eta: must lie in [0, 1]");
}

void CleanNormalizer::do_update(const Matrix& train) { clean_update(state_, train); }

Matrix CleanNormalizer::fixed_transform(const Matrix& x) const {
  check_features(x, "transform");
  return clean_estimated_minmax(state_, x);
}

Matrix CleanNormalizer::transform(const Matrix& x) const {
  check_features(x, "transform");
  return clean_transform(state_, x);
}

void CleanNormalizer::save_state(BinaryWriter& out) const {
  out.f64(state_.eta);
  out.f64(state_.epsilon_den);
  out.row_vector(state_.estimated_max);
  out.row_vector(state_.estimated_min);
  out.row_vector(state_.scaling.weight);
  out.row_vector(state_.scaling.bias);
}

void CleanNormalizer::load_state(BinaryReader& in) {
  state_.eta = in.f64();
  state_.epsilon_den = in.f64();
  state_.estimated_max = in.row_vector();
  state_.estimated_min = in.row_vector();
  state_.scaling.weight = in.row_vector();
  state_.scaling.bias = in.row_vector();
}

std::unique_ptr<Normalizer> make_normalizer(NormalizerKind kind, std::size_t features,
                                            const NormalizerOptions& options) {
  switch (kind) {
    case NormalizerKind::global:
      return std::make_unique<GlobalNormalizer>(features, options.epsilon_den);
    case NormalizerKind::local:
      return std::make_unique<LocalNormalizer>(features, options.epsilon_den);
    case NormalizerKind::cn:
      return std::make_unique<ContinualNormalizer>(features, options.lambda, options.epsilon_cn);
    case NormalizerKind::clean:
      return std::make_unique<CleanNormalizer>(features, options.eta, options.epsilon_den);
  }
  throw ContractError("make_normalizer: unknown kind");
}

}  // namespace tabcl
