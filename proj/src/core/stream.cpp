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

#include "core/stream.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "core/error.hpp"

namespace tabcl {

FeatureMatrix FeatureMatrix::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > rows()) throw ContractError("FeatureMatrix::slice: bad row range");
  FeatureMatrix out;
  const auto b = static_cast<Eigen::Index>(begin);
  const auto n = static_cast<Eigen::Index>(end - begin);
  out.values = values.middleRows(b, n);
  out.labels.assign(labels.begin() + static_cast<std::ptrdiff_t>(begin),
                    labels.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

FeatureMatrix FeatureMatrix::gather(const std::vector<std::size_t>& indices) const {
  FeatureMatrix out;
  out.values.resize(static_cast<Eigen::Index>(indices.size()), values.cols());
  out.labels.resize(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows()) throw ContractError("FeatureMatrix::gather: index out of range");
    out.values.row(static_cast<Eigen::Index>(i)) = values.row(static_cast<Eigen::Index>(indices[i]));
    out.labels[i] = labels[indices[i]];
  }
  return out;
}

std::size_t train_rows_for(std::size_t rows, double split_ratio) {
  // The epsilon absorbs representation error such as 0.29 * 100 = 28.999...
  auto n = static_cast<std::size_t>(std::floor(split_ratio * static_cast<double>(rows) + 1e-9));
  return std::clamp<std::size_t>(n, 1, rows - 1);
}

ExperienceStream chunk_stream(const FeatureMatrix& data, std::size_t chunk_size, double split_ratio,
                              bool drop_partial) {
  if (data.rows() == 0) throw ContractError("chunk_stream: empty input");
  if (data.labels.size() != data.rows()) throw ShapeError("chunk_stream: labels/rows mismatch");
  if (chunk_size < 2) throw ContractError("chunk_stream: chunk_size must be >= 2");
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) {
    throw ContractError("chunk_stream: split_ratio must lie in (0, 1)");
  }

  ExperienceStream stream;
  stream.chunk_size = chunk_size;
  const std::size_t n = data.rows();
  if (chunk_size > n) {
    stream.oversized_chunk = true;
    chunk_size = n;
    if (n < 2) throw ContractError("chunk_stream: need at least 2 rows");
  }

  for (std::size_t begin = 0; begin < n; begin += chunk_size) {
    const std::size_t end = std::min(n, begin + chunk_size);
    const std::size_t size = end - begin;
    if (size < chunk_size && (drop_partial || size < 2)) break;
    const std::size_t split = begin + train_rows_for(size, split_ratio);
    stream.chunks.push_back(Experience{data.slice(begin, split), data.slice(split, end)});
  }
  return stream;
}

void DriftConfig::validate() const {
  if (n_experiences == 0) throw ConfigError("synthetic.n_experiences: must be positive");
  if (rows_per_experience < 2) throw ConfigError("synthetic.rows_per_experience: must be >= 2");
  if (n_features == 0) throw ConfigError("synthetic.n_features: must be positive");
  if (!(scale_factor > 0.0) || !std::isfinite(scale_factor)) {
    throw ConfigError("synthetic.scale_factor: must be a finite positive number");
  }
  if (scale_jump_at >= n_experiences) {
    throw ConfigError("synthetic.scale_jump_at: must be < n_experiences (" +
                      std::to_string(n_experiences) + ")");
  }
  if (!(class_balance > 0.0 && class_balance < 1.0)) {
    throw ConfigError("synthetic.class_balance: must lie in (0, 1)");
  }
}

namespace {

constexpr int kClustersPerClass = 3;

struct ClusterModel {
  // feature_scale[j] sets the magnitude of feature j; features span several
  // orders of magnitude, as traffic counters do.
  RowVector feature_scale;
  // centers[c * kClustersPerClass + k] is the unit-scale center of cluster k
  // of class c.
  std::vector<RowVector> centers;
  double noise = 0.0;
};

ClusterModel make_clusters(const DriftConfig& cfg, std::mt19937_64& rng) {
  const auto d = static_cast<Eigen::Index>(cfg.n_features);
  std::uniform_real_distribution<double> log_scale(0.0, 2.0);
  std::uniform_real_distribution<double> base(2.0, 4.0);
  std::normal_distribution<double> offset(0.0, 3.0);

  ClusterModel model;
  model.feature_scale.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) model.feature_scale[j] = std::pow(10.0, log_scale(rng));

  RowVector shared(d);
  for (Eigen::Index j = 0; j < d; ++j) shared[j] = base(rng);
  for (int c = 0; c < 2; ++c) {
    for (int k = 0; k < kClustersPerClass; ++k) {
      RowVector center = shared;
      for (Eigen::Index j = 0; j < d; ++j) center[j] += offset(rng);
      model.centers.push_back(center);
    }
  }
  model.noise = 0.2;
  return model;
}

}  // namespace

FeatureMatrix generate_drift_matrix(const DriftConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  const ClusterModel clusters = make_clusters(cfg, rng);

  const auto d = static_cast<Eigen::Index>(cfg.n_features);
  const std::size_t total = cfg.n_experiences * cfg.rows_per_experience;
  FeatureMatrix out;
  out.values.resize(static_cast<Eigen::Index>(total), d);
  out.labels.resize(total);

  std::bernoulli_distribution attack(cfg.class_balance);
  std::uniform_int_distribution<int> pick(0, kClustersPerClass - 1);
  std::normal_distribution<double> noise(0.0, clusters.noise);

  for (std::size_t i = 0; i < total; ++i) {
    const std::size_t experience = i / cfg.rows_per_experience;
    const double factor = experience >= cfg.scale_jump_at ? cfg.scale_factor : 1.0;
    const int label = attack(rng) ? 1 : 0;
    const RowVector& center =
        clusters.centers[static_cast<std::size_t>(label * kClustersPerClass + pick(rng))];
    auto row = out.values.row(static_cast<Eigen::Index>(i));
    for (Eigen::Index j = 0; j < d; ++j) {
      const double unit = std::max(0.0, center[j] + noise(rng));
      row[j] = unit * clusters.feature_scale[j] * factor;
    }
    out.labels[i] = static_cast<Label>(label);
  }
  return out;
}

ExperienceStream generate_drift_stream(const DriftConfig& cfg, double split_ratio) {
  return chunk_stream(generate_drift_matrix(cfg), cfg.rows_per_experience, split_ratio);
}

}  // namespace tabcl
