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
#include <span>
#include <string_view>

#include "core/mlp.hpp"
#include "core/types.hpp"

namespace tabcl {

class BinaryReader;
class BinaryWriter;

inline constexpr double kDefaultEpsilonDen = 1e-8;

// Per-feature minimum and maximum; max[l] >= min[l] for every fitted l.
struct MinMaxBounds {
  RowVector min;
  RowVector max;

  std::size_t features() const { return static_cast<std::size_t>(min.size()); }
};

MinMaxBounds column_bounds(const Matrix& x);

// Bounds over the union of every train and test split of every chunk.
MinMaxBounds global_fit(std::span<const FeatureMatrix> chunks);
MinMaxBounds global_fit(const ExperienceStream& stream);

// (x - min) / max(max - min, eps_den), per feature, unclipped.
Matrix minmax_transform(const Matrix& x, const MinMaxBounds& bounds,
                        double eps_den = kDefaultEpsilonDen);

// Replaces `bounds` by the chunk's own bounds and returns the chunk scaled
// with them.
Matrix local_update_transform(MinMaxBounds& bounds, const Matrix& chunk,
                              double eps_den = kDefaultEpsilonDen);

struct CnState {
  RowVector mean;
  RowVector stddev;  // population standard deviation
  double lambda = 0.1;
  double epsilon = 1e-8;
  bool initialized = false;
};

// mean_t = (1 - lambda) mean_{t-1} + lambda mean(chunk), same for stddev.
// The first update copies the chunk statistics.
void cn_update(CnState& state, const Matrix& chunk);
Matrix cn_transform(const CnState& state, const Matrix& x);

struct CleanState {
  RowVector estimated_max;
  RowVector estimated_min;
  double eta = 0.9;
  DiagonalAffine scaling;
  double epsilon_den = kDefaultEpsilonDen;

  // estimated_max = 1, estimated_min = 0, identity scaling.
  static CleanState initial(std::size_t features, double eta, double epsilon_den = kDefaultEpsilonDen);
};

// est_max <- (1 - eta) max(chunk) + eta est_max, same for est_min.
void clean_update(CleanState& state, const Matrix& chunk);
// Min-max scaling with the estimated bounds (no scaling layer).
Matrix clean_estimated_minmax(const CleanState& state, const Matrix& x);
// Estimated min-max followed by the diagonal scaling layer.
Matrix clean_transform(const CleanState& state, const Matrix& x);

enum class NormalizerKind { global, local, cn, clean };

std::string_view to_string(NormalizerKind kind);
NormalizerKind parse_normalizer_kind(std::string_view name);

struct NormalizerOptions {
  double eta = 0.9;
  double lambda = 0.1;
  double epsilon_cn = 1e-8;
  double epsilon_den = kDefaultEpsilonDen;
};

// Common contract of the four normalizers: update() is the only mutator;
// transform() reads the current state, feature by feature.
class Normalizer {
 public:
  virtual ~Normalizer() = default;

  virtual NormalizerKind kind() const = 0;
  std::size_t features() const { return features_; }

  // Fold a training chunk into the state.
  void update(const Matrix& train);
  // Full normalization S(x).
  virtual Matrix transform(const Matrix& x) const = 0;
  // The part of S that has no trainable parameters; a TrainablePipeline
  // built over trainable_scaling() applies the rest.
  virtual Matrix fixed_transform(const Matrix& x) const { return transform(x); }
  virtual DiagonalAffine* trainable_scaling() { return nullptr; }
  virtual const DiagonalAffine* trainable_scaling() const { return nullptr; }

  // Incremented by every update(); lets callers prove which state was used.
  std::uint64_t version() const { return version_; }

  void save(BinaryWriter& out) const;
  void load(BinaryReader& in);

 protected:
  explicit Normalizer(std::size_t features) : features_(features) {}
  virtual void do_update(const Matrix& train) = 0;
  virtual void save_state(BinaryWriter& out) const = 0;
  virtual void load_state(BinaryReader& in) = 0;
  void check_features(const Matrix& x, std::string_view who) const;

 private:
  std::size_t features_;
  std::uint64_t version_ = 0;
};

// Oracle: bounds come from the whole stream, future chunks included.
class GlobalNormalizer final : public Normalizer {
 public:
  GlobalNormalizer(std::size_t features, double epsilon_den);
  NormalizerKind kind() const override { return NormalizerKind::global; }
  void fit(const ExperienceStream& stream);
  void fit(MinMaxBounds bounds);
  bool fitted() const { return fitted_; }
  const MinMaxBounds& bounds() const { return bounds_; }
  Matrix transform(const Matrix& x) const override;

 protected:
  void do_update(const Matrix&) override {}
  void save_state(BinaryWriter& out) const override;
  void load_state(BinaryReader& in) override;

 private:
  MinMaxBounds bounds_;
  double epsilon_den_;
  bool fitted_ = false;
};

class LocalNormalizer final : public Normalizer {
 public:
  LocalNormalizer(std::size_t features, double epsilon_den);
  NormalizerKind kind() const override { return NormalizerKind::local; }
  const MinMaxBounds& bounds() const { return bounds_; }
  Matrix transform(const Matrix& x) const override;

 protected:
  void do_update(const Matrix& train) override;
  void save_state(BinaryWriter& out) const override;
  void load_state(BinaryReader& in) override;

 private:
  MinMaxBounds bounds_;
  double epsilon_den_;
  bool fitted_ = false;
};

class ContinualNormalizer final : public Normalizer {
 public:
  ContinualNormalizer(std::size_t features, double lambda, double epsilon);
  NormalizerKind kind() const override { return NormalizerKind::cn; }
  const CnState& state() const { return state_; }
  Matrix transform(const Matrix& x) const override;

 protected:
  void do_update(const Matrix& train) override;
  void save_state(BinaryWriter& out) const override;
  void load_state(BinaryReader& in) override;

 private:
  CnState state_;
};

class CleanNormalizer final : public Normalizer {
 public:
  CleanNormalizer(std::size_t features, double eta, double epsilon_den);
  NormalizerKind kind() const override { return NormalizerKind::clean; }
  const CleanState& state() const { return state_; }
  CleanState& state() { return state_; }
  Matrix transform(const Matrix& x) const override;
  Matrix fixed_transform(const Matrix& x) const override;
  DiagonalAffine* trainable_scaling() override { return &state_.scaling; }
  const DiagonalAffine* trainable_scaling() const override { return &state_.scaling; }

 protected:
  void do_update(const Matrix& train) override;
  void save_state(BinaryWriter& out) const override;
  void load_state(BinaryReader& in) override;

 private:
  CleanState state_;
};

std::unique_ptr<Normalizer> make_normalizer(NormalizerKind kind, std::size_t features,
                                            const NormalizerOptions& options = {});

}  // namespace tabcl
