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

#include <span>
#include <vector>

#include "core/mlp.hpp"

namespace tabcl {

struct LossGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};

// The trainable part of the classifier: an optional diagonal scaling layer
// (owned by the normalizer that uses it) followed by the MLP. Every
// optimizer, projection and penalty works on one flat vector in the order
// [scaling weights, scaling biases, MLP parameters].
class TrainablePipeline {
 public:
  explicit TrainablePipeline(MlpModel& model, DiagonalAffine* scaling = nullptr);

  std::size_t parameter_count() const;
  std::size_t scaling_parameter_count() const { return scaling_ ? scaling_->parameter_count() : 0; }
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);

  // Evaluation-mode probabilities for inputs that already went through the
  // fixed part of the normalizer.
  Vector predict(const Matrix& x) const;

  // Mean-BCE loss and its exact gradient. Requires training mode; draws one
  // dropout mask and uses it for both passes.
  LossGradient loss_and_gradient(const Matrix& x, const Labels& y);
  LossGradient loss_and_gradient(const Matrix& x, const Labels& y, const DropoutMasks& masks) const;
  double loss(const Matrix& x, const Labels& y, const DropoutMasks& masks) const;

  // Per-parameter mean over rows of the squared per-row log-likelihood
  // gradient, evaluated without dropout (diagonal empirical Fisher).
  std::vector<double> mean_squared_sample_gradients(const Matrix& x, const Labels& y) const;

  MlpModel& model() { return model_; }
  const MlpModel& model() const { return model_; }
  DiagonalAffine* scaling() { return scaling_; }
  const DiagonalAffine* scaling() const { return scaling_; }

 private:
  Matrix scaled_input(const Matrix& x) const;
  void check_rows(const Matrix& x, const Labels& y) const;

  MlpModel& model_;
  DiagonalAffine* scaling_;
};

}  // namespace tabcl
