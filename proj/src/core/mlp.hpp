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

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "core/types.hpp"

namespace tabcl {

// Probabilities are clamped to [kBceClamp, 1 - kBceClamp] before the log.
inline constexpr double kBceClamp = 1e-7;

double sigmoid(double z);

// Mean binary cross-entropy.
double bce_loss(std::span<const double> probs, std::span<const Label> labels,
                double clamp = kBceClamp);

// 1 iff prob > kappa.
inline Label threshold(double prob, double kappa) { return prob > kappa ? 1 : 0; }

enum class Mode { training, evaluation };

struct MlpOptions {
  std::vector<std::size_t> hidden = {128, 128, 128, 128};
  double dropout = 0.5;
  std::uint64_t seed = 0;
};

// One mask per hidden layer, rows x width, entries 0 or 1/(1-p).
struct DropoutMasks {
  std::vector<Matrix> layers;
};

struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre_activation;  // per hidden layer
  std::vector<Matrix> activation;      // per hidden layer, after dropout
  std::vector<Matrix> masks;           // dropout masks used for `activation`
  Vector logits;
  Vector probs;
};

// Fully connected ReLU network with a single sigmoid output and inverted
// dropout after every hidden layer.
//
// Flat parameter order (layer-major, weights before biases): for each layer
// k, W_k as an out x in row-major block followed by b_k.
class MlpModel {
 public:
  MlpModel(std::size_t input_dim, const MlpOptions& options);

  std::size_t input_dim() const { return dims_.front(); }
  const std::vector<std::size_t>& layer_dims() const { return dims_; }
  std::size_t layer_count() const { return weights_.size(); }
  std::size_t parameter_count() const;
  double dropout() const { return dropout_; }

  Mode mode() const { return mode_; }
  void set_mode(Mode mode) { mode_ = mode; }

  // Dropout is applied only in training mode, with masks drawn from the
  // model's own generator.
  Vector forward(const Matrix& batch);
  // Evaluation-mode forward; never touches the generator.
  Vector predict(const Matrix& batch) const;

  DropoutMasks sample_dropout(std::size_t rows);
  DropoutMasks no_dropout(std::size_t rows) const;

  ForwardCache forward_train(const Matrix& batch, const DropoutMasks& masks) const;

  // Backpropagates per-row output-logit gradients `dlogits`.
  //  - squared == false: param_grad receives sum_n of the per-row gradients.
  //  - squared == true:  param_grad receives sum_n of their element-wise
  //    squares (per-sample outer products squared).
  // input_grad (optional) receives the per-row gradient w.r.t. the input.
  void backward(const ForwardCache& cache, const Vector& dlogits, std::span<double> param_grad,
                bool squared, Matrix* input_grad) const;

  // Mean-BCE gradient for one batch. Training mode only; draws a fresh
  // dropout mask and reuses it for the backward pass.
  std::vector<double> gradient(const Matrix& batch, const Labels& labels);

  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);
  void write_parameters(std::span<double> out) const;

  const std::vector<Matrix>& weights() const { return weights_; }
  std::vector<Matrix>& weights() { return weights_; }
  const std::vector<Vector>& biases() const { return biases_; }
  std::vector<Vector>& biases() { return biases_; }

  std::mt19937_64& generator() { return rng_; }
  const std::mt19937_64& generator() const { return rng_; }

 private:
  void check_input(const Matrix& batch) const;

  std::vector<std::size_t> dims_;
  std::vector<Matrix> weights_;  // out x in
  std::vector<Vector> biases_;
  double dropout_;
  Mode mode_ = Mode::training;
  std::mt19937_64 rng_;
};

// Element-wise affine layer out_l = w_l * x_l + b_l. The diagonal structure
// keeps every output feature a function of its own input feature only.
struct DiagonalAffine {
  RowVector weight;
  RowVector bias;

  static DiagonalAffine identity(std::size_t features);
  std::size_t features() const { return static_cast<std::size_t>(weight.size()); }
  std::size_t parameter_count() const { return 2 * features(); }

  Matrix forward(const Matrix& x) const;
};

}  // namespace tabcl
