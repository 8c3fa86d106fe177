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

#include "core/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/error.hpp"

namespace tabcl {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double bce_loss(std::span<const double> probs, std::span<const Label> labels, double clamp) {
  if (probs.size() != labels.size()) {
    throw ShapeError("bce_loss: " + std::to_string(probs.size()) + " probabilities vs " +
                     std::to_string(labels.size()) + " labels");
  }
  if (probs.empty()) throw ContractError("bce_loss: empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = std::clamp(probs[i], clamp, 1.0 - clamp);
    total -= labels[i] != 0 ? std::log(p) : std::log1p(-p);
  }
  return total / static_cast<double>(probs.size());
}

MlpModel::MlpModel(std::size_t input_dim, const MlpOptions& options)
    : dropout_(options.dropout), rng_(options.seed) {
  if (input_dim == 0) throw ContractError("MlpModel: input dimension must be positive");
  if (!(options.dropout >= 0.0 && options.dropout < 1.0)) {
    throw ContractError("MlpModel: dropout must lie in [0, 1)");
  }
  dims_.push_back(input_dim);
  for (std::size_t h : options.hidden) {
    if (h == 0) throw ContractError("MlpModel: hidden width must be positive");
    dims_.push_back(h);
  }
  dims_.push_back(1);

  // He-uniform weights, zero biases.
  for (std::size_t k = 0; k + 1 < dims_.size(); ++k) {
    const auto in = static_cast<Eigen::Index>(dims_[k]);
    const auto out = static_cast<Eigen::Index>(dims_[k + 1]);
    const double limit = std::sqrt(6.0 / static_cast<double>(in));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix w(out, in);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng_);
    weights_.push_back(std::move(w));
    biases_.push_back(Vector::Zero(out));
  }
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    n += static_cast<std::size_t>(weights_[k].size() + biases_[k].size());
  }
  return n;
}

void MlpModel::check_input(const Matrix& batch) const {
  if (static_cast<std::size_t>(batch.cols()) != input_dim()) {
    throw ShapeError("MlpModel: expected " + std::to_string(input_dim()) + " input features, got " +
                     std::to_string(batch.cols()));
  }
}

Vector MlpModel::predict(const Matrix& batch) const {
  check_input(batch);
  Matrix h = batch;
  const std::size_t hidden = weights_.size() - 1;
  for (std::size_t k = 0; k < hidden; ++k) {
    Matrix z = h * weights_[k].transpose();
    z.rowwise() += biases_[k].transpose();
    h = z.cwiseMax(0.0);
  }
  Vector logits = h * weights_.back().transpose();
  logits.array() += biases_.back()[0];
  return logits.unaryExpr([](double z) { return sigmoid(z); });
}

Vector MlpModel::forward(const Matrix& batch) {
  if (mode_ == Mode::evaluation) return predict(batch);
  check_input(batch);
  return forward_train(batch, sample_dropout(static_cast<std::size_t>(batch.rows()))).probs;
}

DropoutMasks MlpModel::sample_dropout(std::size_t rows) {
  DropoutMasks masks;
  const double keep = 1.0 - dropout_;
  std::bernoulli_distribution retain(keep);
  for (std::size_t k = 0; k + 2 < dims_.size(); ++k) {
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dims_[k + 1]));
    if (dropout_ == 0.0) {
      m.setOnes();
    } else {
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = retain(rng_) ? 1.0 / keep : 0.0;
    }
    masks.layers.push_back(std::move(m));
  }
  return masks;
}

DropoutMasks MlpModel::no_dropout(std::size_t rows) const {
  DropoutMasks masks;
  for (std::size_t k = 0; k + 2 < dims_.size(); ++k) {
    masks.layers.push_back(
        Matrix::Ones(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dims_[k + 1])));
  }
  return masks;
}

ForwardCache MlpModel::forward_train(const Matrix& batch, const DropoutMasks& masks) const {
  check_input(batch);
  const std::size_t hidden = weights_.size() - 1;
  if (masks.layers.size() != hidden) throw ShapeError("forward_train: wrong number of dropout masks");

  ForwardCache cache;
  cache.input = batch;
  cache.masks = masks.layers;
  const Matrix* h = &cache.input;
  for (std::size_t k = 0; k < hidden; ++k) {
    if (masks.layers[k].rows() != batch.rows() || masks.layers[k].cols() != weights_[k].rows()) {
      throw ShapeError("forward_train: dropout mask shape mismatch at layer " + std::to_string(k));
    }
    Matrix z = (*h) * weights_[k].transpose();
    z.rowwise() += biases_[k].transpose();
    cache.activation.push_back(z.cwiseMax(0.0).cwiseProduct(masks.layers[k]));
    cache.pre_activation.push_back(std::move(z));
    h = &cache.activation.back();
  }
  cache.logits = (*h) * weights_.back().transpose();
  cache.logits.array() += biases_.back()[0];
  cache.probs = cache.logits.unaryExpr([](double z) { return sigmoid(z); });
  return cache;
}

void MlpModel::backward(const ForwardCache& cache, const Vector& dlogits,
                        std::span<double> param_grad, bool squared, Matrix* input_grad) const {
  if (param_grad.size() != parameter_count()) throw ShapeError("backward: gradient buffer size");
  if (dlogits.size() != cache.logits.size()) throw ShapeError("backward: dlogits size");

  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    offsets.push_back(offset);
    offset += static_cast<std::size_t>(weights_[k].size() + biases_[k].size());
  }

  Matrix delta = dlogits;  // n x 1
  for (std::size_t layer = weights_.size(); layer-- > 0;) {
    const Matrix& below = layer == 0 ? cache.input : cache.activation[layer - 1];
    const auto out = weights_[layer].rows();
    const auto in = weights_[layer].cols();
    Eigen::Map<Matrix> gw(param_grad.data() + offsets[layer], out, in);
    Eigen::Map<Vector> gb(param_grad.data() + offsets[layer] + out * in, out);
    if (squared) {
      gw.noalias() = delta.cwiseAbs2().transpose() * below.cwiseAbs2();
      gb = delta.cwiseAbs2().colwise().sum().transpose();
    } else {
      gw.noalias() = delta.transpose() * below;
      gb = delta.colwise().sum().transpose();
    }
    if (layer == 0 && input_grad == nullptr) break;

    Matrix d_below = delta * weights_[layer];
    if (layer == 0) {
      *input_grad = std::move(d_below);
      break;
    }
    const Matrix& z = cache.pre_activation[layer - 1];
    const Matrix& mask = cache.masks[layer - 1];
    // a = relu(z) * mask
    delta = (z.array() > 0.0).select(d_below.array() * mask.array(), 0.0).matrix();
  }
}

std::vector<double> MlpModel::gradient(const Matrix& batch, const Labels& labels) {
  if (mode_ != Mode::training) throw ContractError("MlpModel::gradient: model is in evaluation mode");
  if (labels.size() != static_cast<std::size_t>(batch.rows())) {
    throw ShapeError("MlpModel::gradient: labels/rows mismatch");
  }
  check_input(batch);
  const ForwardCache cache = forward_train(batch, sample_dropout(labels.size()));
  Vector dlogits(cache.probs.size());
  const double n = static_cast<double>(labels.size());
  for (Eigen::Index i = 0; i < dlogits.size(); ++i) {
    dlogits[i] = (cache.probs[i] - labels[static_cast<std::size_t>(i)]) / n;
  }
  std::vector<double> grad(parameter_count());
  backward(cache, dlogits, grad, false, nullptr);
  return grad;
}

std::vector<double> MlpModel::parameters() const {
  std::vector<double> flat(parameter_count());
  write_parameters(flat);
  return flat;
}

void MlpModel::write_parameters(std::span<double> out) const {
  if (out.size() != parameter_count()) throw ShapeError("write_parameters: size mismatch");
  double* p = out.data();
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    p = std::copy_n(weights_[k].data(), weights_[k].size(), p);
    p = std::copy_n(biases_[k].data(), biases_[k].size(), p);
  }
}

void MlpModel::set_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw ShapeError("set_parameters: expected " + std::to_string(parameter_count()) +
                     " values, got " + std::to_string(flat.size()));
  }
  const double* p = flat.data();
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    std::copy_n(p, weights_[k].size(), weights_[k].data());
    p += weights_[k].size();
    std::copy_n(p, biases_[k].size(), biases_[k].data());
    p += biases_[k].size();
  }
}

DiagonalAffine DiagonalAffine::identity(std::size_t features) {
  const auto d = static_cast<Eigen::Index>(features);
  return DiagonalAffine{RowVector::Ones(d), RowVector::Zero(d)};
}

Matrix DiagonalAffine::forward(const Matrix& x) const {
  if (x.cols() != weight.size()) {
    throw ShapeError("DiagonalAffine: expected " + std::to_string(weight.size()) +
                     " features, got " + std::to_string(x.cols()));
  }
  Matrix out = x.array().rowwise() * weight.array();
  out.rowwise() += bias;
  return out;
}

}  // namespace tabcl
