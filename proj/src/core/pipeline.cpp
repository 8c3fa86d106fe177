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

#include "core/pipeline.hpp"

#include <algorithm>
#include <string>

#include "core/error.hpp"

namespace tabcl {

TrainablePipeline::TrainablePipeline(MlpModel& model, DiagonalAffine* scaling)
    : model_(model), scaling_(scaling) {
  if (scaling_ && scaling_->features() != model_.input_dim()) {
    throw ShapeError("TrainablePipeline: scaling layer has " + std::to_string(scaling_->features()) +
                     " features, model expects " + std::to_string(model_.input_dim()));
  }
}

std::size_t TrainablePipeline::parameter_count() const {
  return scaling_parameter_count() + model_.parameter_count();
}

std::vector<double> TrainablePipeline::parameters() const {
  std::vector<double> flat(parameter_count());
  double* p = flat.data();
  if (scaling_) {
    p = std::copy_n(scaling_->weight.data(), scaling_->weight.size(), p);
    p = std::copy_n(scaling_->bias.data(), scaling_->bias.size(), p);
  }
  model_.write_parameters(std::span<double>(p, model_.parameter_count()));
  return flat;
}

void TrainablePipeline::set_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw ShapeError("TrainablePipeline::set_parameters: expected " +
                     std::to_string(parameter_count()) + " values, got " +
                     std::to_string(flat.size()));
  }
  const double* p = flat.data();
  if (scaling_) {
    std::copy_n(p, scaling_->weight.size(), scaling_->weight.data());
    p += scaling_->weight.size();
    std::copy_n(p, scaling_->bias.size(), scaling_->bias.data());
    p += scaling_->bias.size();
  }
  model_.set_parameters(std::span<const double>(p, model_.parameter_count()));
}

Matrix TrainablePipeline::scaled_input(const Matrix& x) const {
  return scaling_ ? scaling_->forward(x) : x;
}

void TrainablePipeline::check_rows(const Matrix& x, const Labels& y) const {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw ShapeError("TrainablePipeline: " + std::to_string(x.rows()) + " rows vs " +
                     std::to_string(y.size()) + " labels");
  }
  if (y.empty()) throw ContractError("TrainablePipeline: empty batch");
}

Vector TrainablePipeline::predict(const Matrix& x) const { return model_.predict(scaled_input(x)); }

LossGradient TrainablePipeline::loss_and_gradient(const Matrix& x, const Labels& y) {
  if (model_.mode() != Mode::training) {
    throw ContractError("backward called while the model is in evaluation mode");
  }
  check_rows(x, y);
  const DropoutMasks masks = model_.sample_dropout(y.size());
  return loss_and_gradient(x, y, masks);
}

LossGradient TrainablePipeline::loss_and_gradient(const Matrix& x, const Labels& y,
                                                  const DropoutMasks& masks) const {
  check_rows(x, y);
  const Matrix input = scaled_input(x);
  const ForwardCache cache = model_.forward_train(input, masks);

  LossGradient out;
  out.loss = bce_loss(std::span<const double>(cache.probs.data(), y.size()), y);
  const double n = static_cast<double>(y.size());
  Vector dlogits(cache.probs.size());
  for (Eigen::Index i = 0; i < dlogits.size(); ++i) {
    dlogits[i] = (cache.probs[i] - y[static_cast<std::size_t>(i)]) / n;
  }

  out.gradient.assign(parameter_count(), 0.0);
  const std::size_t s = scaling_parameter_count();
  Matrix input_grad;
  model_.backward(cache, dlogits, std::span<double>(out.gradient).subspan(s), false,
                  scaling_ ? &input_grad : nullptr);
  if (scaling_) {
    const std::size_t d = scaling_->features();
    Eigen::Map<RowVector> gw(out.gradient.data(), static_cast<Eigen::Index>(d));
    Eigen::Map<RowVector> gb(out.gradient.data() + d, static_cast<Eigen::Index>(d));
    gw = input_grad.cwiseProduct(x).colwise().sum();
    gb = input_grad.colwise().sum();
  }
  return out;
}

double TrainablePipeline::loss(const Matrix& x, const Labels& y, const DropoutMasks& masks) const {
  check_rows(x, y);
  const ForwardCache cache = model_.forward_train(scaled_input(x), masks);
  return bce_loss(std::span<const double>(cache.probs.data(), y.size()), y);
}

std::vector<double> TrainablePipeline::mean_squared_sample_gradients(const Matrix& x,
                                                                     const Labels& y) const {
  check_rows(x, y);
  const ForwardCache cache = model_.forward_train(scaled_input(x), model_.no_dropout(y.size()));
  Vector dlogits(cache.probs.size());
  for (Eigen::Index i = 0; i < dlogits.size(); ++i) {
    dlogits[i] = cache.probs[i] - y[static_cast<std::size_t>(i)];
  }

  std::vector<double> out(parameter_count(), 0.0);
  const std::size_t s = scaling_parameter_count();
  Matrix input_grad;
  model_.backward(cache, dlogits, std::span<double>(out).subspan(s), true,
                  scaling_ ? &input_grad : nullptr);
  if (scaling_) {
    const std::size_t d = scaling_->features();
    Eigen::Map<RowVector> gw(out.data(), static_cast<Eigen::Index>(d));
    Eigen::Map<RowVector> gb(out.data() + d, static_cast<Eigen::Index>(d));
    gw = input_grad.cwiseProduct(x).cwiseAbs2().colwise().sum();
    gb = input_grad.cwiseAbs2().colwise().sum();
  }
  const double n = static_cast<double>(y.size());
  for (double& v : out) v /= n;
  return out;
}

}  // namespace tabcl
