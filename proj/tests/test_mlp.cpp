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

#include <cmath>
#include <limits>
#include <random>

#include "core/adam.hpp"
#include "core/error.hpp"
#include "core/metrics.hpp"
#include "core/mlp.hpp"
#include "core/pipeline.hpp"
#include "support.hpp"

using namespace tabcl;
using namespace tabcl::testing;

namespace {

MlpModel tiny_model(std::size_t d, std::vector<std::size_t> hidden, double dropout, std::uint64_t seed) {
  MlpOptions o;
  o.hidden = std::move(hidden);
  o.dropout = dropout;
  o.seed = seed;
  return MlpModel(d, o);
}

// Reference forward pass written against plain loops.
double reference_prob(const MlpModel& m, const std::vector<double>& x) {
  std::vector<double> h = x;
  for (std::size_t k = 0; k < m.layer_count(); ++k) {
    const auto& w = m.weights()[k];
    const auto& b = m.biases()[k];
    std::vector<double> z(static_cast<std::size_t>(w.rows()));
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      double s = b[i];
      for (Eigen::Index j = 0; j < w.cols(); ++j) s += w(i, j) * h[static_cast<std::size_t>(j)];
      z[static_cast<std::size_t>(i)] = k + 1 < m.layer_count() ? std::max(0.0, s) : s;
    }
    h = z;
  }
  return 1.0 / (1.0 + std::exp(-h[0]));
}

}  // namespace

TEST_SUITE("mlp") {
  TEST_CASE("layer shapes and parameter count") {
    auto m = tiny_model(20, {128, 128, 128, 128}, 0.5, 1);
    CHECK(m.layer_dims() == std::vector<std::size_t>{20, 128, 128, 128, 128, 1});
    CHECK(m.parameter_count() == 20 * 128 + 128 + 3 * (128 * 128 + 128) + 128 + 1);
  }

  TEST_CASE("he-uniform weights and zero biases") {
    auto m = tiny_model(50, {64}, 0.0, 3);
    const double limit = std::sqrt(6.0 / 50.0);
    CHECK(m.weights()[0].cwiseAbs().maxCoeff() <= limit);
    CHECK(m.weights()[0].cwiseAbs().maxCoeff() > 0.8 * limit);
    CHECK(m.biases()[0].isZero());
    CHECK(m.biases()[1].isZero());
  }

  TEST_CASE("all-zero parameters give probability one half") {
    auto m = tiny_model(3, {4, 4}, 0.5, 1);
    m.set_parameters(std::vector<double>(m.parameter_count(), 0.0));
    std::mt19937_64 rng(2);
    Vector p = m.predict(random_matrix(rng, 7, 3));
    for (Eigen::Index i = 0; i < p.size(); ++i) CHECK(p[i] == 0.5);
  }

  TEST_CASE("hand-computed two-layer net") {
    auto m = tiny_model(2, {2}, 0.0, 1);
    m.weights()[0] << 1.0, -1.0, 0.5, 2.0;
    m.biases()[0] << 0.0, -1.0;
    m.weights()[1] << 1.0, -0.5;
    m.biases()[1] << 0.25;
    Matrix x(1, 2);
    x << 2.0, 1.0;
    // hidden = relu([1, 2]) = [1, 2]; logit = 1 - 1 + 0.25
    CHECK(m.predict(x)[0] == doctest::Approx(1.0 / (1.0 + std::exp(-0.25))).epsilon(1e-15));
  }

  TEST_CASE("predict agrees with the loop oracle") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
      auto m = tiny_model(4, {5, 3}, 0.5, rng());
      for (auto& b : m.biases()) b.setRandom();
      Matrix x = random_matrix(rng, 6, 4, -2.0, 2.0);
      Vector p = m.predict(x);
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        std::vector<double> row(x.row(i).data(), x.row(i).data() + 4);
        CHECK(p[i] == doctest::Approx(reference_prob(m, row)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("bce reference values") {
    std::vector<double> half = {0.5, 0.5};
    Labels y = {1, 0};
    CHECK(bce_loss(half, y) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    std::vector<double> p = {0.9, 0.2};
    CHECK(bce_loss(p, y) == doctest::Approx(-(std::log(0.9) + std::log(0.8)) / 2.0).epsilon(1e-15));
    std::vector<double> certain = {0.0};
    Labels pos = {1};
    CHECK(bce_loss(certain, pos) == doctest::Approx(-std::log(kBceClamp)));
    CHECK_THROWS_AS(bce_loss(p, Labels{1}), ShapeError);
  }

  TEST_CASE("threshold is strict") {
    CHECK(threshold(0.5, 0.5) == 0);
    CHECK(threshold(0.5000001, 0.5) == 1);
    CHECK(threshold_all(std::vector<double>{0.2, 0.5, 0.7}, 0.5) == Labels{0, 0, 1});
  }

  TEST_CASE("gradient matches finite differences with a fixed dropout mask") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t d = 1 + rng() % 4;
      auto m = tiny_model(d, {4, 3}, 0.5, rng());
      // Zero biases put dead rows exactly on the ReLU kink.
      for (auto& b : m.biases()) b = Vector::Random(b.size()) * 0.1;
      auto scaling = DiagonalAffine::identity(d);
      scaling.weight = RowVector::Random(static_cast<Eigen::Index>(d)).array() + 1.5;
      scaling.bias = RowVector::Random(static_cast<Eigen::Index>(d)) * 0.3;
      TrainablePipeline pipe(m, &scaling);
      Matrix x = random_matrix(rng, 8, d);
      Labels y = random_labels(rng, 8);
      const DropoutMasks masks = m.sample_dropout(8);
      const auto analytic = pipe.loss_and_gradient(x, y, masks).gradient;
      const auto theta = pipe.parameters();
      auto numeric = finite_difference(
          [&](const std::vector<double>& p) {
            pipe.set_parameters(p);
            return pipe.loss(x, y, masks);
          },
          theta);
      pipe.set_parameters(theta);
      CHECK(max_relative_error(analytic, numeric) < 1e-4);
    }
  }

  TEST_CASE("duplicating every row leaves the mean gradient unchanged") {
    std::mt19937_64 rng(23);
    auto m = tiny_model(3, {5}, 0.0, 4);
    Matrix x = random_matrix(rng, 6, 3);
    Labels y = random_labels(rng, 6);
    Matrix xx(12, 3);
    xx << x, x;
    Labels yy = y;
    yy.insert(yy.end(), y.begin(), y.end());
    auto g1 = m.gradient(x, y);
    auto g2 = m.gradient(xx, yy);
    CHECK(max_relative_error(g1, g2, 1e-12) < 1e-12);
  }

  TEST_CASE("balanced labels with zero parameters give zero output-bias gradient") {
    auto m = tiny_model(2, {3}, 0.0, 1);
    m.set_parameters(std::vector<double>(m.parameter_count(), 0.0));
    Matrix x(4, 2);
    x << 1, 2, 3, 4, 5, 6, 7, 8;
    auto g = m.gradient(x, Labels{1, 0, 1, 0});
    CHECK(g.back() == 0.0);
    auto skewed = m.gradient(x, Labels{1, 1, 1, 0});
    CHECK(skewed.back() == doctest::Approx(0.5 - 0.75));
  }

  TEST_CASE("evaluation mode is deterministic and refuses gradients") {
    std::mt19937_64 rng(8);
    auto m = tiny_model(3, {6}, 0.5, 5);
    Matrix x = random_matrix(rng, 4, 3);
    m.set_mode(Mode::evaluation);
    CHECK(m.forward(x) == m.forward(x));
    CHECK_THROWS_AS(m.gradient(x, Labels{0, 1, 0, 1}), ContractError);
    m.set_mode(Mode::training);
    CHECK_NOTHROW(m.gradient(x, Labels{0, 1, 0, 1}));
  }

  TEST_CASE("inverted dropout keeps the expected activation") {
    auto m = tiny_model(2, {200}, 0.5, 6);
    auto masks = m.sample_dropout(50);
    const Matrix& mask = masks.layers[0];
    for (Eigen::Index i = 0; i < mask.size(); ++i) {
      CHECK((mask.data()[i] == 0.0 || mask.data()[i] == 2.0));
    }
    CHECK(mask.mean() == doctest::Approx(1.0).epsilon(0.05));
  }

  TEST_CASE("shape errors") {
    auto m = tiny_model(3, {2}, 0.0, 1);
    CHECK_THROWS_AS(m.predict(Matrix::Zero(2, 4)), ShapeError);
    CHECK_THROWS_AS(m.set_parameters(std::vector<double>(3)), ShapeError);
    auto scaling = DiagonalAffine::identity(4);
    CHECK_THROWS_AS(TrainablePipeline(m, &scaling), ShapeError);
  }

  TEST_CASE("fisher diagonal matches per-row gradients squared") {
    std::mt19937_64 rng(31);
    auto m = tiny_model(3, {4}, 0.5, 2);
    auto scaling = DiagonalAffine::identity(3);
    scaling.weight << 0.5, 1.5, 2.0;
    TrainablePipeline pipe(m, &scaling);
    Matrix x = random_matrix(rng, 5, 3);
    Labels y = random_labels(rng, 5);
    std::vector<double> expected(pipe.parameter_count(), 0.0);
    for (Eigen::Index i = 0; i < 5; ++i) {
      Matrix row = x.row(i);
      Labels yi = {y[static_cast<std::size_t>(i)]};
      auto g = pipe.loss_and_gradient(row, yi, m.no_dropout(1)).gradient;
      for (std::size_t k = 0; k < g.size(); ++k) expected[k] += g[k] * g[k] / 5.0;
    }
    auto fisher = pipe.mean_squared_sample_gradients(x, y);
    CHECK(max_relative_error(fisher, expected, 1e-12) < 1e-10);
  }
}

TEST_SUITE("adam") {
  TEST_CASE("zero gradient on fresh state leaves parameters unchanged") {
    AdamState s(3, AdamOptions{});
    std::vector<double> p = {1.0, -2.0, 3.0};
    const auto before = p;
    adam_step(s, p, std::vector<double>(3, 0.0));
    CHECK(p == before);
  }

  TEST_CASE("first step moves each parameter by about the learning rate") {
    AdamOptions o;
    o.learning_rate = 0.01;
    AdamState s(3, o);
    std::vector<double> p = {0.0, 0.0, 0.0};
    adam_step(s, p, std::vector<double>{0.5, -3.0, 1e-3});
    CHECK(p[0] == doctest::Approx(-0.01).epsilon(1e-6));
    CHECK(p[1] == doctest::Approx(0.01).epsilon(1e-6));
    CHECK(p[2] == doctest::Approx(-0.01).epsilon(1e-4));
  }

  TEST_CASE("matches a scalar reference over several steps") {
    AdamOptions o;
    o.learning_rate = 0.05;
    AdamState s(1, o);
    std::vector<double> p = {1.0};
    double m = 0, v = 0, ref = 1.0;
    for (int t = 1; t <= 20; ++t) {
      const double g = 2.0 * p[0];
      adam_step(s, p, std::vector<double>{g});
      const double rg = 2.0 * ref;
      m = 0.9 * m + 0.1 * rg;
      v = 0.999 * v + 0.001 * rg * rg;
      ref -= 0.05 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
      CHECK(p[0] == doctest::Approx(ref).epsilon(1e-14));
    }
  }

  TEST_CASE("non-finite gradient is rejected without side effects") {
    AdamState s(2, AdamOptions{});
    std::vector<double> p = {1.0, 2.0};
    std::vector<double> g = {0.1, std::numeric_limits<double>::quiet_NaN()};
    CHECK_THROWS_AS(adam_step(s, p, g), NumericError);
    CHECK(s.step == 0);
    CHECK(p == std::vector<double>{1.0, 2.0});
    CHECK_THROWS_AS(adam_step(s, p, std::vector<double>{1.0}), ShapeError);
  }
}
