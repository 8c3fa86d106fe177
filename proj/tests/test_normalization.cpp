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
#include <random>
#include <sstream>

#include "core/error.hpp"
#include "core/normalization.hpp"
#include "core/serialize.hpp"
#include "support.hpp"

using namespace tabcl;
using namespace tabcl::testing;

namespace {

Matrix column(std::initializer_list<double> values) {
  Matrix m(static_cast<Eigen::Index>(values.size()), 1);
  Eigen::Index i = 0;
  for (double v : values) m(i++, 0) = v;
  return m;
}

FeatureMatrix labelled(const Matrix& x) { return FeatureMatrix{x, Labels(static_cast<std::size_t>(x.rows()), 0)}; }

// Population standard deviation of each column, two-pass.
RowVector population_std(const Matrix& x) {
  RowVector out(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    double mean = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) mean += x(i, j);
    mean /= static_cast<double>(x.rows());
    double ss = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) ss += (x(i, j) - mean) * (x(i, j) - mean);
    out[j] = std::sqrt(ss / static_cast<double>(x.rows()));
  }
  return out;
}

}  // namespace

TEST_SUITE("normalization") {
  TEST_CASE("global bounds span every split of every chunk") {
    std::vector<FeatureMatrix> parts = {labelled(column({0.0})), labelled(column({10.0})),
                                        labelled(column({5.0})), labelled(column({20.0}))};
    auto b = global_fit(parts);
    CHECK(b.min[0] == 0.0);
    CHECK(b.max[0] == 20.0);
    Matrix y = minmax_transform(column({0.0, 5.0, 20.0, 30.0}), b);
    CHECK(y(1, 0) == 0.25);
    CHECK(y(2, 0) == 1.0);
    CHECK(y(3, 0) == 1.5);  // no clipping
  }

  TEST_CASE("constant column maps to zero") {
    Matrix x(3, 2);
    x << 4, 1, 4, 2, 4, 3;
    auto b = column_bounds(x);
    Matrix y = minmax_transform(x, b);
    CHECK(y.col(0).isZero());
    CHECK(y(2, 1) == 1.0);
  }

  TEST_CASE("local normalization uses the chunk's own bounds") {
    MinMaxBounds b;
    Matrix y = local_update_transform(b, column({3.0, 6.0, 9.0}));
    CHECK(y(0, 0) == 0.0);
    CHECK(y(1, 0) == 0.5);
    CHECK(y(2, 0) == 1.0);
  }

  TEST_CASE("local normalization maps one raw value differently across chunks") {
    LocalNormalizer n(1, kDefaultEpsilonDen);
    n.update(column({0.0, 10.0}));
    CHECK(n.transform(column({5.0}))(0, 0) == 0.5);
    n.update(column({5.0, 15.0}));
    CHECK(n.transform(column({5.0}))(0, 0) == 0.0);
    CHECK(n.transform(column({25.0}))(0, 0) == 2.0);
  }

  TEST_CASE("cn with lambda one tracks the latest chunk exactly") {
    std::mt19937_64 rng(4);
    ContinualNormalizer n(3, 1.0, 1e-8);
    n.update(random_matrix(rng, 50, 3));
    Matrix chunk = random_matrix(rng, 40, 3, 2.0, 5.0);
    n.update(chunk);
    const RowVector mean = chunk.colwise().mean();
    const RowVector sd = population_std(chunk);
    for (Eigen::Index j = 0; j < 3; ++j) {
      CHECK(n.state().mean[j] == doctest::Approx(mean[j]).epsilon(1e-13));
      CHECK(n.state().stddev[j] == doctest::Approx(sd[j]).epsilon(1e-12));
    }
    Matrix z = n.transform(chunk);
    CHECK(z.colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("cn moving average: mean 0 towards a chunk of 10 with lambda 0.1") {
    CnState s;
    s.lambda = 0.1;
    s.mean = RowVector::Zero(1);
    s.stddev = RowVector::Ones(1);
    s.initialized = true;
    cn_update(s, column({10.0, 10.0, 10.0}));
    CHECK(s.mean[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.stddev[0] == doctest::Approx(0.9).epsilon(1e-15));
  }

  TEST_CASE("cn bootstraps on the first chunk and refuses use before it") {
    ContinualNormalizer n(1, 0.1, 1e-8);
    CHECK_THROWS_AS(n.transform(column({1.0})), ContractError);
    n.update(column({2.0, 4.0}));
    CHECK(n.state().mean[0] == 3.0);
    CHECK(n.state().stddev[0] == 1.0);
    CHECK(n.transform(column({5.0}))(0, 0) == doctest::Approx(2.0 / (1.0 + 1e-8)));
  }

  TEST_CASE("clean starts at [0, 1] bounds with identity scaling") {
    CleanNormalizer n(2, 0.9, kDefaultEpsilonDen);
    Matrix x(1, 2);
    x << 0.25, 3.0;
    CHECK(n.transform(x) == x);
    CHECK(n.version() == 0);
  }

  TEST_CASE("clean eta extremes") {
    std::mt19937_64 rng(5);
    Matrix chunk = random_matrix(rng, 30, 2, -3.0, 7.0);
    auto frozen = CleanState::initial(2, 1.0);
    clean_update(frozen, chunk);
    CHECK(frozen.estimated_max == RowVector::Ones(2));
    CHECK(frozen.estimated_min == RowVector::Zero(2));

    auto replaced = CleanState::initial(2, 0.0);
    clean_update(replaced, chunk);
    CHECK(replaced.estimated_max == chunk.colwise().maxCoeff());
    CHECK(replaced.estimated_min == chunk.colwise().minCoeff());
  }

  TEST_CASE("clean with eta zero equals local normalization") {
    std::mt19937_64 rng(6);
    CleanNormalizer clean(3, 0.0, kDefaultEpsilonDen);
    LocalNormalizer local(3, kDefaultEpsilonDen);
    for (int t = 0; t < 4; ++t) {
      Matrix chunk = random_matrix(rng, 25, 3, -10.0 * t, 10.0 * (t + 1));
      clean.update(chunk);
      local.update(chunk);
      Matrix probe = random_matrix(rng, 10, 3, -50.0, 50.0);
      CHECK((clean.transform(probe) - local.transform(probe)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("clean bound estimate: 10 towards 20 with eta 0.9 gives 11") {
    auto s = CleanState::initial(1, 0.9);
    s.estimated_max[0] = 10.0;
    s.estimated_min[0] = 0.0;
    clean_update(s, column({0.0, 20.0}));
    CHECK(s.estimated_max[0] == doctest::Approx(11.0).epsilon(1e-15));
    CHECK(s.estimated_min[0] == 0.0);
  }

  TEST_CASE("clean transform is feature-wise") {
    std::mt19937_64 rng(7);
    CleanNormalizer n(4, 0.9, kDefaultEpsilonDen);
    n.update(random_matrix(rng, 20, 4, 0.0, 50.0));
    n.state().scaling.weight << 1.5, -0.5, 2.0, 0.1;
    n.state().scaling.bias << 0.1, 0.2, -0.3, 0.0;
    Matrix x = random_matrix(rng, 5, 4, 0.0, 50.0);
    Matrix base = n.transform(x);
    for (Eigen::Index j = 0; j < 4; ++j) {
      Matrix moved = x;
      moved.col(j).array() += 17.0;
      Matrix out = n.transform(moved);
      for (Eigen::Index k = 0; k < 4; ++k) {
        if (k == j) CHECK_FALSE(out.col(k) == base.col(k));
        else CHECK(out.col(k) == base.col(k));
      }
    }
  }

  TEST_CASE("every normalizer is feature-wise") {
    std::mt19937_64 rng(8);
    for (auto kind : {NormalizerKind::local, NormalizerKind::cn, NormalizerKind::clean}) {
      auto n = make_normalizer(kind, 3);
      n->update(random_matrix(rng, 15, 3, -2.0, 9.0));
      Matrix x = random_matrix(rng, 4, 3);
      Matrix moved = x;
      moved.col(1).array() *= 3.0;
      Matrix a = n->transform(x), b = n->transform(moved);
      CHECK(a.col(0) == b.col(0));
      CHECK(a.col(2) == b.col(2));
    }
  }

  TEST_CASE("version counts updates and global needs a fit") {
    GlobalNormalizer g(1, kDefaultEpsilonDen);
    CHECK_THROWS_AS(g.transform(column({1.0})), ContractError);
    MinMaxBounds b{RowVector::Constant(1, 2.0), RowVector::Constant(1, 4.0)};
    g.fit(b);
    g.update(column({100.0}));
    CHECK(g.version() == 1);
    CHECK(g.bounds().max[0] == 4.0);  // updates never change the oracle
    CHECK(g.transform(column({3.0}))(0, 0) == 0.5);
    CHECK_THROWS_AS(g.transform(Matrix::Zero(1, 2)), ShapeError);
  }

  TEST_CASE("state survives a save/load round trip bit for bit") {
    std::mt19937_64 rng(9);
    for (auto kind : {NormalizerKind::local, NormalizerKind::cn, NormalizerKind::clean}) {
      auto a = make_normalizer(kind, 2);
      a->update(random_matrix(rng, 12, 2, 0.0, 30.0));
      a->update(random_matrix(rng, 12, 2, 0.0, 90.0));
      std::stringstream buf;
      BinaryWriter w(buf);
      a->save(w);
      auto b = make_normalizer(kind, 2);
      BinaryReader r(buf);
      b->load(r);
      CHECK(b->version() == a->version());
      Matrix x = random_matrix(rng, 6, 2, 0.0, 100.0);
      CHECK(a->transform(x) == b->transform(x));
    }
  }

  TEST_CASE("names parse and unknown names are config errors") {
    CHECK(parse_normalizer_kind("clean") == NormalizerKind::clean);
    CHECK(to_string(NormalizerKind::cn) == "cn");
    CHECK_THROWS_AS(parse_normalizer_kind("zscore"), ConfigError);
    CHECK_THROWS_AS(CleanNormalizer(1, 1.5, 1e-8), ConfigError);
  }
}
