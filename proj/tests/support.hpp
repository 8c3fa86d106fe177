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

// Independent reference implementations used as test oracles. Nothing here
// calls into the code under test.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "core/types.hpp"

namespace tabcl::testing {

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = u(rng);
  }
  return m;
}

inline Labels random_labels(std::mt19937_64& rng, std::size_t n, double p = 0.5) {
  std::bernoulli_distribution b(p);
  Labels y(n);
  for (auto& v : y) v = b(rng) ? 1 : 0;
  return y;
}

inline FeatureMatrix random_features(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  return FeatureMatrix{random_matrix(rng, rows, cols), random_labels(rng, rows)};
}

// Fraction of (positive, negative) pairs ranked correctly, ties worth 1/2.
inline double pair_count_auroc(std::span<const double> scores, std::span<const Label> labels) {
  double wins = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

// a[t][t'] stored as a dense lower-triangular vector of rows.
using DenseTable = std::vector<std::vector<double>>;

inline double literal_average_accuracy(const DenseTable& a, std::size_t t) {
  double s = 0.0;
  for (std::size_t k = 0; k <= t; ++k) s += a[t][k];
  return s / static_cast<double>(t + 1);
}

inline double literal_forgetting(const DenseTable& a, std::size_t t, std::size_t tp) {
  double best = -1e300;
  for (std::size_t s = tp; s < t; ++s) best = std::max(best, a[s][tp]);
  return best - a[t][tp];
}

inline double literal_average_forgetting(const DenseTable& a, std::size_t t) {
  double s = 0.0;
  for (std::size_t k = 0; k < t; ++k) s += literal_forgetting(a, t, k);
  return s / static_cast<double>(t);
}

// Central differences of f at x, one coordinate at a time.
inline std::vector<double> finite_difference(const std::function<double(const std::vector<double>&)>& f,
                                             std::vector<double> x, double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor); the floor keeps entries
// that are zero up to rounding from dominating.
inline double max_relative_error(std::span<const double> a, std::span<const double> b,
                                 double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({floor, std::abs(a[i]), std::abs(b[i])});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

// Mean BCE from first principles (no clamping), for small hand-built nets.
inline double reference_bce(std::span<const double> probs, std::span<const Label> labels) {
  double s = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    s -= labels[i] ? std::log(probs[i]) : std::log(1.0 - probs[i]);
  }
  return s / static_cast<double>(probs.size());
}

}  // namespace tabcl::testing
