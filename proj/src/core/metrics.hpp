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
#include <optional>
#include <span>
#include <vector>

#include "core/types.hpp"

namespace tabcl {

// Lower-triangular table of per-cell results: cell (t, t') holds the metric
// of the model after experience t on the test split of experience t' <= t.
// Experience indices are 0-based.
class MetricTable {
 public:
  explicit MetricTable(std::size_t experiences = 0);

  std::size_t experiences() const { return size_; }
  void resize(std::size_t experiences);

  void set(std::size_t t, std::size_t t_prime, double value, std::size_t count = 0);
  void clear(std::size_t t, std::size_t t_prime);
  bool has(std::size_t t, std::size_t t_prime) const;
  std::optional<double> get(std::size_t t, std::size_t t_prime) const;
  // Throws ContractError naming (t, t') when the cell is absent.
  double at(std::size_t t, std::size_t t_prime) const;
  std::size_t count(std::size_t t, std::size_t t_prime) const;

 private:
  std::size_t index(std::size_t t, std::size_t t_prime) const;

  std::size_t size_ = 0;
  std::vector<std::optional<double>> cells_;
  std::vector<std::size_t> counts_;
};

using AccuracyMatrix = MetricTable;

struct ScoredPredictions {
  std::vector<double> scores;
  Labels labels;
};

// Fraction of exact matches.
double accuracy(std::span<const Label> predictions, std::span<const Label> labels);
Labels threshold_all(std::span<const double> probs, double kappa);

// Mean of row t.
double average_accuracy(const AccuracyMatrix& m, std::size_t t);

// max_{t' <= s < t} a[s][t'] - a[t][t']; negative values mean the later model
// got better on t'.
double forgetting(const AccuracyMatrix& m, std::size_t t, std::size_t t_prime);

// Mean forgetting over t' < t; absent for the first experience.
std::optional<double> average_forgetting(const AccuracyMatrix& m, std::size_t t);

// Mean of the present cells of row t; absent if none.
std::optional<double> average_present(const MetricTable& m, std::size_t t);

// Mann-Whitney AUROC with midranks for ties. Absent when only one class is
// present.
std::optional<double> auroc(std::span<const double> scores, std::span<const Label> labels);
inline std::optional<double> auroc(const ScoredPredictions& sp) { return auroc(sp.scores, sp.labels); }

}  // namespace tabcl
