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

#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "core/error.hpp"
#include "core/mlp.hpp"

namespace tabcl {

namespace {
std::string cell_name(std::size_t t, std::size_t t_prime) {
  return "(" + std::to_string(t) + ", " + std::to_string(t_prime) + ")";
}
}  // namespace

MetricTable::MetricTable(std::size_t experiences) { resize(experiences); }

void MetricTable::resize(std::size_t experiences) {
  std::vector<std::optional<double>> cells(experiences * experiences);
  std::vector<std::size_t> counts(experiences * experiences, 0);
  const std::size_t keep = std::min(size_, experiences);
  for (std::size_t t = 0; t < keep; ++t) {
    for (std::size_t s = 0; s <= t; ++s) {
      cells[t * experiences + s] = cells_[index(t, s)];
      counts[t * experiences + s] = counts_[index(t, s)];
    }
  }
  size_ = experiences;
  cells_ = std::move(cells);
  counts_ = std::move(counts);
}

std::size_t MetricTable::index(std::size_t t, std::size_t t_prime) const {
  if (t >= size_ || t_prime > t) {
    throw ContractError("metric cell " + cell_name(t, t_prime) + " outside the lower triangle of a " +
                        std::to_string(size_) + "-experience table");
  }
  return t * size_ + t_prime;
}

void MetricTable::set(std::size_t t, std::size_t t_prime, double value, std::size_t count) {
  const std::size_t i = index(t, t_prime);
  cells_[i] = value;
  counts_[i] = count;
}

void MetricTable::clear(std::size_t t, std::size_t t_prime) {
  const std::size_t i = index(t, t_prime);
  cells_[i].reset();
  counts_[i] = 0;
}

bool MetricTable::has(std::size_t t, std::size_t t_prime) const {
  return t < size_ && t_prime <= t && cells_[t * size_ + t_prime].has_value();
}

std::optional<double> MetricTable::get(std::size_t t, std::size_t t_prime) const {
  return cells_[index(t, t_prime)];
}

double MetricTable::at(std::size_t t, std::size_t t_prime) const {
  const auto& cell = cells_[index(t, t_prime)];
  if (!cell) throw ContractError("metric cell " + cell_name(t, t_prime) + " is missing");
  return *cell;
}

std::size_t MetricTable::count(std::size_t t, std::size_t t_prime) const {
  return counts_[index(t, t_prime)];
}

double accuracy(std::span<const Label> predictions, std::span<const Label> labels) {
  if (predictions.size() != labels.size()) {
    throw ShapeError("accuracy: " + std::to_string(predictions.size()) + " predictions vs " +
                     std::to_string(labels.size()) + " labels");
  }
  if (labels.empty()) throw ContractError("accuracy: empty input");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += predictions[i] == labels[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

Labels threshold_all(std::span<const double> probs, double kappa) {
  Labels out(probs.size());
  std::transform(probs.begin(), probs.end(), out.begin(),
                 [kappa](double p) { return threshold(p, kappa); });
  return out;
}

double average_accuracy(const AccuracyMatrix& m, std::size_t t) {
  double sum = 0.0;
  for (std::size_t s = 0; s <= t; ++s) sum += m.at(t, s);
  return sum / static_cast<double>(t + 1);
}

double forgetting(const AccuracyMatrix& m, std::size_t t, std::size_t t_prime) {
  if (t_prime >= t) {
    throw ContractError("forgetting: requires t' < t, got " + cell_name(t, t_prime));
  }
  double best = m.at(t_prime, t_prime);
  for (std::size_t s = t_prime + 1; s < t; ++s) best = std::max(best, m.at(s, t_prime));
  return best - m.at(t, t_prime);
}

std::optional<double> average_forgetting(const AccuracyMatrix& m, std::size_t t) {
  if (t == 0) return std::nullopt;
  double sum = 0.0;
  for (std::size_t s = 0; s < t; ++s) sum += forgetting(m, t, s);
  return sum / static_cast<double>(t);
}

std::optional<double> average_present(const MetricTable& m, std::size_t t) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t s = 0; s <= t; ++s) {
    if (auto v = m.get(t, s)) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::optional<double> auroc(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) {
    throw ShapeError("auroc: " + std::to_string(scores.size()) + " scores vs " +
                     std::to_string(labels.size()) + " labels");
  }
  const std::size_t n = scores.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(scores[i])) throw NumericError("auroc: score " + std::to_string(i) + " is NaN");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of (1-based) midranks of the positives.
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] != 0) {
        positive_rank_sum += midrank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) return std::nullopt;
  const double p = static_cast<double>(positives);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

}  // namespace tabcl
