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

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace tabcl {

// Row-major so that one sample is one contiguous row, matching how rows are
// sliced into minibatches and stored in replay buffers.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

using Label = std::uint8_t;  // 0 = benign, 1 = attack
using Labels = std::vector<Label>;

struct FeatureMatrix {
  Matrix values;
  Labels labels;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t features() const { return static_cast<std::size_t>(values.cols()); }

  // Rows [begin, end) as an independent copy.
  FeatureMatrix slice(std::size_t begin, std::size_t end) const;
  // Rows listed in `indices`, in that order.
  FeatureMatrix gather(const std::vector<std::size_t>& indices) const;
};

struct Experience {
  FeatureMatrix train;
  FeatureMatrix test;
};

struct ExperienceStream {
  std::vector<Experience> chunks;
  std::size_t chunk_size = 0;
  // Set when the requested chunk size exceeded the number of rows and the
  // whole input became a single chunk.
  bool oversized_chunk = false;

  std::size_t size() const { return chunks.size(); }
  std::size_t features() const {
    return chunks.empty() ? 0 : chunks.front().train.features();
  }
};

}  // namespace tabcl
