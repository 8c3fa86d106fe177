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

#include "core/types.hpp"

namespace tabcl {

// Splits `data` into contiguous, order-preserving chunks of `chunk_size`
// rows. A trailing partial chunk is kept when it has at least two rows
// (unless `drop_partial`). Each chunk is split sequentially: the first
// floor(split_ratio * rows) rows train, the remainder test. The train part
// always keeps at least one row and the test part at least one row.
ExperienceStream chunk_stream(const FeatureMatrix& data, std::size_t chunk_size, double split_ratio,
                              bool drop_partial = false);

// Number of rows assigned to the train split of a chunk with `rows` rows.
std::size_t train_rows_for(std::size_t rows, double split_ratio);

struct DriftConfig {
  std::size_t n_experiences = 6;
  std::size_t rows_per_experience = 20000;
  std::size_t n_features = 20;
  std::size_t scale_jump_at = 3;
  double scale_factor = 100.0;
  double class_balance = 0.3;  // fraction of attack rows
  std::uint64_t seed = 1;

  void validate() const;
};

// Rows of every experience drawn from fixed per-class Gaussian clusters; from
// experience `scale_jump_at` on, every value is multiplied by `scale_factor`.
// Bit-reproducible for a given seed.
FeatureMatrix generate_drift_matrix(const DriftConfig& cfg);
ExperienceStream generate_drift_stream(const DriftConfig& cfg, double split_ratio = 0.8);

}  // namespace tabcl
