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
#include <span>
#include <vector>

namespace tabcl {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamState() = default;
  AdamState(std::size_t parameters, const AdamOptions& options)
      : first_moment(parameters, 0.0), second_moment(parameters, 0.0), options(options) {}

  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::uint64_t step = 0;
  AdamOptions options;
};

// Bias-corrected Adam update of `params` in place. Throws NumericError
// naming the first non-finite gradient entry; nothing is modified then.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad);

}  // namespace tabcl
