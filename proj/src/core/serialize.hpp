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

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "core/types.hpp"

namespace tabcl {

// Little-endian binary encoding for snapshots. Doubles are written as their
// IEEE-754 bit patterns so a save/load round trip is bit-exact.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void u8(std::uint8_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void str(const std::string& s);
  void doubles(const std::vector<double>& v);
  void matrix(const Matrix& m);
  void row_vector(const RowVector& v);
  void labels(const Labels& l);
  void generator(const std::mt19937_64& rng);

 private:
  void raw(const void* data, std::size_t size);
  std::ostream& out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::istream& in) : in_(in) {}

  std::uint8_t u8();
  std::uint64_t u64();
  double f64();
  std::string str();
  std::vector<double> doubles();
  Matrix matrix();
  RowVector row_vector();
  Labels labels();
  void generator(std::mt19937_64& rng);

 private:
  void raw(void* data, std::size_t size);
  std::istream& in_;
};

}  // namespace tabcl
