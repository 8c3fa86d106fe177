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

#include "core/serialize.hpp"

#include <bit>
#include <istream>
#include <ostream>
#include <sstream>

#include "core/error.hpp"

namespace tabcl {

static_assert(std::endian::native == std::endian::little,
              "snapshot encoding assumes a little-endian host");

namespace {
// Guards against allocating absurd sizes from a corrupt file.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 34;
}  // namespace

void BinaryWriter::raw(const void* data, std::size_t size) {
  out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out_) throw IoError("snapshot write failed");
}

void BinaryWriter::u8(std::uint8_t v) { raw(&v, 1); }
void BinaryWriter::u64(std::uint64_t v) { raw(&v, sizeof v); }
void BinaryWriter::f64(double v) { raw(&v, sizeof v); }

void BinaryWriter::str(const std::string& s) {
  u64(s.size());
  raw(s.data(), s.size());
}

void BinaryWriter::doubles(const std::vector<double>& v) {
  u64(v.size());
  raw(v.data(), v.size() * sizeof(double));
}

void BinaryWriter::matrix(const Matrix& m) {
  u64(static_cast<std::uint64_t>(m.rows()));
  u64(static_cast<std::uint64_t>(m.cols()));
  raw(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
}

void BinaryWriter::row_vector(const RowVector& v) {
  u64(static_cast<std::uint64_t>(v.size()));
  raw(v.data(), static_cast<std::size_t>(v.size()) * sizeof(double));
}

void BinaryWriter::labels(const Labels& l) {
  u64(l.size());
  raw(l.data(), l.size());
}

void BinaryWriter::generator(const std::mt19937_64& rng) {
  std::ostringstream text;
  text << rng;
  str(text.str());
}

void BinaryReader::raw(void* data, std::size_t size) {
  in_.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
  if (!in_) throw IoError("snapshot truncated");
}

std::uint8_t BinaryReader::u8() {
  std::uint8_t v = 0;
  raw(&v, 1);
  return v;
}

std::uint64_t BinaryReader::u64() {
  std::uint64_t v = 0;
  raw(&v, sizeof v);
  return v;
}

double BinaryReader::f64() {
  double v = 0;
  raw(&v, sizeof v);
  return v;
}

std::string BinaryReader::str() {
  const auto n = u64();
  if (n > kMaxElements) throw IoError("snapshot corrupt: string length");
  std::string s(n, '\0');
  raw(s.data(), n);
  return s;
}

std::vector<double> BinaryReader::doubles() {
  const auto n = u64();
  if (n > kMaxElements) throw IoError("snapshot corrupt: vector length");
  std::vector<double> v(n);
  raw(v.data(), n * sizeof(double));
  return v;
}

Matrix BinaryReader::matrix() {
  const auto r = u64();
  const auto c = u64();
  if (r > kMaxElements || c > kMaxElements || (c != 0 && r > kMaxElements / c)) {
    throw IoError("snapshot corrupt: matrix shape");
  }
  Matrix m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  raw(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
  return m;
}

RowVector BinaryReader::row_vector() {
  const auto n = u64();
  if (n > kMaxElements) throw IoError("snapshot corrupt: vector length");
  RowVector v(static_cast<Eigen::Index>(n));
  raw(v.data(), n * sizeof(double));
  return v;
}

Labels BinaryReader::labels() {
  const auto n = u64();
  if (n > kMaxElements) throw IoError("snapshot corrupt: label count");
  Labels l(n);
  raw(l.data(), n);
  return l;
}

void BinaryReader::generator(std::mt19937_64& rng) {
  std::istringstream text(str());
  text >> rng;
  if (!text) throw IoError("snapshot corrupt: generator state");
}

}  // namespace tabcl
