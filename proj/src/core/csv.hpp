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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tabcl {

// A string-valued table as it comes out of a CSV file, header included.
struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Case-insensitive, whitespace-trimmed lookup.
  std::optional<std::size_t> find_column(std::string_view name) const;
};

// Streaming reader for comma-separated UTF-8 text. Handles double-quoted
// fields with embedded commas and doubled quotes; CRLF line endings are
// accepted.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  // Reads the next record into `fields`. Returns false at end of input.
  bool next(std::vector<std::string>& fields);

  // 1-based line number of the most recently returned record.
  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::string buffer_;
  std::size_t line_ = 0;
  std::size_t physical_line_ = 0;
};

RawTable read_csv(std::istream& in);
RawTable read_csv_file(const std::filesystem::path& path);

// Empty string, "NaN", "Infinity" and "-Infinity" (any case, surrounding
// whitespace ignored).
bool is_missing_cell(std::string_view cell);

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);

}  // namespace tabcl
