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

#include "core/csv.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>

#include "core/error.hpp"

namespace tabcl {

std::string_view trim(std::string_view s) {
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_missing_cell(std::string_view cell) {
  const std::string v = to_lower(trim(cell));
  return v.empty() || v == "nan" || v == "infinity" || v == "-infinity";
}

std::optional<std::size_t> RawTable::find_column(std::string_view name) const {
  const std::string wanted = to_lower(trim(name));
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (to_lower(trim(header[i])) == wanted) return i;
  }
  return std::nullopt;
}

bool CsvReader::next(std::vector<std::string>& fields) {
  fields.clear();
  if (!std::getline(in_, buffer_)) return false;
  ++physical_line_;
  line_ = physical_line_;

  std::string field;
  bool in_quotes = false;
  for (;;) {
    if (!buffer_.empty() && buffer_.back() == '\r') buffer_.pop_back();
    for (std::size_t i = 0; i < buffer_.size(); ++i) {
      const char c = buffer_[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < buffer_.size() && buffer_[i + 1] == '"') {
            field.push_back('"');
            ++i;
          } else {
            in_quotes = false;
          }
        } else {
          field.push_back(c);
        }
      } else if (c == '"') {
        in_quotes = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
      } else {
        field.push_back(c);
      }
    }
    if (!in_quotes) break;
    // Quoted field spans a line break.
    if (!std::getline(in_, buffer_)) {
      throw IngestError("unterminated quoted field starting on line " + std::to_string(line_));
    }
    ++physical_line_;
    field.push_back('\n');
  }
  fields.push_back(std::move(field));
  return true;
}

RawTable read_csv(std::istream& in) {
  RawTable table;
  CsvReader reader(in);
  if (!reader.next(table.header)) throw IngestError("CSV input is empty (no header row)");
  // Strip a UTF-8 byte order mark from the first header cell.
  if (!table.header.empty() && table.header[0].rfind("\xEF\xBB\xBF", 0) == 0) {
    table.header[0].erase(0, 3);
  }
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;  // blank line
    if (fields.size() != table.header.size()) {
      throw IngestError("line " + std::to_string(reader.line()) + ": expected " +
                        std::to_string(table.header.size()) + " fields, found " +
                        std::to_string(fields.size()));
    }
    table.rows.push_back(fields);
  }
  return table;
}

RawTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_csv(in);
}

}  // namespace tabcl
