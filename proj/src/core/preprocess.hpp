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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "core/csv.hpp"
#include "core/types.hpp"

namespace tabcl {

// Assigns integer codes to category strings in first-seen order. Codes are
// never reassigned, so categories that first appear late in a stream simply
// receive the next free code.
class StreamingLabelEncoder {
 public:
  std::int64_t encode(std::string_view category);
  std::optional<std::int64_t> lookup(std::string_view category) const;
  std::size_t size() const { return mapping_.size(); }
  std::int64_t next_code() const { return next_code_; }

 private:
  std::unordered_map<std::string, std::int64_t> mapping_;
  std::int64_t next_code_ = 0;
};

struct TabularDataset {
  FeatureMatrix data;
  std::vector<std::string> feature_names;
  std::size_t dropped_rows = 0;
};

struct UnswOptions {
  std::string label_column = "label";
  // When non-empty the files have no header row and these are the column
  // names, in order.
  std::vector<std::string> column_names;
  // Extra columns to discard before encoding (matched case-insensitively).
  std::vector<std::string> drop_columns;
};

struct CicidsOptions {
  std::string label_column = "label";
  std::vector<std::string> column_names;  // as in UnswOptions
};

// The 49 columns of the headerless UNSW-NB15 CSV files, in file order.
const std::vector<std::string>& unsw_column_names();

// Column names treated as categorical in UNSW-NB15.
const std::vector<std::string>& unsw_categorical_columns();
// Columns of CICIDS-2017 that are constant over the whole reference dataset.
const std::vector<std::string>& cicids_constant_columns();

// srcip/dstip become four octet columns each; proto, state, service, sport,
// dsport, ct_ftp_cmd and attack_cat are label-encoded; every other column is
// parsed as a number (a blank numeric cell reads as 0). Row order is kept.
TabularDataset preprocess_unsw(const RawTable& raw, const UnswOptions& options = {});
TabularDataset preprocess_unsw_file(const std::filesystem::path& path,
                                    const UnswOptions& options = {});
// Several files read back to back as one table; every file must have the
// same columns.
TabularDataset preprocess_unsw_files(const std::vector<std::filesystem::path>& paths,
                                     const UnswOptions& options = {});

// Drops the listed constant columns and any other column that is constant
// over the retained rows, and discards rows holding a missing or infinite
// value.
TabularDataset preprocess_cicids(const RawTable& raw, const CicidsOptions& options = {});
TabularDataset preprocess_cicids_file(const std::filesystem::path& path,
                                      const CicidsOptions& options = {});
TabularDataset preprocess_cicids_files(const std::vector<std::filesystem::path>& paths,
                                       const CicidsOptions& options = {});

// "0"/"1" (or any number, nonzero = attack), "benign"/"normal" = 0, any other
// non-empty string = 1. Returns nullopt for a missing cell.
std::optional<Label> parse_binary_label(std::string_view cell);

// Four dot-separated integers in 0..255. Throws IngestError naming the row
// (1-based data row) and column on malformed input.
std::array<int, 4> parse_ipv4(std::string_view text, std::size_t row, std::string_view column);

}  // namespace tabcl
