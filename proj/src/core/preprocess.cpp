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

#include "core/preprocess.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>

#include "core/error.hpp"

namespace tabcl {

std::int64_t StreamingLabelEncoder::encode(std::string_view category) {
  auto [it, inserted] = mapping_.try_emplace(std::string(category), next_code_);
  if (inserted) ++next_code_;
  return it->second;
}

std::optional<std::int64_t> StreamingLabelEncoder::lookup(std::string_view category) const {
  auto it = mapping_.find(std::string(category));
  if (it == mapping_.end()) return std::nullopt;
  return it->second;
}

const std::vector<std::string>& unsw_column_names() {
  static const std::vector<std::string> names = {
      "srcip",        "sport",          "dstip",           "dsport",        "proto",
      "state",        "dur",            "sbytes",          "dbytes",        "sttl",
      "dttl",         "sloss",          "dloss",           "service",       "Sload",
      "Dload",        "Spkts",          "Dpkts",           "swin",          "dwin",
      "stcpb",        "dtcpb",          "smeansz",         "dmeansz",       "trans_depth",
      "res_bdy_len",  "Sjit",           "Djit",            "Stime",         "Ltime",
      "Sintpkt",      "Dintpkt",        "tcprtt",          "synack",        "ackdat",
      "is_sm_ips_ports", "ct_state_ttl", "ct_flw_http_mthd", "is_ftp_login", "ct_ftp_cmd",
      "ct_srv_src",   "ct_srv_dst",     "ct_dst_ltm",      "ct_src_ltm",    "ct_src_dport_ltm",
      "ct_dst_sport_ltm", "ct_dst_src_ltm", "attack_cat",  "Label"};
  return names;
}

const std::vector<std::string>& unsw_categorical_columns() {
  static const std::vector<std::string> columns = {
      "proto", "state", "service", "sport", "dsport", "ct_ftp_cmd", "attack_cat"};
  return columns;
}

const std::vector<std::string>& cicids_constant_columns() {
  static const std::vector<std::string> columns = {
      "Bwd PSH Flags",        "Fwd URG Flags",        "Bwd URG Flags",
      "CWE Flag Count",       "Fwd Avg Bytes/Bulk",   "Fwd Avg Packets/Bulk",
      "Fwd Avg Bulk Rate",    "Bwd Avg Bytes/Bulk",   "Bwd Avg Packets/Bulk",
      "Bwd Avg Bulk Rate"};
  return columns;
}

namespace {

std::optional<double> parse_number(std::string_view cell) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (ec != std::errc() || ptr != end || cell.empty()) return std::nullopt;
  return value;
}

std::string row_col(std::size_t row, std::string_view column) {
  return "row " + std::to_string(row) + ", column '" + std::string(column) + "'";
}

bool name_in(std::string_view name, const std::vector<std::string>& list) {
  const std::string key = to_lower(trim(name));
  return std::any_of(list.begin(), list.end(),
                     [&](const std::string& s) { return to_lower(trim(s)) == key; });
}

std::size_t require_label_column(const std::vector<std::string>& header,
                                 const std::string& label_column) {
  RawTable probe;
  probe.header = header;
  auto idx = probe.find_column(label_column);
  if (!idx) throw IngestError("label column '" + label_column + "' not found in header");
  return *idx;
}

class UnswBuilder {
 public:
  UnswBuilder(const std::vector<std::string>& header, const UnswOptions& options)
      : header_(header), label_index_(require_label_column(header, options.label_column)) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == label_index_ || name_in(header[c], options.drop_columns)) continue;
      const std::string name = to_lower(trim(header[c]));
      Column col;
      col.source = c;
      if (name == "srcip" || name == "dstip") {
        col.kind = Column::Kind::ip;
        for (int k = 0; k < 4; ++k) names_.push_back(name + "_" + std::to_string(k));
      } else if (name_in(name, unsw_categorical_columns())) {
        col.kind = Column::Kind::categorical;
        col.encoder = std::make_unique<StreamingLabelEncoder>();
        names_.push_back(name);
      } else {
        col.kind = Column::Kind::numeric;
        names_.push_back(name);
      }
      columns_.push_back(std::move(col));
    }
  }

  void add(const std::vector<std::string>& fields, std::size_t row) {
    if (fields.size() != header_.size()) {
      throw IngestError("row " + std::to_string(row) + ": expected " +
                        std::to_string(header_.size()) + " fields, found " +
                        std::to_string(fields.size()));
    }
    auto label = parse_binary_label(fields[label_index_]);
    if (!label) throw IngestError(row_col(row, header_[label_index_]) + ": missing label");
    for (auto& col : columns_) {
      const std::string& cell = fields[col.source];
      switch (col.kind) {
        case Column::Kind::ip: {
          auto octets = parse_ipv4(cell, row, trim(header_[col.source]));
          for (int o : octets) values_.push_back(static_cast<double>(o));
          break;
        }
        case Column::Kind::categorical:
          values_.push_back(static_cast<double>(col.encoder->encode(trim(cell))));
          break;
        case Column::Kind::numeric: {
          if (trim(cell).empty()) {
            values_.push_back(0.0);
            break;
          }
          auto v = parse_number(cell);
          if (!v || !std::isfinite(*v)) {
            throw IngestError(row_col(row, trim(header_[col.source])) + ": not a finite number: '" +
                              cell + "'");
          }
          values_.push_back(*v);
          break;
        }
      }
    }
    labels_.push_back(*label);
  }

  TabularDataset finish() {
    TabularDataset out;
    const auto d = static_cast<Eigen::Index>(names_.size());
    const auto n = static_cast<Eigen::Index>(labels_.size());
    out.data.values = Eigen::Map<const Matrix>(values_.data(), n, d);
    out.data.labels = std::move(labels_);
    out.feature_names = std::move(names_);
    return out;
  }

 private:
  struct Column {
    enum class Kind { numeric, categorical, ip };
    Kind kind = Kind::numeric;
    std::size_t source = 0;
    std::unique_ptr<StreamingLabelEncoder> encoder;
  };

  std::vector<std::string> header_;
  std::size_t label_index_;
  std::vector<Column> columns_;
  std::vector<std::string> names_;
  std::vector<double> values_;
  Labels labels_;
};

class CicidsBuilder {
 public:
  CicidsBuilder(const std::vector<std::string>& header, const CicidsOptions& options)
      : header_(header), label_index_(require_label_column(header, options.label_column)) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == label_index_ || name_in(header[c], cicids_constant_columns())) continue;
      sources_.push_back(c);
      names_.emplace_back(trim(header[c]));
    }
  }

  void add(const std::vector<std::string>& fields, std::size_t row) {
    if (fields.size() != header_.size()) {
      throw IngestError("row " + std::to_string(row) + ": expected " +
                        std::to_string(header_.size()) + " fields, found " +
                        std::to_string(fields.size()));
    }
    auto label = parse_binary_label(fields[label_index_]);
    if (!label) {
      ++dropped_;
      return;
    }
    row_buffer_.clear();
    for (std::size_t c : sources_) {
      const std::string& cell = fields[c];
      if (is_missing_cell(cell)) {
        ++dropped_;
        return;
      }
      auto v = parse_number(cell);
      if (!v) {
        throw IngestError(row_col(row, trim(header_[c])) + ": not numeric: '" + cell + "'");
      }
      if (!std::isfinite(*v)) {  // "inf", "1e999" and the like
        ++dropped_;
        return;
      }
      row_buffer_.push_back(*v);
    }
    values_.insert(values_.end(), row_buffer_.begin(), row_buffer_.end());
    labels_.push_back(*label);
  }

  TabularDataset finish() {
    const auto d = static_cast<Eigen::Index>(sources_.size());
    const auto n = static_cast<Eigen::Index>(labels_.size());
    Eigen::Map<const Matrix> all(values_.data(), n, d);

    std::vector<Eigen::Index> keep;
    for (Eigen::Index c = 0; c < d; ++c) {
      if (n == 0 || all.col(c).maxCoeff() != all.col(c).minCoeff()) keep.push_back(c);
    }
    TabularDataset out;
    out.data.values.resize(n, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
      out.data.values.col(static_cast<Eigen::Index>(k)) = all.col(keep[k]);
      out.feature_names.push_back(names_[static_cast<std::size_t>(keep[k])]);
    }
    out.data.labels = std::move(labels_);
    out.dropped_rows = dropped_;
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::size_t label_index_;
  std::vector<std::size_t> sources_;
  std::vector<std::string> names_;
  std::vector<double> values_;
  std::vector<double> row_buffer_;
  Labels labels_;
  std::size_t dropped_ = 0;
};

template <typename Builder, typename Options>
TabularDataset build_from_table(const RawTable& raw, const Options& options) {
  Builder builder(raw.header, options);
  for (std::size_t r = 0; r < raw.rows.size(); ++r) builder.add(raw.rows[r], r + 1);
  return builder.finish();
}

template <typename Builder, typename Options>
TabularDataset build_from_files(const std::vector<std::filesystem::path>& paths,
                                const Options& options) {
  if (paths.empty()) throw IngestError("no input files");
  std::optional<Builder> builder;
  std::vector<std::string> first_header;
  std::size_t row = 0;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    CsvReader reader(in);
    std::vector<std::string> header = options.column_names;
    if (header.empty()) {
      if (!reader.next(header)) throw IngestError(path.string() + ": empty file");
      if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
    }
    if (!builder) {
      first_header = header;
      builder.emplace(header, options);
    } else if (header.size() != first_header.size()) {
      throw IngestError(path.string() + ": column count differs from " + paths.front().string());
    }
    std::vector<std::string> fields;
    while (reader.next(fields)) {
      if (fields.size() == 1 && trim(fields[0]).empty()) continue;
      builder->add(fields, ++row);
    }
  }
  return builder->finish();
}

}  // namespace

std::optional<Label> parse_binary_label(std::string_view cell) {
  if (is_missing_cell(cell)) return std::nullopt;
  if (auto v = parse_number(cell)) return static_cast<Label>(*v != 0.0 ? 1 : 0);
  const std::string s = to_lower(trim(cell));
  if (s == "benign" || s == "normal") return Label{0};
  return Label{1};
}

std::array<int, 4> parse_ipv4(std::string_view text, std::size_t row, std::string_view column) {
  auto fail = [&]() -> IngestError {
    return IngestError(row_col(row, column) + ": malformed IPv4 address '" + std::string(text) +
                       "'");
  };
  std::string_view rest = trim(text);
  std::array<int, 4> octets{};
  for (int k = 0; k < 4; ++k) {
    const auto dot = rest.find('.');
    if ((k < 3) == (dot == std::string_view::npos)) throw fail();
    std::string_view part = k < 3 ? rest.substr(0, dot) : rest;
    if (part.empty() || part.size() > 3) throw fail();
    int value = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc() || ptr != part.data() + part.size() || value < 0 || value > 255) {
      throw fail();
    }
    octets[static_cast<std::size_t>(k)] = value;
    if (k < 3) rest.remove_prefix(dot + 1);
  }
  return octets;
}

TabularDataset preprocess_unsw(const RawTable& raw, const UnswOptions& options) {
  return build_from_table<UnswBuilder>(raw, options);
}

TabularDataset preprocess_unsw_file(const std::filesystem::path& path, const UnswOptions& options) {
  return build_from_files<UnswBuilder>({path}, options);
}

TabularDataset preprocess_unsw_files(const std::vector<std::filesystem::path>& paths,
                                     const UnswOptions& options) {
  return build_from_files<UnswBuilder>(paths, options);
}

TabularDataset preprocess_cicids(const RawTable& raw, const CicidsOptions& options) {
  return build_from_table<CicidsBuilder>(raw, options);
}

TabularDataset preprocess_cicids_file(const std::filesystem::path& path,
                                      const CicidsOptions& options) {
  return build_from_files<CicidsBuilder>({path}, options);
}

TabularDataset preprocess_cicids_files(const std::vector<std::filesystem::path>& paths,
                                       const CicidsOptions& options) {
  return build_from_files<CicidsBuilder>(paths, options);
}

}  // namespace tabcl
