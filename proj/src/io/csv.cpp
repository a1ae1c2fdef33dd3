// Copyright 2026 The sdci Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sdci/io/csv.hpp>

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <sdci/errors.hpp>

namespace sdci::io {

std::string format_double(double value) {
  if (std::isnan(value)) {
    return "nan";
  }
  if (std::isinf(value)) {
    return value > 0 ? "inf" : "-inf";
  }
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

double parse_double(const std::string& text) {
  if (text == "nan") {
    return std::nan("");
  }
  if (text == "inf") {
    return HUGE_VAL;
  }
  if (text == "-inf") {
    return -HUGE_VAL;
  }
  // strtod keeps subnormals (std::stod rejects them as out of range).
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (text.empty() || std::isspace(static_cast<unsigned char>(text[0])) || end != text.c_str() + text.size()) {
    throw std::invalid_argument("not a number: '" + text + "'");
  }
  return value;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in{line};
  while (std::getline(in, field, ',')) {
    out.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    out.emplace_back();
  }
  return out;
}

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t j = 0; j < fields.size(); ++j) {
    if (j > 0) {
      out += ',';
    }
    out += fields[j];
  }
  return out;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in{path};
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  CsvTable table;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    auto fields = split(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw ParseError(number, path.string() + ": expected " + std::to_string(table.header.size()) + " fields, got " +
                                   std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (table.header.empty()) {
    throw ParseError(number, path.string() + ": missing header row");
  }
  return table;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out{path, std::ios::binary | std::ios::trunc};
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << join(table.header) << '\n';
  for (const auto& row : table.rows) {
    out << join(row) << '\n';
  }
  out.flush();
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path, std::vector<std::string>* header) {
  const CsvTable table = read_csv(path);
  Eigen::MatrixXd values(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (std::size_t j = 0; j < table.header.size(); ++j) {
      try {
        values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = parse_double(table.rows[i][j]);
      } catch (const std::exception&) {
        throw ParseError(i + 2, path.string() + ": column '" + table.header[j] + "' is not numeric");
      }
    }
  }
  if (header != nullptr) {
    *header = table.header;
  }
  return values;
}

void write_matrix_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const Eigen::MatrixXd& values) {
  if (static_cast<Eigen::Index>(header.size()) != values.cols()) {
    throw DimensionMismatch("header has " + std::to_string(header.size()) + " names for " +
                            std::to_string(values.cols()) + " columns");
  }
  CsvTable table;
  table.header = header;
  table.rows.reserve(static_cast<std::size_t>(values.rows()));
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    std::vector<std::string> row;
    row.reserve(header.size());
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      row.push_back(format_double(values(i, j)));
    }
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

}  // namespace sdci::io
