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

#ifndef SDCI_IO_CSV_HPP
#define SDCI_IO_CSV_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sdci::io {

/// Shortest "%.17g" rendering; non-finite values print as nan, inf, -inf.
[[nodiscard]] std::string format_double(double value);

/// Parses a number written by format_double. \throws std::invalid_argument on junk.
[[nodiscard]] double parse_double(const std::string& text);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Comma-separated, no quoting (fields must not contain commas or newlines).
[[nodiscard]] CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Numeric table with a header row.
[[nodiscard]] Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path, std::vector<std::string>* header = nullptr);
void write_matrix_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const Eigen::MatrixXd& values);

}  // namespace sdci::io

#endif
