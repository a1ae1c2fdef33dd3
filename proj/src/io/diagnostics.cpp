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

#include <sdci/io/diagnostics.hpp>

#include <algorithm>
#include <stdexcept>

namespace sdci::io {

CsvTable diagnostics_table(const std::vector<WindowRecord>& records) {
  Eigen::Index p = 0;
  for (const auto& r : records) {
    p = std::max(p, r.mud_point.size());
  }
  CsvTable table;
  table.header = {"window", "q_used", "expected_ratio", "kl_dci", "eff_fraction", "decision", "change_point_flag"};
  for (Eigen::Index j = 0; j < p; ++j) {
    table.header.push_back("mud_" + std::to_string(j));
  }
  for (const auto& r : records) {
    std::vector<std::string> row{std::to_string(r.window_index),
                                 std::to_string(r.q_used),
                                 format_double(r.expected_ratio),
                                 format_double(r.kl_dci),
                                 format_double(r.eff_fraction),
                                 std::string{to_string(r.decision)},
                                 r.change_point_flag ? "1" : "0"};
    for (Eigen::Index j = 0; j < p; ++j) {
      row.push_back(j < r.mud_point.size() ? format_double(r.mud_point(j)) : "nan");
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable attempts_table(const std::vector<WindowRecord>& records) {
  CsvTable table;
  table.header = {"window", "attempt", "q", "sample_count", "expected_ratio", "kl_dci", "action", "failure"};
  for (const auto& r : records) {
    for (std::size_t a = 0; a < r.attempts.size(); ++a) {
      const Attempt& attempt = r.attempts[a];
      std::string failure = attempt.failure;
      std::replace(failure.begin(), failure.end(), ',', ';');
      std::replace(failure.begin(), failure.end(), '\n', ' ');
      table.rows.push_back({std::to_string(r.window_index), std::to_string(a + 1), std::to_string(attempt.q),
                            std::to_string(attempt.sample_count), format_double(attempt.expected_ratio),
                            format_double(attempt.kl_dci), std::string{to_string(attempt.action)}, failure});
    }
  }
  return table;
}

void write_diagnostics(const std::vector<WindowRecord>& records, const std::filesystem::path& path) {
  if (records.empty()) {
    throw std::invalid_argument("no window records to write");
  }
  write_csv(path, diagnostics_table(records));
}

void write_attempts(const std::vector<WindowRecord>& records, const std::filesystem::path& path) {
  if (records.empty()) {
    throw std::invalid_argument("no window records to write");
  }
  write_csv(path, attempts_table(records));
}

}  // namespace sdci::io
