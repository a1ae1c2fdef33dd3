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

#ifndef SDCI_IO_DIAGNOSTICS_HPP
#define SDCI_IO_DIAGNOSTICS_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <sdci/io/csv.hpp>
#include <sdci/sequential.hpp>

namespace sdci::io {

/// Columns: window, q_used, expected_ratio, kl_dci, eff_fraction, decision, change_point_flag, mud_0, ...
[[nodiscard]] CsvTable diagnostics_table(const std::vector<WindowRecord>& records);

/// Columns: window, attempt, q, sample_count, expected_ratio, kl_dci, action, failure.
[[nodiscard]] CsvTable attempts_table(const std::vector<WindowRecord>& records);

/// \throws std::invalid_argument for an empty record list, IoError on write failure.
void write_diagnostics(const std::vector<WindowRecord>& records, const std::filesystem::path& path);
void write_attempts(const std::vector<WindowRecord>& records, const std::filesystem::path& path);

}  // namespace sdci::io

#endif
