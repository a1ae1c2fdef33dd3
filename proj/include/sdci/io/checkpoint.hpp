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

#ifndef SDCI_IO_CHECKPOINT_HPP
#define SDCI_IO_CHECKPOINT_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include <sdci/density.hpp>
#include <sdci/sequential.hpp>

namespace sdci::io {

inline constexpr int kCheckpointVersion = 1;

/// Everything needed to resume a packet loop after the last completed window.
struct Checkpoint {
  EngineState state;
  nlohmann::json model_state;
  std::vector<WindowRecord> records;
  /// Caller-defined identity of the run configuration; checked on resume.
  std::string fingerprint;
};

// JSON codecs. Non-finite numbers are stored as the strings "nan", "inf", "-inf".
[[nodiscard]] nlohmann::json to_json(const Eigen::MatrixXd& m);
[[nodiscard]] nlohmann::json to_json(const Eigen::VectorXd& v);
[[nodiscard]] nlohmann::json to_json(const ParameterDensity& density);
[[nodiscard]] nlohmann::json to_json(const WindowRecord& record);
[[nodiscard]] nlohmann::json to_json(const EngineState& state);
[[nodiscard]] Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);
[[nodiscard]] Eigen::VectorXd vector_from_json(const nlohmann::json& j);
[[nodiscard]] ParameterDensity density_from_json(const nlohmann::json& j);
[[nodiscard]] WindowRecord record_from_json(const nlohmann::json& j);
[[nodiscard]] EngineState state_from_json(const nlohmann::json& j);

[[nodiscard]] std::string checkpoint_text(const Checkpoint& checkpoint);

/// Writes to a sibling temporary file, then renames over `path`.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

/// \throws IncompatibleCheckpoint on a version mismatch, truncation or missing fields.
[[nodiscard]] Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace sdci::io

#endif
