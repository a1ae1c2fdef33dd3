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

#ifndef SDCI_EXPERIMENT_CONFIG_HPP
#define SDCI_EXPERIMENT_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include <sdci/density.hpp>
#include <sdci/models/seirs.hpp>
#include <sdci/qoi.hpp>
#include <sdci/sequential.hpp>

namespace sdci::experiment {

enum class ModelKind { linear, seirs, heat, offline };

[[nodiscard]] std::string to_string(ModelKind kind);
/// \throws ConfigError for unknown names.
[[nodiscard]] ModelKind model_from_string(const std::string& name);

struct Seeds {
  std::uint64_t truth{1};
  std::uint64_t noise{2};
  std::uint64_t sensors{3};
  std::uint64_t engine{4};
};

struct LinearSettings {
  int parameters{2};
  int sensors{20};
  std::uint64_t matrix_seed{11};
  /// Drawn from the initial density with the truth seed when absent.
  std::optional<Eigen::VectorXd> truth;
  /// Rows of a synthetic ensemble store written next to the packets (0 = none).
  int store_size{0};
};

struct SeirsSettings {
  double dt{0.1};
  /// Days between readings.
  double cadence{1.0};
  models::SeirsState initial_state{0.98, 0.01, 0.01, 0.0};
  models::ShiftSchedule schedule{models::reference_schedule()};
  int compartment{2};
  models::SeirsModel::Carry carry{models::SeirsModel::Carry::per_sample};
};

struct HeatSettings {
  int cells{64};
  double dt{0.0025};
  int terms{10};
  double mean_log{0.0};
  double marginal_std{0.2};
  double correlation_length{0.1};
  int sensors{500};
  double cadence{0.05};
  /// Drawn from N(0, 1) with the truth seed when absent.
  std::optional<Eigen::VectorXd> truth;
};

struct OfflineSettings {
  std::filesystem::path store;
  std::filesystem::path packets;
};

/**
 * A complete, reproducible experiment description.
 *
 * Built from JSON: user fields are merged over the per-model defaults; unknown fields are
 * rejected. `resolved` holds the merged document.
 */
struct ExperimentConfig {
  ModelKind model{ModelKind::seirs};
  std::filesystem::path output_dir{"results"};
  double window_length{14.0};
  double horizon{364.0};
  double t0{0.0};
  Eigen::Index ensemble_size{1000};
  double noise_sigma{0.005};
  bool noiseless{false};
  Thresholds thresholds;
  DriftResponse drift_response{DriftResponse::resample};
  std::optional<ParameterDensity> initial;
  std::optional<Box> support;
  PcaCentering centering{PcaCentering::column_mean};
  Seeds seeds;
  LinearSettings linear;
  SeirsSettings seirs;
  HeatSettings heat;
  OfflineSettings offline;
  nlohmann::json resolved;

  /// Short hash of `resolved` without output_dir, stored in checkpoints.
  [[nodiscard]] std::string fingerprint() const;
};

/// Every field with its default value for one model.
[[nodiscard]] nlohmann::json default_config_json(ModelKind model);

/// \throws ConfigError naming the field path ("thresholds.eps_pred: ...").
[[nodiscard]] ExperimentConfig config_from_json(const nlohmann::json& user);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace sdci::experiment

#endif
