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

#ifndef SDCI_EXPERIMENT_DRIVERS_HPP
#define SDCI_EXPERIMENT_DRIVERS_HPP

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <sdci/errors.hpp>
#include <sdci/experiment/config.hpp>
#include <sdci/forward_model.hpp>
#include <sdci/packet.hpp>
#include <sdci/sequential.hpp>

namespace sdci::experiment {

/// An engine or model error raised while processing a given window.
class WindowError : public Error {
 public:
  WindowError(int window, const std::string& what)
      : Error("window " + std::to_string(window) + ": " + what), window_{window} {}
  [[nodiscard]] int window() const noexcept { return window_; }

 private:
  int window_;
};

/// Files written by generate_truth, relative to the output directory.
inline constexpr const char* kPacketsFile = "packets.jsonl";
inline constexpr const char* kCleanPacketsFile = "truth_packets.jsonl";
inline constexpr const char* kTruthFile = "truth.json";
inline constexpr const char* kConfigFile = "config.json";
inline constexpr const char* kCheckpointFile = "checkpoint.json";
inline constexpr const char* kDiagnosticsFile = "diagnostics.csv";

struct TruthSummary {
  std::size_t packets{};
  std::size_t observations{};
  std::filesystem::path packets_path;
};

/**
 * Writes the noisy packet stream, the noiseless one, and the truth used for evaluation:
 *  - linear: truth.json (parameters, A, b); with linear.store_size > 0 also an ensemble store
 *    under store/ simulated at the packets.
 *  - seirs: truth.json (schedule) and truth.csv (t, S, E, I, R at every step).
 *  - heat: truth.json (KL coefficients), truth_field.csv (x, y, k) and sensors.csv.
 *
 * \throws ConfigError for the offline model.
 */
TruthSummary generate_truth(const ExperimentConfig& config);

/// Model for an experiment; `directory` holds generate_truth output when the model needs it.
[[nodiscard]] std::unique_ptr<ForwardModel> make_model(const ExperimentConfig& config,
                                                       const std::filesystem::path& directory);

/// Engine settings for an experiment (offline: initial density bounds the stored ensemble).
[[nodiscard]] EngineConfig make_engine_config(const ExperimentConfig& config, const ForwardModel& model);

struct EstimateOptions {
  /// Defaults to <output_dir>/packets.jsonl, or offline.packets.
  std::optional<std::filesystem::path> packets;
  bool resume{false};
  /// Stop after this many windows in this invocation.
  std::optional<int> max_windows;
  /// Write the updated ensemble of every window under ensembles/.
  bool write_ensembles{true};
};

struct EstimateSummary {
  int windows_processed{};
  int last_window{};
  bool complete{false};
  std::vector<WindowRecord> records;
};

/**
 * Runs the sequential engine over the packet stream, rewriting diagnostics.csv, attempts.csv,
 * estimates.csv and checkpoint.json after every window.
 *
 * \throws WindowError wrapping engine and model errors.
 * \throws IncompatibleCheckpoint when resuming with a different configuration.
 */
EstimateSummary estimate(const ExperimentConfig& config, const EstimateOptions& options = {});

/**
 * Plot-ready tables under <dir>/report: series.csv (diagnostics with threshold columns),
 * marginals.csv (weighted KDE of each parameter per window) and, for heat, field_errors.csv.
 *
 * \throws IoError when the directory holds no estimate output.
 */
void report(const std::filesystem::path& directory);

}  // namespace sdci::experiment

#endif
