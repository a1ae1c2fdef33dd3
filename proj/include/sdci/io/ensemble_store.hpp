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

#ifndef SDCI_IO_ENSEMBLE_STORE_HPP
#define SDCI_IO_ENSEMBLE_STORE_HPP

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <sdci/forward_model.hpp>
#include <sdci/packet.hpp>

namespace sdci::io {

/// Precomputed simulations of one window; rows align with the store's parameter rows.
struct StoreWindow {
  int window{};
  Eigen::VectorXd times;
  Eigen::VectorXd sigmas;
  std::vector<std::string> sensor_ids;
  /// k x n.
  Eigen::MatrixXd simulated;
};

/**
 * A fixed ensemble of parameter samples with their simulated measurements per window.
 *
 * On disk: `manifest.json` (column metadata per window, file names), `parameters.csv` and
 * one `window_NNNN.csv` per window, all written with 17 significant digits.
 */
struct EnsembleStore {
  Eigen::MatrixXd parameters;
  std::vector<std::string> parameter_names;
  std::vector<StoreWindow> windows;

  /// \throws DimensionMismatch when row counts or column metadata disagree.
  void validate() const;
  [[nodiscard]] const StoreWindow& window(int index) const;
};

void write_ensemble_store(const std::filesystem::path& directory, const EnsembleStore& store);

/// \throws IoError for missing files, ParseError for malformed tables.
[[nodiscard]] EnsembleStore read_ensemble_store(const std::filesystem::path& directory);

/// Runs `model` on `parameters` for every packet (advancing with the ensemble mean) and stores the results.
[[nodiscard]] EnsembleStore simulate_store(const Eigen::MatrixXd& parameters, ForwardModel& model,
                                           const std::vector<DataPacket>& packets);

/**
 * Forward model backed by an ensemble store: it can only return stored rows.
 *
 * Samples are matched to parameter rows exactly; measurements are matched by sensor id and time.
 */
class OfflineModel final : public ForwardModel {
 public:
  explicit OfflineModel(EnsembleStore store);

  /// \throws SimulationFailure for samples or measurements the store does not hold.
  Eigen::MatrixXd simulate(const Eigen::MatrixXd& samples, const DataPacket& packet) override;
  [[nodiscard]] bool can_simulate_new_samples() const override { return false; }

  [[nodiscard]] const EnsembleStore& store() const noexcept { return store_; }
  /// Number of simulate() calls served.
  [[nodiscard]] long lookups() const noexcept { return lookups_; }

 private:
  EnsembleStore store_;
  std::map<std::vector<double>, Eigen::Index> rows_;
  long lookups_{0};
};

}  // namespace sdci::io

#endif
