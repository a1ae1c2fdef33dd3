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

#ifndef SDCI_SEQUENTIAL_HPP
#define SDCI_SEQUENTIAL_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include <sdci/density.hpp>
#include <sdci/forward_model.hpp>
#include <sdci/packet.hpp>
#include <sdci/qoi.hpp>
#include <sdci/random.hpp>

/**
 * \file
 * \brief Sequential MUD estimation over a stream of data packets.
 *
 * Each window builds a candidate MUD solution, checks the predictability diagnostic and
 * either accepts it (propagating by re-weighting or re-sampling), retries under one of
 * four controls, or skips the window.
 *
 * Controls, in the order the engine applies them when |E(r) - 1| >= eps_pred:
 *  - KL_DCI <= eps_kl: Control 1 lowers q one step at a time down to q_min, then
 *    Control 2 appends `resample_increment` fresh samples (at most `max_increments` times).
 *  - KL_DCI > eps_kl: a change point is flagged once per window and Control 3
 *    (re-weight against the reset density) or Control 4 (fresh ensemble from the reset
 *    density) is applied, after which the approximation-error controls above remain
 *    available.
 */

namespace sdci {

struct Thresholds {
  double eps_pred{0.1};
  double eps_kl{3.0};
  double eps_samples{0.5};
  double eps_mach{1e-16};
  int q_max{1};
  int q_min{1};
  int resample_increment{0};
  /// Cap on Control-2 increments per window.
  int max_increments{3};

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

enum class DriftResponse { reweight, resample };

enum class Decision { accepted_reweight, accepted_resample, control1, control2, control3, control4, skipped };

[[nodiscard]] std::string_view to_string(Decision decision);
[[nodiscard]] Decision decision_from_string(std::string_view text);
[[nodiscard]] bool is_terminal(Decision decision);

/// Parameter samples (rows) with nonnegative weights.
struct ParameterEnsemble {
  Eigen::MatrixXd samples;
  Eigen::VectorXd weights;
  /// Number of re-sampling events that produced this ensemble.
  int generation{0};
  std::uint64_t rng_seed{0};

  [[nodiscard]] Eigen::Index size() const noexcept { return samples.rows(); }
  [[nodiscard]] Eigen::Index dimension() const noexcept { return samples.cols(); }
  void validate() const;
};

/// One candidate solution tried within a window.
struct Attempt {
  int q{};
  Eigen::Index sample_count{};
  double expected_ratio{};
  double kl_dci{};
  /// What the engine did after evaluating this candidate.
  Decision action{Decision::skipped};
  /// Name of the error that invalidated the candidate, empty when diagnostics were computed.
  std::string failure;
};

struct WindowRecord {
  int window_index{};
  int q_used{};
  Decision decision{Decision::skipped};
  Eigen::VectorXd mud_point;
  double expected_ratio{};
  double kl_dci{};
  double kl_dci_raw{};
  double eff_fraction{};
  bool change_point_flag{false};
  Eigen::Index sample_count{};
  int generation{};
  std::vector<Attempt> attempts;
};

struct EngineConfig {
  Thresholds thresholds;
  DriftResponse drift_response{DriftResponse::resample};
  /// Density of generation 0.
  ParameterDensity initial_density;
  /// Density used by Controls 3 and 4; defaults to `initial_density`.
  std::optional<ParameterDensity> reset_density;
  /// Optional box that re-sampled parameters are confined to.
  std::optional<Box> support;
  Eigen::Index ensemble_size{100};
  std::uint64_t seed{0};
  PcaCentering centering{PcaCentering::column_mean};

  [[nodiscard]] const ParameterDensity& drift_density() const {
    return reset_density ? *reset_density : initial_density;
  }
};

/// Everything the engine carries between windows (the forward model keeps its own state).
struct EngineState {
  ParameterEnsemble ensemble;
  /// Explicit density the current generation was drawn from.
  ParameterDensity base_density;
  Rng rng;
  int last_window{0};
  std::optional<Eigen::VectorXd> last_estimate;
};

struct WindowOutcome {
  WindowRecord record;
  EngineState next;
  /// Samples and updated weights (w * r) of the accepted candidate; the unchanged ensemble when skipped.
  Eigen::MatrixXd updated_samples;
  Eigen::VectorXd updated_weights;
};

/// Fraction of normalized weights above `eps_mach`.
[[nodiscard]] double effective_sample_fraction(const Eigen::VectorXd& weights, double eps_mach = 1e-16);

/// Predictability breakdown together with a large information gain.
[[nodiscard]] bool detect_change_point(double expected_ratio, double kl_dci, const Thresholds& thresholds);
[[nodiscard]] bool detect_change_point(const WindowRecord& record, const Thresholds& thresholds);

/// Draws the generation-0 ensemble from the configured initial density.
[[nodiscard]] EngineState initial_state(const EngineConfig& config);

/**
 * Processes one data packet: candidate solutions, controls and propagation.
 *
 * \throws SimulationFailure if the model fails or returns non-finite values.
 * \throws WeightCollapse if an accepted update leaves every weight at zero.
 */
[[nodiscard]] WindowOutcome run_window(const EngineState& state, const DataPacket& packet, ForwardModel& model,
                                       const EngineConfig& config);

/// Single-owner state machine that feeds packets to `run_window` in order.
class SequentialEngine {
 public:
  SequentialEngine(EngineConfig config, ForwardModel& model);
  SequentialEngine(EngineConfig config, ForwardModel& model, EngineState state);

  /// \throws ProtocolViolation when `packet.window_index` does not follow the previous window.
  WindowOutcome process(const DataPacket& packet);

  [[nodiscard]] const EngineState& state() const noexcept { return state_; }
  [[nodiscard]] const EngineConfig& config() const noexcept { return config_; }
  [[nodiscard]] ForwardModel& model() const noexcept { return *model_; }

 private:
  EngineConfig config_;
  ForwardModel* model_;
  EngineState state_;
};

struct SequentialResult {
  std::vector<WindowRecord> records;
  ParameterEnsemble final_ensemble;
};

/// Runs the engine over a whole packet stream.
[[nodiscard]] SequentialResult sequential_mud(const EngineConfig& config, const std::vector<DataPacket>& packets,
                                              ForwardModel& model);

}  // namespace sdci

#endif
