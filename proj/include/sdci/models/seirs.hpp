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

#ifndef SDCI_MODELS_SEIRS_HPP
#define SDCI_MODELS_SEIRS_HPP

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include <sdci/forward_model.hpp>
#include <sdci/models/measurement.hpp>

namespace sdci::models {

using SeirsState = Eigen::Vector4d;

/// Rates per day.
struct SeirsParams {
  double lambda1{};
  double lambda2{};
  double lambda3{};
  double lambda4{};
  double mu{0.0};

  /// (lambda1, lambda2, lambda3, lambda4).
  [[nodiscard]] Eigen::Vector4d rates() const { return {lambda1, lambda2, lambda3, lambda4}; }
  [[nodiscard]] static SeirsParams from_rates(const Eigen::Ref<const Eigen::VectorXd>& rates, double mu = 0.0);
  void validate() const;
};

/// Piecewise-constant parameters; entry j is in force from `day_j` on.
class ShiftSchedule {
 public:
  explicit ShiftSchedule(SeirsParams initial);
  ShiftSchedule(SeirsParams initial, std::vector<std::pair<double, SeirsParams>> shifts);

  [[nodiscard]] const SeirsParams& initial() const noexcept { return initial_; }
  [[nodiscard]] const std::vector<std::pair<double, SeirsParams>>& shifts() const noexcept { return shifts_; }
  /// Parameters for a step that starts at time `t`.
  [[nodiscard]] const SeirsParams& at(double t) const;

 private:
  SeirsParams initial_;
  std::vector<std::pair<double, SeirsParams>> shifts_;
};

/// The default truth: R0 = 3, with a lockdown at day 25 and a mutation at day 150.
[[nodiscard]] ShiftSchedule reference_schedule();
[[nodiscard]] SeirsState reference_initial_state();

[[nodiscard]] SeirsState seirs_rhs(const SeirsState& state, const SeirsParams& params);

/// One classical RK4 step.
[[nodiscard]] SeirsState rk4_step(const SeirsState& state, const SeirsParams& params, double dt);

struct SeirsTrajectory {
  Eigen::VectorXd times;
  /// One row per time, columns S, E, I, R.
  Eigen::MatrixX4d states;
};

/**
 * Integrates from t0 to t0 + T with fixed steps.
 *
 * \throws IntegrationFailure on non-finite states.
 */
[[nodiscard]] SeirsTrajectory rk4_simulate(const ShiftSchedule& schedule, const SeirsState& initial, double dt,
                                           double T, double t0 = 0.0);
[[nodiscard]] SeirsTrajectory rk4_simulate(const SeirsParams& params, const SeirsState& initial, double dt, double T,
                                           double t0 = 0.0);

/// Compartment readings (I by default) at the trajectory times closest to `times`.
[[nodiscard]] std::vector<Observation> seirs_observations(const SeirsTrajectory& trajectory,
                                                          const Eigen::VectorXd& times, double sigma,
                                                          int compartment = 2);

/**
 * SEIRS forward model over a window; parameters are the four rates, the observed
 * compartment is I.
 *
 * Carry::known: every sample starts a window from `known`, a supplied state trajectory (the
 * synthetic truth in a twin experiment).
 *
 * Carry::per_sample: each sample carries its own compartment state, keyed by its parameter
 * vector. Samples drawn around a parent start from the parent's state; samples without a
 * known state start from the reference state, the mean end state under the updated
 * distribution of the previous window (or the estimate's end state before any update).
 */
class SeirsModel final : public ForwardModel {
 public:
  enum class Carry { per_sample, known };

  struct Options {
    double dt{0.1};
    Carry carry{Carry::per_sample};
    /// Required for Carry::known; must cover every window end.
    std::optional<SeirsTrajectory> known;
    int compartment{2};
    double t0{0.0};
  };

  explicit SeirsModel(SeirsState initial);
  SeirsModel(SeirsState initial, Options options);

  Eigen::MatrixXd simulate(const Eigen::MatrixXd& samples, const DataPacket& packet) override;
  void inherit(const Eigen::MatrixXd& children, const Eigen::MatrixXd& parents, bool next_window) override;
  void assimilate(const Eigen::MatrixXd& samples, const Eigen::VectorXd& weights) override;
  void advance(const Eigen::VectorXd& estimate, const DataPacket& packet) override;
  [[nodiscard]] nlohmann::json save_state() const override;
  void load_state(const nlohmann::json& state) override;

  /// Reference state at the current window start.
  [[nodiscard]] const SeirsState& state() const noexcept { return reference_; }
  /// State a sample starts the current window from.
  [[nodiscard]] SeirsState start_state(const Eigen::Ref<const Eigen::VectorXd>& sample) const;
  [[nodiscard]] double time() const noexcept { return time_; }
  [[nodiscard]] const Options& options() const noexcept { return options_; }

 private:
  using StateMap = std::map<std::vector<double>, SeirsState>;

  [[nodiscard]] long steps_to(double t) const;

  SeirsState reference_;
  double time_;
  Options options_;
  StateMap start_;
  StateMap end_;
  StateMap pending_;
  std::optional<SeirsState> assimilated_;
};

}  // namespace sdci::models

#endif
