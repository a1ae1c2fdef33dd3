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

#ifndef SDCI_FORWARD_MODEL_HPP
#define SDCI_FORWARD_MODEL_HPP

#include <Eigen/Dense>
#include <json.hpp>

#include <sdci/packet.hpp>

namespace sdci {

/**
 * Handle the sequential engine uses to turn parameter samples into simulated
 * measurements for one window.
 */
class ForwardModel {
 public:
  virtual ~ForwardModel() = default;

  /// Simulated measurements for each row of `samples` at the packet's sensors and times (k x n).
  virtual Eigen::MatrixXd simulate(const Eigen::MatrixXd& samples, const DataPacket& packet) = 0;

  /**
   * Called once per completed window, before advance(), with the ensemble and weights that
   * describe the updated distribution for the window (the unchanged ensemble when skipped).
   */
  virtual void assimilate(const Eigen::MatrixXd& /*samples*/, const Eigen::VectorXd& /*weights*/) {}

  /// Called once per completed window with the current point estimate; stateful models advance here.
  virtual void advance(const Eigen::VectorXd& /*estimate*/, const DataPacket& /*packet*/) {}

  /**
   * Lineage hook: row i of `children` was drawn from a kernel centred on row i of `parents`.
   *
   * `next_window` is false for samples added to the current window and true for an ensemble
   * that replaces the current one from the next window on. Models that carry per-sample
   * dynamic state use it to hot-start the children.
   */
  virtual void inherit(const Eigen::MatrixXd& /*children*/, const Eigen::MatrixXd& /*parents*/,
                       bool /*next_window*/) {}

  /// False for models backed by a fixed precomputed ensemble.
  [[nodiscard]] virtual bool can_simulate_new_samples() const { return true; }

  /// Model state needed to resume a run; empty for stateless models.
  [[nodiscard]] virtual nlohmann::json save_state() const { return nlohmann::json::object(); }
  virtual void load_state(const nlohmann::json& /*state*/) {}
};

}  // namespace sdci

#endif
