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

#ifndef SDCI_MODELS_LINEAR_HPP
#define SDCI_MODELS_LINEAR_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include <sdci/forward_model.hpp>
#include <sdci/models/measurement.hpp>

namespace sdci::models {

/**
 * Time-independent linear map: sensor s reads A.row(s) * lambda + b(s).
 *
 * Packet columns are matched to rows of A through their sensor ids.
 */
class LinearModel final : public ForwardModel {
 public:
  LinearModel(Eigen::MatrixXd A, Eigen::VectorXd b);

  Eigen::MatrixXd simulate(const Eigen::MatrixXd& samples, const DataPacket& packet) override;

  [[nodiscard]] const Eigen::MatrixXd& A() const noexcept { return A_; }
  [[nodiscard]] const Eigen::VectorXd& b() const noexcept { return b_; }

 private:
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
};

/// Random operator with iid N(0, 1/p) entries and offsets N(0, 1), from `seed`.
[[nodiscard]] LinearModel random_linear_model(Eigen::Index sensors, Eigen::Index parameters, std::uint64_t seed);

/// One reading per sensor at t = m * window_length for m = 1..windows.
[[nodiscard]] std::vector<Observation> linear_observations(const LinearModel& model, const Eigen::VectorXd& truth,
                                                           int windows, double window_length, double sigma);

}  // namespace sdci::models

#endif
