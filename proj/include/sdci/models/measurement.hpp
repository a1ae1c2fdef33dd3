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

#ifndef SDCI_MODELS_MEASUREMENT_HPP
#define SDCI_MODELS_MEASUREMENT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <sdci/models/grid.hpp>
#include <sdci/packet.hpp>

namespace sdci::models {

/// One scalar measurement d_j = M_j(state) + xi_j with xi_j ~ N(0, sigma^2).
struct Observation {
  double time{};
  double value{};
  double sigma{};
  std::string sensor_id;
};

/// Fixed point sensors sampling a field at a common cadence.
struct SensorSet {
  Eigen::MatrixX2d locations;
  Eigen::VectorXd times;
  double noise_sigma{};
  std::uint64_t rng_seed{};
};

/// `count` sensors drawn uniformly over the open domain of `grid`.
[[nodiscard]] SensorSet random_sensors(const Grid2D& grid, int count, Eigen::VectorXd times, double noise_sigma,
                                       std::uint64_t seed);

[[nodiscard]] std::string sensor_id(Eigen::Index index);
/// Inverse of sensor_id; throws InvalidSensor on anything else.
[[nodiscard]] Eigen::Index sensor_index(const std::string& id);

/// Adds iid N(0, sigma_j^2) noise in observation order from a generator seeded with `seed`.
void add_noise(std::vector<Observation>& observations, std::uint64_t seed);

/**
 * Groups observations into windows (t_{m-1}, t_m] with t_m = t0 + m * window_length.
 *
 * Windows without observations are omitted. Observation order within a window is preserved.
 */
[[nodiscard]] std::vector<DataPacket> packetize(const std::vector<Observation>& observations, double window_length,
                                                double t0 = 0.0);

/// Window index (1-based) holding time `t`.
[[nodiscard]] int window_of(double t, double window_length, double t0 = 0.0);

}  // namespace sdci::models

#endif
