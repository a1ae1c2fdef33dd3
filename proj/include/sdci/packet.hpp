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

#ifndef SDCI_PACKET_HPP
#define SDCI_PACKET_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sdci {

/// Measurements transmitted for one window (t_{m-1}, t_m].
struct DataPacket {
  int window_index{};
  /// Observation time of each measurement; nondecreasing.
  Eigen::VectorXd times;
  Eigen::VectorXd values;
  Eigen::VectorXd sigmas;
  std::vector<std::string> sensor_ids;

  [[nodiscard]] Eigen::Index size() const noexcept { return values.size(); }
};

/// Throws std::invalid_argument (or InvalidNoiseModel for sigmas) when the packet is malformed.
void validate_packet(const DataPacket& packet);

}  // namespace sdci

#endif
