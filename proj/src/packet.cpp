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

#include <sdci/packet.hpp>

#include <cmath>
#include <stdexcept>

#include <sdci/errors.hpp>

namespace sdci {

void validate_packet(const DataPacket& packet) {
  const Eigen::Index n = packet.values.size();
  if (n < 1) {
    throw std::invalid_argument("packet " + std::to_string(packet.window_index) + " carries no measurements");
  }
  if (packet.times.size() != n || packet.sigmas.size() != n || static_cast<Eigen::Index>(packet.sensor_ids.size()) != n) {
    throw DimensionMismatch("packet " + std::to_string(packet.window_index) +
                            ": times, values, sigmas and sensor ids must have equal length");
  }
  if (!packet.values.allFinite() || !packet.times.allFinite()) {
    throw std::invalid_argument("packet " + std::to_string(packet.window_index) + " has non-finite entries");
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(packet.sigmas(j) > 0.0) || !std::isfinite(packet.sigmas(j))) {
      throw InvalidNoiseModel("packet " + std::to_string(packet.window_index) + ": sigma at measurement " +
                              std::to_string(j) + " must be positive");
    }
    if (j > 0 && packet.times(j) < packet.times(j - 1)) {
      throw std::invalid_argument("packet " + std::to_string(packet.window_index) + ": times must be nondecreasing");
    }
  }
}

}  // namespace sdci
