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

#include <sdci/models/measurement.hpp>

#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

#include <sdci/errors.hpp>
#include <sdci/random.hpp>

namespace sdci::models {

SensorSet random_sensors(const Grid2D& grid, int count, Eigen::VectorXd times, double noise_sigma,
                         std::uint64_t seed) {
  if (count < 1) {
    throw std::invalid_argument("sensor count must be positive");
  }
  Rng rng{seed};
  SensorSet sensors;
  sensors.locations.resize(count, 2);
  for (int s = 0; s < count; ++s) {
    for (int d = 0; d < 2; ++d) {
      double v = uniform(rng, grid.lower, grid.upper);
      while (v == grid.lower) {
        v = uniform(rng, grid.lower, grid.upper);
      }
      sensors.locations(s, d) = v;
    }
  }
  sensors.times = std::move(times);
  sensors.noise_sigma = noise_sigma;
  sensors.rng_seed = seed;
  return sensors;
}

std::string sensor_id(Eigen::Index index) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "s%04ld", static_cast<long>(index));
  return buffer;
}

Eigen::Index sensor_index(const std::string& id) {
  if (id.size() < 2 || id[0] != 's') {
    throw InvalidSensor("unknown sensor id '" + id + "'");
  }
  Eigen::Index value = 0;
  for (std::size_t c = 1; c < id.size(); ++c) {
    if (id[c] < '0' || id[c] > '9') {
      throw InvalidSensor("unknown sensor id '" + id + "'");
    }
    value = value * 10 + (id[c] - '0');
  }
  return value;
}

void add_noise(std::vector<Observation>& observations, std::uint64_t seed) {
  Rng rng{seed};
  for (auto& obs : observations) {
    obs.value += obs.sigma * standard_normal(rng);
  }
}

int window_of(double t, double window_length, double t0) {
  if (!(window_length > 0.0)) {
    throw std::invalid_argument("window length must be positive");
  }
  // Relative slack absorbs round-off in times built as multiples of a cadence.
  const double position = (t - t0) / window_length;
  return static_cast<int>(std::ceil(position - 1e-9));
}

std::vector<DataPacket> packetize(const std::vector<Observation>& observations, double window_length, double t0) {
  std::map<int, std::vector<const Observation*>> by_window;
  for (const auto& obs : observations) {
    const int m = window_of(obs.time, window_length, t0);
    if (m < 1) {
      throw std::invalid_argument("observation at or before the start time cannot be packetized");
    }
    by_window[m].push_back(&obs);
  }
  std::vector<DataPacket> packets;
  packets.reserve(by_window.size());
  for (const auto& [m, members] : by_window) {
    DataPacket packet;
    packet.window_index = m;
    const auto n = static_cast<Eigen::Index>(members.size());
    packet.times.resize(n);
    packet.values.resize(n);
    packet.sigmas.resize(n);
    packet.sensor_ids.reserve(members.size());
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& obs = *members[static_cast<std::size_t>(j)];
      packet.times(j) = obs.time;
      packet.values(j) = obs.value;
      packet.sigmas(j) = obs.sigma;
      packet.sensor_ids.push_back(obs.sensor_id);
    }
    packets.push_back(std::move(packet));
  }
  return packets;
}

}  // namespace sdci::models
