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

#include <sdci/models/linear.hpp>

#include <cmath>
#include <stdexcept>

#include <sdci/errors.hpp>
#include <sdci/random.hpp>

namespace sdci::models {

LinearModel::LinearModel(Eigen::MatrixXd A, Eigen::VectorXd b) : A_{std::move(A)}, b_{std::move(b)} {
  if (A_.rows() == 0 || A_.cols() == 0) {
    throw std::invalid_argument("linear model operator is empty");
  }
  if (b_.size() != A_.rows()) {
    throw DimensionMismatch("linear model offset length does not match operator rows");
  }
}

Eigen::MatrixXd LinearModel::simulate(const Eigen::MatrixXd& samples, const DataPacket& packet) {
  if (samples.cols() != A_.cols()) {
    throw DimensionMismatch("sample dimension does not match the linear operator");
  }
  Eigen::MatrixXd G(packet.size(), A_.cols());
  Eigen::VectorXd offset(packet.size());
  for (Eigen::Index j = 0; j < packet.size(); ++j) {
    const Eigen::Index s = sensor_index(packet.sensor_ids[static_cast<std::size_t>(j)]);
    if (s >= A_.rows()) {
      throw InvalidSensor("sensor '" + packet.sensor_ids[static_cast<std::size_t>(j)] + "' is not part of the model");
    }
    G.row(j) = A_.row(s);
    offset(j) = b_(s);
  }
  return (samples * G.transpose()).rowwise() + offset.transpose();
}

LinearModel random_linear_model(Eigen::Index sensors, Eigen::Index parameters, std::uint64_t seed) {
  if (sensors < 1 || parameters < 1) {
    throw std::invalid_argument("linear model needs at least one sensor and one parameter");
  }
  Rng rng{seed};
  const double scale = 1.0 / std::sqrt(static_cast<double>(parameters));
  Eigen::MatrixXd A(sensors, parameters);
  for (Eigen::Index i = 0; i < sensors; ++i) {
    for (Eigen::Index j = 0; j < parameters; ++j) {
      A(i, j) = scale * standard_normal(rng);
    }
  }
  Eigen::VectorXd b(sensors);
  for (Eigen::Index i = 0; i < sensors; ++i) {
    b(i) = standard_normal(rng);
  }
  return LinearModel{std::move(A), std::move(b)};
}

std::vector<Observation> linear_observations(const LinearModel& model, const Eigen::VectorXd& truth, int windows,
                                             double window_length, double sigma) {
  if (truth.size() != model.A().cols()) {
    throw DimensionMismatch("truth dimension does not match the linear operator");
  }
  const Eigen::VectorXd clean = model.A() * truth + model.b();
  std::vector<Observation> out;
  out.reserve(static_cast<std::size_t>(windows * clean.size()));
  for (int m = 1; m <= windows; ++m) {
    for (Eigen::Index s = 0; s < clean.size(); ++s) {
      out.push_back(Observation{m * window_length, clean(s), sigma, sensor_id(s)});
    }
  }
  return out;
}

}  // namespace sdci::models
