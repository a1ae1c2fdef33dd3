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

#include <sdci/models/heat.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/SparseCholesky>

#include <sdci/errors.hpp>

namespace sdci::models {

struct HeatStepper::Factor {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
};

Forcing default_forcing() {
  return [](double x, double y, double t) {
    return 10.0 * std::sin(6.0 * std::numbers::pi * t) * x + 10.0 * std::cos(4.0 * std::numbers::pi * t) * y;
  };
}

InitialCondition default_initial_condition() {
  return [](double x, double y) { return std::exp(-5.0 * (x * x + y * y)); };
}

Eigen::VectorXd initial_field(const Grid2D& grid, const InitialCondition& u0) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(grid.node_count());
  for (int j = 1; j < grid.cells; ++j) {
    for (int i = 1; i < grid.cells; ++i) {
      u(grid.node(i, j)) = u0(grid.coordinate(i), grid.coordinate(j));
    }
  }
  return u;
}

HeatStepper::HeatStepper(const Grid2D& grid, const Eigen::VectorXd& diffusivity, double dt, Forcing forcing)
    : grid_{grid}, dt_{dt}, forcing_{std::move(forcing)} {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("heat time step must be positive");
  }
  if (grid.cells < 2) {
    throw std::invalid_argument("heat grid needs at least two cells per axis");
  }
  if (diffusivity.size() != grid.node_count()) {
    throw DimensionMismatch("diffusivity does not match the grid");
  }
  const int m = grid.cells - 1;
  const Eigen::Index unknowns = static_cast<Eigen::Index>(m) * m;
  interior_.reserve(static_cast<std::size_t>(unknowns));
  interior_xy_.resize(unknowns, 2);
  inv_k_.resize(unknowns);
  for (int j = 1; j < grid.cells; ++j) {
    for (int i = 1; i < grid.cells; ++i) {
      const Eigen::Index r = static_cast<Eigen::Index>(interior_.size());
      const double k = diffusivity(grid.node(i, j));
      if (!(k > 0.0) || !std::isfinite(k)) {
        throw SolverFailure("diffusivity must be finite and positive");
      }
      interior_.push_back(grid.node(i, j));
      interior_xy_(r, 0) = grid.coordinate(i);
      interior_xy_(r, 1) = grid.coordinate(j);
      inv_k_(r) = 1.0 / k;
    }
  }
  const double c = dt / (grid.spacing() * grid.spacing());
  const auto idx = [m](int i, int j) { return static_cast<Eigen::Index>(j - 1) * m + (i - 1); };
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(unknowns) * 5);
  for (int j = 1; j < grid.cells; ++j) {
    for (int i = 1; i < grid.cells; ++i) {
      const Eigen::Index r = idx(i, j);
      triplets.emplace_back(r, r, inv_k_(r) + 4.0 * c);
      if (i > 1) triplets.emplace_back(r, idx(i - 1, j), -c);
      if (i < m) triplets.emplace_back(r, idx(i + 1, j), -c);
      if (j > 1) triplets.emplace_back(r, idx(i, j - 1), -c);
      if (j < m) triplets.emplace_back(r, idx(i, j + 1), -c);
    }
  }
  Eigen::SparseMatrix<double> A(unknowns, unknowns);
  A.setFromTriplets(triplets.begin(), triplets.end());
  factor_ = std::make_unique<Factor>();
  factor_->solver.compute(A);
  if (factor_->solver.info() != Eigen::Success) {
    throw SolverFailure("heat system factorization failed");
  }
}

HeatStepper::~HeatStepper() = default;
HeatStepper::HeatStepper(HeatStepper&&) noexcept = default;
HeatStepper& HeatStepper::operator=(HeatStepper&&) noexcept = default;

Eigen::VectorXd HeatStepper::step(const Eigen::VectorXd& u, long step) const {
  const double t_new = static_cast<double>(step + 1) * dt_;
  const auto unknowns = static_cast<Eigen::Index>(interior_.size());
  Eigen::VectorXd rhs(unknowns);
  for (Eigen::Index r = 0; r < unknowns; ++r) {
    const double f = forcing_ ? forcing_(interior_xy_(r, 0), interior_xy_(r, 1), t_new) : 0.0;
    rhs(r) = (u(interior_[static_cast<std::size_t>(r)]) + dt_ * f) * inv_k_(r);
  }
  const Eigen::VectorXd x = factor_->solver.solve(rhs);
  if (factor_->solver.info() != Eigen::Success || !x.allFinite()) {
    throw SolverFailure("heat linear solve failed at step " + std::to_string(step + 1));
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(u.size());
  for (Eigen::Index r = 0; r < unknowns; ++r) {
    out(interior_[static_cast<std::size_t>(r)]) = x(r);
  }
  return out;
}

HeatSeries heat_solve(const Eigen::VectorXd& diffusivity, const Grid2D& grid, double dt, double T,
                      const Forcing& forcing, const InitialCondition& u0, long stride) {
  if (!(T >= 0.0) || stride < 1) {
    throw std::invalid_argument("heat_solve needs T >= 0 and a positive stride");
  }
  const HeatStepper stepper{grid, diffusivity, dt, forcing};
  const long steps = std::lround(T / dt);
  std::vector<long> kept;
  for (long s = 0; s <= steps; s += stride) {
    kept.push_back(s);
  }
  if (kept.back() != steps) {
    kept.push_back(steps);
  }
  HeatSeries series;
  series.times.resize(static_cast<Eigen::Index>(kept.size()));
  series.states.resize(grid.node_count(), static_cast<Eigen::Index>(kept.size()));
  Eigen::VectorXd u = u0 ? initial_field(grid, u0) : Eigen::VectorXd::Zero(grid.node_count());
  std::size_t next = 0;
  for (long s = 0; s <= steps; ++s) {
    if (s > 0) {
      u = stepper.step(u, s - 1);
    }
    if (next < kept.size() && kept[next] == s) {
      series.times(static_cast<Eigen::Index>(next)) = static_cast<double>(s) * dt;
      series.states.col(static_cast<Eigen::Index>(next)) = u;
      ++next;
    }
  }
  return series;
}

SensorInterpolator::SensorInterpolator(const Grid2D& grid, const Eigen::MatrixX2d& locations) {
  const double h = grid.spacing();
  nodes_.reserve(static_cast<std::size_t>(locations.rows()));
  weights_.reserve(static_cast<std::size_t>(locations.rows()));
  for (Eigen::Index s = 0; s < locations.rows(); ++s) {
    const double x = locations(s, 0);
    const double y = locations(s, 1);
    if (!grid.contains(x, y)) {
      throw InvalidSensor("sensor " + std::to_string(s) + " lies outside the domain");
    }
    const double sx = (x - grid.lower) / h;
    const double sy = (y - grid.lower) / h;
    const int i = std::clamp(static_cast<int>(std::floor(sx)), 0, grid.cells - 1);
    const int j = std::clamp(static_cast<int>(std::floor(sy)), 0, grid.cells - 1);
    const double fx = sx - i;
    const double fy = sy - j;
    nodes_.push_back({grid.node(i, j), grid.node(i + 1, j), grid.node(i, j + 1), grid.node(i + 1, j + 1)});
    weights_.push_back({(1.0 - fx) * (1.0 - fy), fx * (1.0 - fy), (1.0 - fx) * fy, fx * fy});
  }
}

double SensorInterpolator::at(Eigen::Index sensor, const Eigen::VectorXd& nodal) const {
  const auto& n = nodes_[static_cast<std::size_t>(sensor)];
  const auto& w = weights_[static_cast<std::size_t>(sensor)];
  return w[0] * nodal(n[0]) + w[1] * nodal(n[1]) + w[2] * nodal(n[2]) + w[3] * nodal(n[3]);
}

Eigen::VectorXd SensorInterpolator::all(const Eigen::VectorXd& nodal) const {
  Eigen::VectorXd out(size());
  for (Eigen::Index s = 0; s < size(); ++s) {
    out(s) = at(s, nodal);
  }
  return out;
}

std::vector<Observation> heat_observations(const HeatSeries& series, const Grid2D& grid, const SensorSet& sensors) {
  const SensorInterpolator interp{grid, sensors.locations};
  std::vector<Observation> out;
  out.reserve(static_cast<std::size_t>(sensors.times.size() * interp.size()));
  for (Eigen::Index t = 0; t < sensors.times.size(); ++t) {
    Eigen::Index column = 0;
    (series.times.array() - sensors.times(t)).abs().minCoeff(&column);
    if (std::abs(series.times(column) - sensors.times(t)) > 1e-9 * std::max(1.0, sensors.times(t))) {
      throw std::invalid_argument("sensor time " + std::to_string(sensors.times(t)) + " is not a stored step");
    }
    const Eigen::VectorXd u = series.states.col(column);
    for (Eigen::Index s = 0; s < interp.size(); ++s) {
      out.push_back(Observation{sensors.times(t), interp.at(s, u), sensors.noise_sigma, sensor_id(s)});
    }
  }
  return out;
}

HeatModel::HeatModel(KlField field, SensorSet sensors) : HeatModel(std::move(field), std::move(sensors), Options{}) {}

HeatModel::HeatModel(KlField field, SensorSet sensors, Options options)
    : field_{std::move(field)},
      sensors_{std::move(sensors)},
      options_{std::move(options)},
      interpolator_{field_.grid, sensors_.locations},
      u0_{options_.initial ? initial_field(field_.grid, options_.initial)
                           : Eigen::VectorXd::Zero(field_.grid.node_count())} {
  if (!(options_.dt > 0.0)) {
    throw std::invalid_argument("heat time step must be positive");
  }
}

long HeatModel::step_of(double t) const {
  const long s = std::lround(t / options_.dt);
  if (s < 0) {
    throw std::invalid_argument("negative observation time");
  }
  return s;
}

Eigen::MatrixXd HeatModel::simulate(const Eigen::MatrixXd& samples, const DataPacket& packet) {
  if (samples.cols() != field_.terms()) {
    throw DimensionMismatch("heat samples must hold one coefficient per KL term");
  }
  const Eigen::Index n = packet.size();
  std::vector<long> column_step(static_cast<std::size_t>(n));
  std::vector<Eigen::Index> column_sensor(static_cast<std::size_t>(n));
  std::vector<long> needed;
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index s = sensor_index(packet.sensor_ids[static_cast<std::size_t>(j)]);
    if (s >= interpolator_.size()) {
      throw InvalidSensor("sensor '" + packet.sensor_ids[static_cast<std::size_t>(j)] + "' is not part of the model");
    }
    column_sensor[static_cast<std::size_t>(j)] = s;
    column_step[static_cast<std::size_t>(j)] = step_of(packet.times(j));
    needed.push_back(column_step[static_cast<std::size_t>(j)]);
  }
  std::sort(needed.begin(), needed.end());
  needed.erase(std::unique(needed.begin(), needed.end()), needed.end());
  const long first = needed.front();
  const long last = needed.back();

  Eigen::MatrixXd out(samples.rows(), n);
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    std::vector<double> key(static_cast<std::size_t>(samples.cols()));
    for (Eigen::Index c = 0; c < samples.cols(); ++c) {
      key[static_cast<std::size_t>(c)] = samples(i, c);
    }
    long step = 0;
    Eigen::VectorXd u = u0_;
    if (auto it = cache_.find(key); it != cache_.end() && it->second.step <= first) {
      step = it->second.step;
      u = it->second.u;
    }
    std::optional<HeatStepper> stepper;
    if (step < last) {
      stepper.emplace(field_.grid, kl_realize(field_, samples.row(i).transpose()), options_.dt, options_.forcing);
    }
    std::size_t next = 0;
    while (next < needed.size() && needed[next] < step) {
      ++next;
    }
    std::map<long, Eigen::VectorXd> readings;
    for (;;) {
      if (next < needed.size() && needed[next] == step) {
        readings.emplace(step, interpolator_.all(u));
        ++next;
      }
      if (step >= last) {
        break;
      }
      u = stepper->step(u, step);
      ++step;
      ++steps_taken_;
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      out(i, j) = readings.at(column_step[static_cast<std::size_t>(j)])(column_sensor[static_cast<std::size_t>(j)]);
    }
    cache_[std::move(key)] = CacheEntry{step, std::move(u), true};
  }
  return out;
}

void HeatModel::advance(const Eigen::VectorXd& /*estimate*/, const DataPacket& /*packet*/) {
  for (auto it = cache_.begin(); it != cache_.end();) {
    if (!it->second.touched) {
      it = cache_.erase(it);
    } else {
      it->second.touched = false;
      ++it;
    }
  }
}

}  // namespace sdci::models
