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

#include <sdci/models/seirs.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <sdci/errors.hpp>

namespace sdci::models {

namespace {

constexpr double kStepSlack = 1e-9;

std::vector<double> key_of(const Eigen::Ref<const Eigen::VectorXd>& sample) {
  return {sample.data(), sample.data() + sample.size()};
}

long step_count(double T, double dt) {
  if (!(dt > 0.0) || !(T >= 0.0)) {
    throw std::invalid_argument("rk4_simulate needs dt > 0 and T >= 0");
  }
  const double steps = T / dt;
  const double rounded = std::round(steps);
  if (std::abs(steps - rounded) > 1e-6 * std::max(1.0, steps)) {
    throw std::invalid_argument("T must be a multiple of dt");
  }
  return static_cast<long>(rounded);
}

void check_finite(const SeirsState& x, double t) {
  if (!x.allFinite()) {
    throw IntegrationFailure("non-finite SEIRS state at t = " + std::to_string(t));
  }
}

}  // namespace

SeirsParams SeirsParams::from_rates(const Eigen::Ref<const Eigen::VectorXd>& rates, double mu) {
  if (rates.size() != 4) {
    throw DimensionMismatch("SEIRS parameters have four rates");
  }
  return SeirsParams{rates(0), rates(1), rates(2), rates(3), mu};
}

void SeirsParams::validate() const {
  if (!(lambda1 >= 0.0 && lambda2 >= 0.0 && lambda3 >= 0.0 && lambda4 >= 0.0 && mu >= 0.0)) {
    throw std::invalid_argument("SEIRS rates must be nonnegative");
  }
}

ShiftSchedule::ShiftSchedule(SeirsParams initial) : ShiftSchedule(initial, {}) {}

ShiftSchedule::ShiftSchedule(SeirsParams initial, std::vector<std::pair<double, SeirsParams>> shifts)
    : initial_{initial}, shifts_{std::move(shifts)} {
  initial_.validate();
  for (std::size_t j = 0; j < shifts_.size(); ++j) {
    shifts_[j].second.validate();
    if (j > 0 && !(shifts_[j].first > shifts_[j - 1].first)) {
      throw std::invalid_argument("shift days must be strictly increasing");
    }
  }
}

const SeirsParams& ShiftSchedule::at(double t) const {
  const SeirsParams* current = &initial_;
  for (const auto& [day, params] : shifts_) {
    if (t + kStepSlack >= day) {
      current = &params;
    }
  }
  return *current;
}

ShiftSchedule reference_schedule() {
  const SeirsParams truth{3.0 / 14.0, 1.0 / 7.0, 1.0 / 14.0, 1.0 / 365.0, 0.0};
  SeirsParams lockdown = truth;
  lockdown.lambda1 = 0.5 / 14.0;
  SeirsParams mutation = truth;
  mutation.lambda1 = 3.6 / 14.0;
  mutation.lambda2 = 1.0 / 3.5;
  return ShiftSchedule{truth, {{25.0, lockdown}, {150.0, mutation}}};
}

SeirsState reference_initial_state() { return {0.98, 0.01, 0.01, 0.0}; }

SeirsState seirs_rhs(const SeirsState& x, const SeirsParams& p) {
  const double S = x(0);
  const double E = x(1);
  const double I = x(2);
  const double R = x(3);
  const double N = S + E + I + R;
  const double infection = N > 0.0 ? p.lambda1 * I * S / N : 0.0;
  return {p.mu * N - infection + p.lambda4 * R, infection - p.lambda2 * E, p.lambda2 * E - p.lambda3 * I,
          p.lambda3 * I - p.lambda4 * R};
}

SeirsState rk4_step(const SeirsState& x, const SeirsParams& p, double dt) {
  const SeirsState k1 = seirs_rhs(x, p);
  const SeirsState k2 = seirs_rhs(x + 0.5 * dt * k1, p);
  const SeirsState k3 = seirs_rhs(x + 0.5 * dt * k2, p);
  const SeirsState k4 = seirs_rhs(x + dt * k3, p);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

SeirsTrajectory rk4_simulate(const ShiftSchedule& schedule, const SeirsState& initial, double dt, double T,
                             double t0) {
  const long steps = step_count(T, dt);
  SeirsTrajectory out;
  out.times.resize(steps + 1);
  out.states.resize(steps + 1, 4);
  SeirsState x = initial;
  check_finite(x, t0);
  out.times(0) = t0;
  out.states.row(0) = x.transpose();
  for (long s = 0; s < steps; ++s) {
    const double t = t0 + static_cast<double>(s) * dt;
    x = rk4_step(x, schedule.at(t), dt);
    check_finite(x, t + dt);
    out.times(s + 1) = t0 + static_cast<double>(s + 1) * dt;
    out.states.row(s + 1) = x.transpose();
  }
  return out;
}

SeirsTrajectory rk4_simulate(const SeirsParams& params, const SeirsState& initial, double dt, double T, double t0) {
  return rk4_simulate(ShiftSchedule{params}, initial, dt, T, t0);
}

std::vector<Observation> seirs_observations(const SeirsTrajectory& trajectory, const Eigen::VectorXd& times,
                                            double sigma, int compartment) {
  if (compartment < 0 || compartment > 3) {
    throw std::invalid_argument("SEIRS compartment index must lie in [0, 3]");
  }
  const Eigen::Index last = trajectory.times.size() - 1;
  if (last < 1) {
    throw std::invalid_argument("trajectory too short");
  }
  const double t0 = trajectory.times(0);
  const double dt = trajectory.times(1) - t0;
  std::vector<Observation> out;
  out.reserve(static_cast<std::size_t>(times.size()));
  for (Eigen::Index j = 0; j < times.size(); ++j) {
    const auto s = static_cast<Eigen::Index>(std::llround((times(j) - t0) / dt));
    if (s < 0 || s > last) {
      throw std::invalid_argument("observation time outside the simulated horizon");
    }
    out.push_back(Observation{times(j), trajectory.states(s, compartment), sigma, sensor_id(compartment)});
  }
  return out;
}

SeirsModel::SeirsModel(SeirsState initial) : SeirsModel(initial, Options{}) {}

SeirsModel::SeirsModel(SeirsState initial, Options options)
    : reference_{initial}, time_{options.t0}, options_{options} {
  if (!(options_.dt > 0.0)) {
    throw std::invalid_argument("SEIRS time step must be positive");
  }
  if (options_.compartment < 0 || options_.compartment > 3) {
    throw std::invalid_argument("SEIRS compartment index must lie in [0, 3]");
  }
  if (options_.carry == Carry::known && (!options_.known || options_.known->times.size() < 2)) {
    throw std::invalid_argument("known-state carry needs a state trajectory");
  }
}

long SeirsModel::steps_to(double t) const {
  const double steps = (t - time_) / options_.dt;
  const long rounded = std::lround(steps);
  if (rounded < 0) {
    throw std::invalid_argument("observation time " + std::to_string(t) + " precedes the carried model time");
  }
  return rounded;
}

SeirsState SeirsModel::start_state(const Eigen::Ref<const Eigen::VectorXd>& sample) const {
  const auto it = start_.find(key_of(sample));
  return it == start_.end() ? reference_ : it->second;
}

Eigen::MatrixXd SeirsModel::simulate(const Eigen::MatrixXd& samples, const DataPacket& packet) {
  if (samples.cols() != 4) {
    throw DimensionMismatch("SEIRS samples need four rates");
  }
  const Eigen::Index n = packet.size();
  std::vector<long> targets(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    targets[static_cast<std::size_t>(j)] = steps_to(packet.times(j));
  }
  const long horizon = *std::max_element(targets.begin(), targets.end());
  Eigen::MatrixXd out(samples.rows(), n);
  std::vector<double> path(static_cast<std::size_t>(horizon + 1));
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    const SeirsParams p = SeirsParams::from_rates(samples.row(i).transpose());
    std::vector<double> key = key_of(samples.row(i).transpose());
    const auto found = start_.find(key);
    SeirsState x = found == start_.end() ? reference_ : found->second;
    path[0] = x(options_.compartment);
    for (long s = 0; s < horizon; ++s) {
      x = rk4_step(x, p, options_.dt);
      if (!x.allFinite()) {
        throw SimulationFailure("SEIRS sample " + std::to_string(i) + " diverged");
      }
      path[static_cast<std::size_t>(s + 1)] = x(options_.compartment);
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      out(i, j) = path[static_cast<std::size_t>(targets[static_cast<std::size_t>(j)])];
    }
    end_[std::move(key)] = x;
  }
  return out;
}

void SeirsModel::inherit(const Eigen::MatrixXd& children, const Eigen::MatrixXd& parents, bool next_window) {
  if (options_.carry != Carry::per_sample) {
    return;
  }
  if (children.rows() != parents.rows()) {
    throw DimensionMismatch("children and parents must be row-aligned");
  }
  const StateMap& source = next_window ? end_ : start_;
  StateMap& target = next_window ? pending_ : start_;
  for (Eigen::Index i = 0; i < children.rows(); ++i) {
    const auto it = source.find(key_of(parents.row(i).transpose()));
    if (it != source.end()) {
      target[key_of(children.row(i).transpose())] = it->second;
    }
  }
}

void SeirsModel::assimilate(const Eigen::MatrixXd& samples, const Eigen::VectorXd& weights) {
  SeirsState sum = SeirsState::Zero();
  double mass = 0.0;
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    const auto it = end_.find(key_of(samples.row(i).transpose()));
    if (it != end_.end() && weights(i) > 0.0) {
      sum += weights(i) * it->second;
      mass += weights(i);
    }
  }
  assimilated_.reset();
  if (mass > 0.0) {
    assimilated_ = sum / mass;
  }
}

void SeirsModel::advance(const Eigen::VectorXd& estimate, const DataPacket& packet) {
  const long steps = steps_to(packet.times.maxCoeff());
  if (options_.carry == Carry::known) {
    const SeirsTrajectory& known = *options_.known;
    const double t = time_ + static_cast<double>(steps) * options_.dt;
    const double spacing = known.times(1) - known.times(0);
    const auto row = static_cast<Eigen::Index>(std::llround((t - known.times(0)) / spacing));
    if (row < 0 || row >= known.times.size()) {
      throw std::out_of_range("known state trajectory does not cover t = " + std::to_string(t));
    }
    reference_ = known.states.row(row).transpose();
  } else if (assimilated_) {
    reference_ = *assimilated_;
  } else if (const auto it = end_.find(key_of(estimate)); it != end_.end()) {
    reference_ = it->second;
  } else {
    const SeirsParams p = SeirsParams::from_rates(estimate);
    SeirsState x = start_state(estimate);
    for (long s = 0; s < steps; ++s) {
      x = rk4_step(x, p, options_.dt);
      check_finite(x, time_ + static_cast<double>(s + 1) * options_.dt);
    }
    reference_ = x;
  }
  time_ += static_cast<double>(steps) * options_.dt;
  assimilated_.reset();
  if (options_.carry != Carry::per_sample) {
    start_.clear();
    end_.clear();
    pending_.clear();
    return;
  }
  start_ = std::move(end_);
  for (auto& [key, x] : pending_) {
    start_[key] = x;
  }
  end_.clear();
  pending_.clear();
}

namespace {

nlohmann::json state_json(const SeirsState& x) { return nlohmann::json::array({x(0), x(1), x(2), x(3)}); }

SeirsState state_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) {
    throw std::invalid_argument("SEIRS state needs four compartments");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

}  // namespace

nlohmann::json SeirsModel::save_state() const {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& [key, x] : start_) {
    samples.push_back(nlohmann::json{{"params", key}, {"state", state_json(x)}});
  }
  return nlohmann::json{{"state", state_json(reference_)}, {"time", time_}, {"samples", std::move(samples)}};
}

void SeirsModel::load_state(const nlohmann::json& state) {
  reference_ = state_from(state.at("state"));
  time_ = state.at("time").get<double>();
  start_.clear();
  end_.clear();
  pending_.clear();
  if (state.contains("samples")) {
    for (const auto& entry : state.at("samples")) {
      start_[entry.at("params").get<std::vector<double>>()] = state_from(entry.at("state"));
    }
  }
}

}  // namespace sdci::models
