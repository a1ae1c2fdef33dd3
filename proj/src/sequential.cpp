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

#include <sdci/sequential.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include <sdci/errors.hpp>
#include <sdci/kde.hpp>

namespace sdci {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::MatrixXd simulate_checked(ForwardModel& model, const Eigen::MatrixXd& samples, const DataPacket& packet) {
  Eigen::MatrixXd simulated;
  try {
    simulated = model.simulate(samples, packet);
  } catch (const SimulationFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw SimulationFailure("window " + std::to_string(packet.window_index) + ": " + e.what());
  }
  if (simulated.rows() != samples.rows() || simulated.cols() != packet.size()) {
    throw SimulationFailure("window " + std::to_string(packet.window_index) +
                            ": forward model returned a matrix of the wrong shape");
  }
  for (Eigen::Index i = 0; i < simulated.rows(); ++i) {
    if (!simulated.row(i).allFinite()) {
      throw SimulationFailure("window " + std::to_string(packet.window_index) +
                              ": non-finite simulated measurement for sample " + std::to_string(i));
    }
  }
  return simulated;
}

// Weighted KDE over parameters; when the weights sit on too few points to give a
// variance the bandwidths fall back to the unweighted Scott bandwidths of the cloud.
DensityEstimate<double> fit_parameter_density(const Eigen::MatrixXd& samples, const Eigen::VectorXd& weights) {
  try {
    return wkde_fit(samples, weights);
  } catch (const DegenerateDimension&) {
    Eigen::VectorXd bandwidths = scott_bandwidths(samples, Eigen::VectorXd::Ones(samples.rows()));
    return DensityEstimate<double>{samples, weights, std::move(bandwidths)};
  }
}

bool all_equal(const Eigen::VectorXd& weights) {
  return (weights.array() == weights(0)).all();
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& samples, const std::vector<Eigen::Index>& sources) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(sources.size()), samples.cols());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = samples.row(sources[i]);
  }
  return out;
}

// Draws from a kernel density fitted to (samples, weights) and reports the lineage to the model.
Eigen::MatrixXd draw_from_kernel(const Eigen::MatrixXd& samples, const Eigen::VectorXd& weights,
                                 const std::optional<Box>& support, Eigen::Index count, Rng& rng, ForwardModel& model,
                                 bool next_window, std::optional<ParameterDensity>* density_out = nullptr) {
  ParameterDensity density{KernelDensity{fit_parameter_density(samples, weights), support}};
  std::vector<Eigen::Index> sources;
  Eigen::MatrixXd draws = density.sample(count, rng, &sources);
  model.inherit(draws, rows_of(samples, sources), next_window);
  if (density_out != nullptr) {
    density_out->emplace(std::move(density));
  }
  return draws;
}

Eigen::MatrixXd draw_increment(const Eigen::MatrixXd& samples, const Eigen::VectorXd& weights,
                               const ParameterDensity& base, const std::optional<Box>& support, Eigen::Index count,
                               Rng& rng, ForwardModel& model) {
  if (all_equal(weights)) {
    return base.sample(count, rng);
  }
  return draw_from_kernel(samples, weights, support, count, rng, model, false);
}

Eigen::VectorXd weighted_mean(const Eigen::MatrixXd& samples, const Eigen::VectorXd& weights) {
  return (samples.transpose() * weights) / weights.sum();
}

}  // namespace

void Thresholds::validate() const {
  if (!(eps_pred > 0.0)) {
    throw ConfigError("thresholds.eps_pred: must be positive");
  }
  if (!(eps_kl > 0.0)) {
    throw ConfigError("thresholds.eps_kl: must be positive");
  }
  if (!(eps_samples >= 0.0 && eps_samples <= 1.0)) {
    throw ConfigError("thresholds.eps_samples: must lie in [0, 1]");
  }
  if (!(eps_mach > 0.0)) {
    throw ConfigError("thresholds.eps_mach: must be positive");
  }
  if (q_min < 1) {
    throw ConfigError("thresholds.q_min: must be positive");
  }
  if (q_max < q_min) {
    throw ConfigError("thresholds.q_max: must be at least q_min");
  }
  if (resample_increment < 0) {
    throw ConfigError("thresholds.resample_increment: must be nonnegative");
  }
  if (max_increments < 0) {
    throw ConfigError("thresholds.max_increments: must be nonnegative");
  }
}

std::string_view to_string(Decision decision) {
  switch (decision) {
    case Decision::accepted_reweight:
      return "Accepted-Reweight";
    case Decision::accepted_resample:
      return "Accepted-Resample";
    case Decision::control1:
      return "Control1";
    case Decision::control2:
      return "Control2";
    case Decision::control3:
      return "Control3";
    case Decision::control4:
      return "Control4";
    case Decision::skipped:
      return "Skipped";
  }
  return "Skipped";
}

Decision decision_from_string(std::string_view text) {
  for (const auto d : {Decision::accepted_reweight, Decision::accepted_resample, Decision::control1,
                       Decision::control2, Decision::control3, Decision::control4, Decision::skipped}) {
    if (to_string(d) == text) {
      return d;
    }
  }
  throw std::invalid_argument("unknown decision '" + std::string{text} + "'");
}

bool is_terminal(Decision decision) {
  return decision == Decision::accepted_reweight || decision == Decision::accepted_resample ||
         decision == Decision::skipped;
}

void ParameterEnsemble::validate() const {
  if (samples.rows() < 10) {
    throw std::invalid_argument("ensemble needs at least ten samples");
  }
  if (weights.size() != samples.rows()) {
    throw DimensionMismatch("ensemble weights do not match sample count");
  }
  if (!weights.allFinite() || (weights.array() < 0.0).any() || !(weights.array() > 0.0).any()) {
    throw std::invalid_argument("ensemble weights must be finite, nonnegative and not all zero");
  }
}

double effective_sample_fraction(const Eigen::VectorXd& weights, double eps_mach) {
  if (weights.size() == 0) {
    throw std::invalid_argument("effective_sample_fraction of an empty weight vector");
  }
  if ((weights.array() < 0.0).any() || !weights.allFinite()) {
    throw std::invalid_argument("weights must be finite and nonnegative");
  }
  const double total = weights.sum();
  if (!(total > 0.0)) {
    throw WeightCollapse("all weights are zero");
  }
  const auto count = ((weights.array() / total) > eps_mach).count();
  return static_cast<double>(count) / static_cast<double>(weights.size());
}

bool detect_change_point(double expected_ratio, double kl_dci, const Thresholds& thresholds) {
  return std::abs(expected_ratio - 1.0) >= thresholds.eps_pred && kl_dci > thresholds.eps_kl;
}

bool detect_change_point(const WindowRecord& record, const Thresholds& thresholds) {
  return detect_change_point(record.expected_ratio, record.kl_dci, thresholds);
}

EngineState initial_state(const EngineConfig& config) {
  config.thresholds.validate();
  if (config.ensemble_size < 10) {
    throw ConfigError("ensemble_size: must be at least 10");
  }
  Rng rng{config.seed};
  ParameterEnsemble ensemble;
  ensemble.samples = config.initial_density.sample(config.ensemble_size, rng);
  ensemble.weights = Eigen::VectorXd::Ones(config.ensemble_size);
  ensemble.generation = 0;
  ensemble.rng_seed = config.seed;
  return EngineState{std::move(ensemble), config.initial_density, rng, 0, std::nullopt};
}

WindowOutcome run_window(const EngineState& state, const DataPacket& packet, ForwardModel& model,
                         const EngineConfig& config) {
  validate_packet(packet);
  state.ensemble.validate();
  const Thresholds& th = config.thresholds;
  th.validate();
  if (state.ensemble.dimension() != config.initial_density.dimension()) {
    throw DimensionMismatch("ensemble dimension does not match the configured initial density");
  }

  EngineState next = state;
  Rng& rng = next.rng;
  Eigen::MatrixXd samples = state.ensemble.samples;
  Eigen::VectorXd weights = state.ensemble.weights;
  int generation = state.ensemble.generation;
  ParameterDensity base = state.base_density;
  const bool can_simulate = model.can_simulate_new_samples();

  Eigen::MatrixXd simulated = simulate_checked(model, samples, packet);

  const auto n = static_cast<int>(packet.size());
  const auto structural_q = [&] { return static_cast<int>(std::min<Eigen::Index>(n, samples.rows() - 1)); };
  int q = std::min(th.q_max, structural_q());
  const int q_floor = std::min(th.q_min, q);

  WindowRecord record;
  record.window_index = packet.window_index;
  int increments = 0;
  bool drift_handled = false;
  std::optional<MudSolution<double>> accepted;

  for (;;) {
    Attempt attempt;
    attempt.q = q;
    attempt.sample_count = samples.rows();
    std::optional<MudSolution<double>> candidate;
    try {
      candidate = mud_estimate(packet.values, packet.sigmas, samples, weights, simulated, q, config.centering);
      attempt.expected_ratio = candidate->dci.expected_ratio;
      attempt.kl_dci = candidate->dci.kl_dci;
    } catch (const DegenerateDimension&) {
      attempt.failure = "DegenerateDimension";
    } catch (const RankDeficient&) {
      attempt.failure = "RankDeficient";
    } catch (const PredictedUnderflow&) {
      attempt.failure = "PredictedUnderflow";
    }
    if (!candidate) {
      attempt.expected_ratio = kNaN;
      attempt.kl_dci = kNaN;
    }
    record.q_used = q;
    record.expected_ratio = attempt.expected_ratio;
    record.kl_dci = attempt.kl_dci;
    record.kl_dci_raw = candidate ? candidate->dci.kl_dci_raw : kNaN;

    if (candidate && std::abs(candidate->dci.expected_ratio - 1.0) < th.eps_pred) {
      accepted = std::move(candidate);
      record.attempts.push_back(attempt);
      break;
    }

    if (candidate && !drift_handled && detect_change_point(attempt.expected_ratio, attempt.kl_dci, th)) {
      record.change_point_flag = true;
      drift_handled = true;
      const ParameterDensity& reset = config.drift_density();
      bool applied = false;
      if (config.drift_response == DriftResponse::reweight || !can_simulate) {
        const Eigen::VectorXd w = reset.evaluate(samples);
        if ((w.array() > 0.0).any()) {
          weights = w / w.mean();
          attempt.action = Decision::control3;
          applied = true;
        }
      }
      if (!applied && can_simulate) {
        samples = reset.sample(config.ensemble_size, rng);
        weights = Eigen::VectorXd::Ones(samples.rows());
        ++generation;
        base = reset;
        simulated = simulate_checked(model, samples, packet);
        attempt.action = Decision::control4;
        applied = true;
      }
      if (applied) {
        q = std::min(q, structural_q());
        record.attempts.push_back(attempt);
        continue;
      }
    }

    if (q > q_floor) {
      --q;
      attempt.action = Decision::control1;
      record.attempts.push_back(attempt);
      continue;
    }

    if (th.resample_increment > 0 && increments < th.max_increments && can_simulate) {
      const Eigen::MatrixXd extra =
          draw_increment(samples, weights, base, config.support, th.resample_increment, rng, model);
      const Eigen::MatrixXd extra_simulated = simulate_checked(model, extra, packet);
      const double fill_weight = weights.mean();
      const Eigen::Index old_k = samples.rows();
      samples.conservativeResize(old_k + extra.rows(), Eigen::NoChange);
      samples.bottomRows(extra.rows()) = extra;
      simulated.conservativeResize(old_k + extra.rows(), Eigen::NoChange);
      simulated.bottomRows(extra.rows()) = extra_simulated;
      weights.conservativeResize(old_k + extra.rows());
      weights.tail(extra.rows()).setConstant(fill_weight);
      ++increments;
      attempt.action = Decision::control2;
      record.attempts.push_back(attempt);
      continue;
    }

    attempt.action = Decision::skipped;
    record.attempts.push_back(attempt);
    break;
  }

  Eigen::MatrixXd updated_samples;
  Eigen::VectorXd updated_weights;
  if (accepted) {
    const Eigen::VectorXd updated = weights.cwiseProduct(accepted->dci.ratios);
    if (!(updated.array() > 0.0).any()) {
      throw WeightCollapse("window " + std::to_string(packet.window_index) + ": every updated weight is zero");
    }
    record.eff_fraction = effective_sample_fraction(updated, th.eps_mach);
    record.mud_point = accepted->mud_point;
    updated_samples = samples;
    updated_weights = updated;

    if (record.eff_fraction <= th.eps_samples && can_simulate) {
      std::optional<ParameterDensity> resampling;
      samples = draw_from_kernel(samples, updated, config.support, config.ensemble_size, rng, model, true, &resampling);
      weights = Eigen::VectorXd::Ones(samples.rows());
      ++generation;
      base = std::move(*resampling);
      record.decision = Decision::accepted_resample;
    } else {
      weights = updated / updated.mean();
      record.decision = Decision::accepted_reweight;
    }
    record.attempts.back().action = record.decision;
    next.ensemble.samples = std::move(samples);
    next.ensemble.weights = std::move(weights);
    next.ensemble.generation = generation;
    next.base_density = std::move(base);
    next.last_estimate = record.mud_point;
  } else {
    record.decision = Decision::skipped;
    record.mud_point = state.last_estimate ? *state.last_estimate
                                           : weighted_mean(state.ensemble.samples, state.ensemble.weights);
    record.eff_fraction = effective_sample_fraction(state.ensemble.weights, th.eps_mach);
    updated_samples = state.ensemble.samples;
    updated_weights = state.ensemble.weights;
  }
  record.sample_count = next.ensemble.size();
  record.generation = next.ensemble.generation;
  next.last_window = packet.window_index;

  model.assimilate(updated_samples, updated_weights);
  model.advance(record.mud_point, packet);

  return WindowOutcome{std::move(record), std::move(next), std::move(updated_samples), std::move(updated_weights)};
}

SequentialEngine::SequentialEngine(EngineConfig config, ForwardModel& model)
    : config_{std::move(config)}, model_{&model}, state_{initial_state(config_)} {}

SequentialEngine::SequentialEngine(EngineConfig config, ForwardModel& model, EngineState state)
    : config_{std::move(config)}, model_{&model}, state_{std::move(state)} {
  config_.thresholds.validate();
}

WindowOutcome SequentialEngine::process(const DataPacket& packet) {
  if (packet.window_index <= state_.last_window) {
    throw ProtocolViolation("packet for window " + std::to_string(packet.window_index) +
                            " arrived after window " + std::to_string(state_.last_window));
  }
  WindowOutcome outcome = run_window(state_, packet, *model_, config_);
  state_ = outcome.next;
  return outcome;
}

SequentialResult sequential_mud(const EngineConfig& config, const std::vector<DataPacket>& packets,
                                ForwardModel& model) {
  SequentialEngine engine{config, model};
  SequentialResult result;
  result.records.reserve(packets.size());
  for (const auto& packet : packets) {
    result.records.push_back(engine.process(packet).record);
  }
  result.final_ensemble = engine.state().ensemble;
  return result;
}

}  // namespace sdci
