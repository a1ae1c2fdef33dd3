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

#include <cmath>
#include <numbers>
#include <set>

#include <gtest/gtest.h>

#include <sdci/errors.hpp>
#include <sdci/models/grid.hpp>
#include <sdci/models/heat.hpp>
#include <sdci/models/kl_field.hpp>
#include <sdci/models/linear.hpp>
#include <sdci/models/measurement.hpp>
#include <sdci/models/seirs.hpp>

namespace sdci::models {
namespace {

TEST(Grid, QuadratureAndNorm) {
  const Grid2D grid{16, -2.0, 2.0};
  EXPECT_EQ(grid.node_count(), 17 * 17);
  EXPECT_NEAR(grid.quadrature_weights().sum(), 16.0, 1e-12);
  EXPECT_NEAR(l2_norm(grid, Eigen::VectorXd::Ones(grid.node_count())), 4.0, 1e-12);
}

TEST(Grid, BilinearIsExactForBilinearFunctions) {
  const Grid2D grid{8, -2.0, 2.0};
  const Eigen::MatrixX2d xy = grid.coordinates();
  const Eigen::VectorXd f = (1.0 + 2.0 * xy.col(0).array() - 0.5 * xy.col(1).array() +
                             0.25 * xy.col(0).array() * xy.col(1).array()).matrix();
  for (auto [x, y] : {std::pair{0.13, -1.7}, std::pair{1.99, 0.4}, std::pair{-2.0, 2.0}}) {
    EXPECT_NEAR(bilinear(grid, f, x, y), 1.0 + 2.0 * x - 0.5 * y + 0.25 * x * y, 1e-12);
  }
  EXPECT_THROW((void)bilinear(grid, f, 2.5, 0.0), InvalidSensor);
}

TEST(Measurement, SensorIdsRoundTrip) {
  EXPECT_EQ(sensor_id(7), "s0007");
  EXPECT_EQ(sensor_index("s0007"), 7);
  EXPECT_EQ(sensor_index(sensor_id(12345)), 12345);
  EXPECT_THROW((void)sensor_index("x12"), InvalidSensor);
  EXPECT_THROW((void)sensor_index("s1a"), InvalidSensor);
}

TEST(Measurement, PacketizeUsesHalfOpenWindows) {
  std::vector<Observation> obs;
  for (double t : {0.5, 1.0, 1.001, 2.0, 2.5}) obs.push_back({t, t, 0.1, "s0000"});
  const auto packets = packetize(obs, 1.0);
  ASSERT_EQ(packets.size(), 3u);
  EXPECT_EQ(packets[0].window_index, 1);
  EXPECT_EQ(packets[0].size(), 2);
  EXPECT_EQ(packets[1].size(), 2);
  EXPECT_EQ(packets[2].window_index, 3);
  EXPECT_EQ(window_of(1.0, 1.0), 1);
  EXPECT_EQ(window_of(1.5, 1.0), 2);
  EXPECT_EQ(window_of(15.0, 14.0, 1.0), 1);
}

TEST(Measurement, NoiseIsReproducibleAndScaled) {
  std::vector<Observation> obs(20000, Observation{1.0, 0.0, 0.3, "s0000"});
  auto a = obs;
  auto b = obs;
  add_noise(a, 9);
  add_noise(b, 9);
  double sum = 0.0;
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].value, b[i].value);
    sum += a[i].value;
    sq += a[i].value * a[i].value;
  }
  const double n = static_cast<double>(a.size());
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(std::sqrt(sq / n), 0.3, 0.01);
}

TEST(Measurement, RandomSensorsInsideDomain) {
  const Grid2D grid{};
  const SensorSet s = random_sensors(grid, 500, Eigen::VectorXd::LinSpaced(3, 0.1, 0.3), 0.05, 4);
  EXPECT_EQ(s.locations.rows(), 500);
  EXPECT_TRUE((s.locations.array() > -2.0).all() && (s.locations.array() < 2.0).all());
  EXPECT_EQ(random_sensors(grid, 500, s.times, 0.05, 4).locations, s.locations);
}

TEST(Linear, SimulatesAffineMap) {
  const LinearModel m = random_linear_model(5, 3, 2);
  auto obs = linear_observations(m, Eigen::Vector3d(1, 2, 3), 2, 1.0, 0.1);
  const auto packets = packetize(obs, 1.0);
  ASSERT_EQ(packets.size(), 2u);
  LinearModel copy = m;
  Eigen::MatrixXd samples(2, 3);
  samples << 1, 2, 3, 0, 0, 0;
  const Eigen::MatrixXd sim = copy.simulate(samples, packets[1]);
  EXPECT_TRUE(sim.row(0).transpose().isApprox(packets[1].values, 1e-14));
  EXPECT_TRUE(sim.row(1).transpose().isApprox(m.b(), 1e-14));
}

TEST(Seirs, ConservesPopulation) {
  const SeirsTrajectory t = rk4_simulate(reference_schedule(), reference_initial_state(), 0.1, 364.0);
  EXPECT_EQ(t.times.size(), 3641);
  EXPECT_LT((t.states.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-10);
  EXPECT_TRUE((t.states.array() >= 0.0).all());
}

TEST(Seirs, MatchesAnalyticDecayWithoutInfection) {
  // With lambda1 = 0 the exposed class decays as exp(-lambda2 t).
  const SeirsParams p{0.0, 1.0 / 7.0, 1.0 / 14.0, 1.0 / 365.0, 0.0};
  const SeirsState x0{0.9, 0.1, 0.0, 0.0};
  const SeirsTrajectory t = rk4_simulate(p, x0, 0.1, 28.0);
  for (Eigen::Index i = 0; i < t.times.size(); i += 35) {
    EXPECT_NEAR(t.states(i, 1), 0.1 * std::exp(-t.times(i) / 7.0), 1e-10);
  }
}

TEST(Seirs, ShiftsApplyAtStepBoundary) {
  const ShiftSchedule s = reference_schedule();
  EXPECT_EQ(s.at(24.9).lambda1, s.initial().lambda1);
  EXPECT_EQ(s.at(25.0).lambda1, 0.5 / 14.0);
  EXPECT_EQ(s.at(150.0).lambda2, 1.0 / 3.5);
  EXPECT_THROW((ShiftSchedule{s.initial(), {{5.0, s.initial()}, {5.0, s.initial()}}}), std::invalid_argument);
}

TEST(Seirs, ObservationsPickStoredSteps) {
  const SeirsTrajectory t = rk4_simulate(reference_schedule(), reference_initial_state(), 0.1, 10.0);
  const auto obs = seirs_observations(t, Eigen::Vector2d(1.0, 10.0), 0.005);
  EXPECT_EQ(obs[0].value, t.states(10, 2));
  EXPECT_EQ(obs[1].value, t.states(100, 2));
  EXPECT_EQ(obs[1].sensor_id, "s0002");
  EXPECT_THROW((void)seirs_observations(t, Eigen::VectorXd::Constant(1, 11.0), 0.005), std::invalid_argument);
}

TEST(Seirs, ModelReproducesTruthForTrueRates) {
  const ShiftSchedule schedule = reference_schedule();
  const SeirsTrajectory truth = rk4_simulate(schedule, reference_initial_state(), 0.1, 28.0);
  Eigen::VectorXd days(28);
  for (int d = 0; d < 28; ++d) days(d) = d + 1;
  const auto packets = packetize(seirs_observations(truth, days, 0.005), 14.0);
  SeirsModel model{reference_initial_state()};
  Eigen::MatrixXd samples(2, 4);
  samples.row(0) = schedule.initial().rates().transpose();
  samples.row(1) = 1.1 * schedule.initial().rates().transpose();
  const Eigen::MatrixXd sim = model.simulate(samples, packets[0]);
  EXPECT_LT((sim.row(0).transpose() - packets[0].values).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_GT((sim.row(1).transpose() - packets[0].values).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Seirs, StateRoundTripsThroughJson) {
  const SeirsTrajectory truth = rk4_simulate(reference_schedule(), reference_initial_state(), 0.1, 28.0);
  Eigen::VectorXd days(28);
  for (int d = 0; d < 28; ++d) days(d) = d + 1;
  const auto packets = packetize(seirs_observations(truth, days, 0.005), 14.0);
  SeirsModel a{reference_initial_state()};
  Eigen::MatrixXd samples = reference_schedule().initial().rates().transpose().replicate(3, 1);
  samples.col(0) *= 0.0;
  samples(1, 0) = 0.1;
  samples(2, 0) = 0.3;
  (void)a.simulate(samples, packets[0]);
  a.assimilate(samples, Eigen::Vector3d(1.0, 2.0, 1.0));
  a.advance(samples.row(1).transpose(), packets[0]);
  SeirsModel b{reference_initial_state()};
  b.load_state(a.save_state());
  EXPECT_EQ(b.time(), a.time());
  EXPECT_EQ(a.simulate(samples, packets[1]), b.simulate(samples, packets[1]));
  EXPECT_NEAR(a.state().sum(), 1.0, 1e-12);
}

TEST(Seirs, KnownCarryNeedsTrajectory) {
  SeirsModel::Options o;
  o.carry = SeirsModel::Carry::known;
  EXPECT_THROW((SeirsModel{reference_initial_state(), o}), std::invalid_argument);
}

TEST(KlField, OrthonormalModesAndOrderedEigenvalues) {
  const Grid2D grid{16, -2.0, 2.0};
  const KlField f = kl_decompose(grid, 0.0, 0.2, 0.5, 6);
  const Eigen::VectorXd w = grid.quadrature_weights();
  const Eigen::MatrixXd gram = f.modes * w.asDiagonal() * f.modes.transpose();
  EXPECT_TRUE(gram.isApprox(Eigen::MatrixXd::Identity(6, 6), 1e-9));
  for (Eigen::Index i = 1; i < 6; ++i) EXPECT_LE(f.eigenvalues(i), f.eigenvalues(i - 1) * (1 + 1e-12));
  EXPECT_GT(f.eigenvalues(5), 0.0);
  EXPECT_GT(f.energy_fraction, 0.0);
  EXPECT_LE(f.energy_fraction, 1.0);
  EXPECT_TRUE(kl_realize(f, Eigen::VectorXd::Zero(6)).isApprox(Eigen::VectorXd::Ones(grid.node_count())));
}

TEST(KlField, KroneckerAgreesWithDense) {
  const Grid2D grid{8, -2.0, 2.0};
  const KlField k = kl_decompose(grid, 0.0, 0.2, 0.7, 5, KlMethod::kronecker);
  const KlField d = kl_decompose(grid, 0.0, 0.2, 0.7, 5, KlMethod::dense);
  EXPECT_TRUE(k.eigenvalues.isApprox(d.eigenvalues, 1e-9));
  // Leading mode is simple, so it agrees up to sign.
  const double dot = std::abs((k.modes.row(0).array() * d.modes.row(0).array() * grid.quadrature_weights().transpose().array()).sum());
  EXPECT_NEAR(dot, 1.0, 1e-8);
}

TEST(Heat, DiscreteEigenmodeDecaysExactly) {
  const Grid2D grid{16, -2.0, 2.0};
  const double a = std::numbers::pi / 4.0;
  const auto mode = [a](double x, double y) { return std::sin(a * (x + 2.0)) * std::sin(a * (y + 2.0)); };
  const Forcing zero = [](double, double, double) { return 0.0; };
  const double dt = 0.01;
  const HeatSeries s = heat_solve(Eigen::VectorXd::Ones(grid.node_count()), grid, dt, 0.1, zero, mode, 5);
  ASSERT_EQ(s.times.size(), 3);
  const double h = grid.spacing();
  const double mu = 2.0 * 4.0 / (h * h) * std::pow(std::sin(a * h / 2.0), 2);
  const Eigen::VectorXd u0 = initial_field(grid, mode);
  EXPECT_LT((s.states.col(2) - u0 * std::pow(1.0 + dt * mu, -10)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Heat, ModelMatchesDirectSolve) {
  const Grid2D grid{12, -2.0, 2.0};
  const KlField field = kl_decompose(grid, 0.0, 0.2, 0.5, 3);
  Eigen::VectorXd times(4);
  times << 0.05, 0.1, 0.15, 0.2;
  const SensorSet sensors = random_sensors(grid, 6, times, 0.05, 1);
  const Eigen::Vector3d xi(0.5, -1.0, 0.3);
  const HeatSeries series = heat_solve(kl_realize(field, xi), grid, 0.0025, 0.2, default_forcing(),
                                       default_initial_condition(), 20);
  const auto packets = packetize(heat_observations(series, grid, sensors), 0.1);
  ASSERT_EQ(packets.size(), 2u);
  HeatModel model{field, sensors};
  Eigen::MatrixXd samples(1, 3);
  samples.row(0) = xi.transpose();
  EXPECT_LT((model.simulate(samples, packets[0]).row(0).transpose() - packets[0].values).cwiseAbs().maxCoeff(), 1e-12);
  model.advance(xi, packets[0]);
  // The cached state continues into the next window.
  EXPECT_LT((model.simulate(samples, packets[1]).row(0).transpose() - packets[1].values).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(model.steps_taken(), 80);
}

TEST(Heat, RejectsBadDiffusivity) {
  const Grid2D grid{4, -2.0, 2.0};
  Eigen::VectorXd k = Eigen::VectorXd::Ones(grid.node_count());
  k(12) = -1.0;
  EXPECT_THROW((HeatStepper{grid, k, 0.01, default_forcing()}), SolverFailure);
}

}  // namespace
}  // namespace sdci::models
