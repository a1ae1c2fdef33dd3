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

#ifndef SDCI_MODELS_HEAT_HPP
#define SDCI_MODELS_HEAT_HPP

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <sdci/forward_model.hpp>
#include <sdci/models/grid.hpp>
#include <sdci/models/kl_field.hpp>
#include <sdci/models/measurement.hpp>

namespace sdci::models {

/// f(x, y, t).
using Forcing = std::function<double(double, double, double)>;
/// u0(x, y).
using InitialCondition = std::function<double(double, double)>;

/// 10 sin(6 pi t) x + 10 cos(4 pi t) y.
[[nodiscard]] Forcing default_forcing();
/// exp(-5 |x|^2).
[[nodiscard]] InitialCondition default_initial_condition();

/// Nodal values of u0 with the boundary set to zero.
[[nodiscard]] Eigen::VectorXd initial_field(const Grid2D& grid, const InitialCondition& u0);

/**
 * Backward-Euler stepper for u_t = k(x) lap(u) + f with homogeneous Dirichlet data.
 *
 * The 5-point Laplacian acts on interior nodes. Dividing each row by k gives the SPD system
 * (diag(1/k) - dt L) u_new = (u_old + dt f(t_new)) / k, factored once at construction.
 */
class HeatStepper {
 public:
  HeatStepper(const Grid2D& grid, const Eigen::VectorXd& diffusivity, double dt, Forcing forcing);
  ~HeatStepper();
  HeatStepper(HeatStepper&&) noexcept;
  HeatStepper& operator=(HeatStepper&&) noexcept;

  /// Advances nodal values from step `step` to `step + 1`.
  [[nodiscard]] Eigen::VectorXd step(const Eigen::VectorXd& u, long step) const;

  [[nodiscard]] const Grid2D& grid() const noexcept { return grid_; }
  [[nodiscard]] double dt() const noexcept { return dt_; }

 private:
  struct Factor;

  Grid2D grid_;
  double dt_;
  Forcing forcing_;
  Eigen::VectorXd inv_k_;
  std::vector<Eigen::Index> interior_;
  Eigen::MatrixX2d interior_xy_;
  std::unique_ptr<Factor> factor_;
};

struct HeatSeries {
  Eigen::VectorXd times;
  /// One column per time, nodal values.
  Eigen::MatrixXd states;
};

/**
 * Solves from t = 0 to T and returns every `stride`-th step (always including t = 0 and T).
 *
 * \throws SolverFailure if the factorization fails.
 */
[[nodiscard]] HeatSeries heat_solve(const Eigen::VectorXd& diffusivity, const Grid2D& grid, double dt, double T,
                                    const Forcing& forcing, const InitialCondition& u0, long stride = 1);

/// Precomputed bilinear stencils for fixed sensor locations.
class SensorInterpolator {
 public:
  SensorInterpolator(const Grid2D& grid, const Eigen::MatrixX2d& locations);

  [[nodiscard]] double at(Eigen::Index sensor, const Eigen::VectorXd& nodal) const;
  [[nodiscard]] Eigen::VectorXd all(const Eigen::VectorXd& nodal) const;
  [[nodiscard]] Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(nodes_.size()); }

 private:
  std::vector<std::array<Eigen::Index, 4>> nodes_;
  std::vector<std::array<double, 4>> weights_;
};

/// Readings of a stored series at every sensor and time (time-major order).
[[nodiscard]] std::vector<Observation> heat_observations(const HeatSeries& series, const Grid2D& grid,
                                                         const SensorSet& sensors);

/**
 * Heat forward model parameterized by KL coefficients of log k.
 *
 * Each sample is integrated from t = 0. The latest state of every sample simulated since the
 * previous window is cached, so a re-weighted sample continues from where it stopped.
 */
class HeatModel final : public ForwardModel {
 public:
  struct Options {
    double dt{0.0025};
    Forcing forcing{default_forcing()};
    InitialCondition initial{default_initial_condition()};
  };

  HeatModel(KlField field, SensorSet sensors);
  HeatModel(KlField field, SensorSet sensors, Options options);

  Eigen::MatrixXd simulate(const Eigen::MatrixXd& samples, const DataPacket& packet) override;
  void advance(const Eigen::VectorXd& estimate, const DataPacket& packet) override;

  [[nodiscard]] const KlField& field() const noexcept { return field_; }
  [[nodiscard]] const SensorSet& sensors() const noexcept { return sensors_; }
  [[nodiscard]] std::size_t cached_samples() const noexcept { return cache_.size(); }
  /// Total time steps taken so far (for cost accounting).
  [[nodiscard]] long steps_taken() const noexcept { return steps_taken_; }

 private:
  struct CacheEntry {
    long step{0};
    Eigen::VectorXd u;
    bool touched{true};
  };

  [[nodiscard]] long step_of(double t) const;

  KlField field_;
  SensorSet sensors_;
  Options options_;
  SensorInterpolator interpolator_;
  Eigen::VectorXd u0_;
  std::map<std::vector<double>, CacheEntry> cache_;
  long steps_taken_{0};
};

}  // namespace sdci::models

#endif
