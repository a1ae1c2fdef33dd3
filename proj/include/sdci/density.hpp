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

#ifndef SDCI_DENSITY_HPP
#define SDCI_DENSITY_HPP

#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include <sdci/kde.hpp>
#include <sdci/random.hpp>

namespace sdci {

/// Axis-aligned box in parameter space.
struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  [[nodiscard]] bool contains(const Eigen::VectorXd& x) const;
};

struct UniformBox {
  Box box;
};

struct GaussianDiagonal {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
};

/// KDE density, optionally truncated to a box (draws outside the box are rejected).
struct KernelDensity {
  DensityEstimate<double> estimate;
  std::optional<Box> support;
};

/**
 * Explicit parameter-space density: the initial density of a generation.
 *
 * Used to draw ensembles (initial, Control 2 increments, Control 4 resets, resampling)
 * and to evaluate Control 3 re-weighting.
 */
class ParameterDensity {
 public:
  using Kind = std::variant<UniformBox, GaussianDiagonal, KernelDensity>;

  ParameterDensity(UniformBox kind);        // NOLINT(google-explicit-constructor)
  ParameterDensity(GaussianDiagonal kind);  // NOLINT(google-explicit-constructor)
  ParameterDensity(KernelDensity kind);     // NOLINT(google-explicit-constructor)

  [[nodiscard]] Eigen::Index dimension() const;
  [[nodiscard]] const Kind& kind() const noexcept { return kind_; }

  /// Draws `count` samples as rows.
  ///
  /// For kernel densities the support row each draw came from is appended to `sources`;
  /// other kinds append -1.
  Eigen::MatrixXd sample(Eigen::Index count, Rng& rng, std::vector<Eigen::Index>* sources = nullptr) const;

  /// Density at each row of `points` (unnormalized for truncated kernel densities).
  [[nodiscard]] Eigen::VectorXd evaluate(const Eigen::MatrixXd& points) const;

 private:
  Kind kind_;
};

}  // namespace sdci

#endif
