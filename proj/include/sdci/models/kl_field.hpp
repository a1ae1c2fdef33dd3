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

#ifndef SDCI_MODELS_KL_FIELD_HPP
#define SDCI_MODELS_KL_FIELD_HPP

#include <Eigen/Dense>

#include <sdci/models/grid.hpp>

namespace sdci::models {

/// Truncated Karhunen-Loeve expansion of a Gaussian log-field on a grid.
struct KlField {
  Grid2D grid;
  double mean_log{0.0};
  double marginal_std{0.2};
  double correlation_length{0.1};
  /// Nonincreasing, positive.
  Eigen::VectorXd eigenvalues;
  /// M x nodes; orthonormal under the grid quadrature weights.
  Eigen::MatrixXd modes;
  /// Optional stored coefficients (empty until set).
  Eigen::VectorXd coefficients;
  /// Retained share of the discrete covariance trace.
  double energy_fraction{0.0};

  [[nodiscard]] Eigen::Index terms() const noexcept { return eigenvalues.size(); }
};

enum class KlMethod {
  /// Tensor product of 1D Nystrom eigenpairs (the covariance kernel factorizes per axis).
  kronecker,
  /// Full nodes x nodes eigenproblem; only practical on small grids.
  dense,
};

/**
 * Nystrom discretization of C(x, x') = sigma^2 exp(-|x - x'|^2 / (2 l^2)) with trapezoid weights.
 *
 * Modes are sign-normalized so their largest-magnitude node value is positive.
 * \throws RankDeficient when `terms` exceeds the numerically positive eigenvalue count.
 */
[[nodiscard]] KlField kl_decompose(const Grid2D& grid, double mean_log, double marginal_std,
                                   double correlation_length, Eigen::Index terms,
                                   KlMethod method = KlMethod::kronecker);

/// exp(mean_log + sum_j sqrt(lambda_j) xi_j psi_j) at every node.
[[nodiscard]] Eigen::VectorXd kl_realize(const KlField& field, const Eigen::Ref<const Eigen::VectorXd>& coefficients);

/// log-field before exponentiation.
[[nodiscard]] Eigen::VectorXd kl_log_field(const KlField& field,
                                           const Eigen::Ref<const Eigen::VectorXd>& coefficients);

}  // namespace sdci::models

#endif
