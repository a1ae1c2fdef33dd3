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

#ifndef SDCI_QOI_HPP
#define SDCI_QOI_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

#include <sdci/dci.hpp>
#include <sdci/errors.hpp>
#include <sdci/kde.hpp>

/**
 * \file
 * \brief Learned quantity-of-interest maps and maximal-updated-density estimation.
 */

namespace sdci {

/// z-scored residuals between simulated and observed measurements; row i is sample i.
template <typename Scalar = double>
struct ResidualMatrix {
  MatrixX<Scalar> values;

  [[nodiscard]] Eigen::Index samples() const noexcept { return values.rows(); }
  [[nodiscard]] Eigen::Index measurements() const noexcept { return values.cols(); }
};

/// X_ij = (M_ij - d_j) / sigma_j.
template <typename DerivedM, typename DerivedD, typename DerivedS>
ResidualMatrix<typename DerivedM::Scalar> residual_matrix(const Eigen::MatrixBase<DerivedM>& simulated,
                                                          const Eigen::MatrixBase<DerivedD>& data,
                                                          const Eigen::MatrixBase<DerivedS>& sigmas) {
  using Scalar = typename DerivedM::Scalar;
  if (data.size() != simulated.cols() || sigmas.size() != simulated.cols()) {
    throw DimensionMismatch("data, sigmas and simulated columns must agree");
  }
  for (Eigen::Index j = 0; j < sigmas.size(); ++j) {
    if (!(sigmas(j) > 0) || !std::isfinite(static_cast<double>(sigmas(j)))) {
      throw InvalidNoiseModel("noise standard deviation at measurement " + std::to_string(j) +
                              " must be positive");
    }
  }
  const auto d = data.derived().template cast<Scalar>();
  const auto s = sigmas.derived().template cast<Scalar>();
  MatrixX<Scalar> values =
      (simulated.rowwise() - d.transpose()).array().rowwise() / s.transpose().array();
  return ResidualMatrix<Scalar>{std::move(values)};
}

/// How residuals are centered before the principal directions are found.
enum class PcaCentering { column_mean, none };

/// Top principal directions of a residual matrix; rows of `components` are unit vectors.
template <typename Scalar = double>
struct QoiMap {
  MatrixX<Scalar> components;
  VectorX<Scalar> explained_variance;
  VectorX<Scalar> column_means;

  [[nodiscard]] Eigen::Index q() const noexcept { return components.rows(); }
};

/**
 * Learns a `q`-component QoI map from the residual matrix.
 *
 * Components are the leading right singular vectors of the (optionally column-centered)
 * residuals, sign-normalized so that each component's largest-magnitude entry is positive.
 * Explained variances are squared singular values over k - 1.
 *
 * \throws RankDeficient when fewer than `q` directions carry variance.
 */
template <typename Scalar>
QoiMap<Scalar> learn_qpca(const ResidualMatrix<Scalar>& X, Eigen::Index q,
                          PcaCentering centering = PcaCentering::column_mean) {
  const Eigen::Index k = X.samples();
  const Eigen::Index n = X.measurements();
  if (k < 2) {
    throw std::invalid_argument("learn_qpca needs at least two samples");
  }
  if (q < 1) {
    throw std::invalid_argument("q must be positive");
  }
  const Eigen::Index structural = std::min(k - 1, n);
  if (q > structural) {
    throw RankDeficient(static_cast<std::size_t>(q), static_cast<std::size_t>(structural));
  }

  VectorX<Scalar> means = VectorX<Scalar>::Zero(n);
  if (centering == PcaCentering::column_mean) {
    means = X.values.colwise().mean().transpose();
  }
  const MatrixX<Scalar> centered = X.values.rowwise() - means.transpose();

  Eigen::BDCSVD<MatrixX<Scalar>> svd(centered, Eigen::ComputeThinV);
  const VectorX<Scalar>& singular = svd.singularValues();

  const Scalar tolerance = static_cast<Scalar>(std::max(k, n)) * std::numeric_limits<Scalar>::epsilon() *
                           std::max(X.values.norm(), std::numeric_limits<Scalar>::min());
  Eigen::Index rank = 0;
  while (rank < singular.size() && singular(rank) > tolerance) {
    ++rank;
  }
  if (q > rank) {
    throw RankDeficient(static_cast<std::size_t>(q), static_cast<std::size_t>(rank));
  }

  QoiMap<Scalar> map;
  map.components = svd.matrixV().leftCols(q).transpose();
  map.explained_variance = singular.head(q).array().square() / static_cast<Scalar>(k - 1);
  map.column_means = std::move(means);
  for (Eigen::Index l = 0; l < q; ++l) {
    Eigen::Index largest = 0;
    map.components.row(l).cwiseAbs().maxCoeff(&largest);
    if (map.components(l, largest) < Scalar(0)) {
      map.components.row(l) *= Scalar(-1);
    }
  }
  return map;
}

/// QoI samples: entry (i, l) = sum_j p^(l)_j X_ij on the uncentered residuals.
template <typename Scalar>
MatrixX<Scalar> apply_qpca(const QoiMap<Scalar>& map, const ResidualMatrix<Scalar>& X) {
  if (X.measurements() != map.components.cols()) {
    throw DimensionMismatch("residual columns do not match QoI map length");
  }
  return X.values * map.components.transpose();
}

template <typename Scalar = double>
struct MudSolution {
  VectorX<Scalar> mud_point;
  Eigen::Index mud_index{};
  DciResult<Scalar> dci;
  QoiMap<Scalar> qoi_map;
  MatrixX<Scalar> qoi_samples;
};

/// Index maximizing w_i r_i; ties go to the lowest index.
template <typename DerivedW, typename DerivedR>
Eigen::Index argmax_updated(const Eigen::MatrixBase<DerivedW>& weights, const Eigen::MatrixBase<DerivedR>& ratios) {
  Eigen::Index best = 0;
  auto best_value = weights(0) * ratios(0);
  for (Eigen::Index i = 1; i < ratios.size(); ++i) {
    const auto value = weights(i) * ratios(i);
    if (value > best_value) {
      best_value = value;
      best = i;
    }
  }
  return best;
}

/**
 * Sample-based MUD estimate from one batch of data.
 *
 * Builds z-scored residuals, learns a `q`-component PCA map, inverts against a
 * standard-normal observed density and returns the sample maximizing weight times ratio.
 */
template <typename DerivedD, typename DerivedS, typename DerivedL, typename DerivedW, typename DerivedM>
MudSolution<typename DerivedL::Scalar> mud_estimate(const Eigen::MatrixBase<DerivedD>& data,
                                                    const Eigen::MatrixBase<DerivedS>& sigmas,
                                                    const Eigen::MatrixBase<DerivedL>& samples,
                                                    const Eigen::MatrixBase<DerivedW>& weights,
                                                    const Eigen::MatrixBase<DerivedM>& simulated, Eigen::Index q,
                                                    PcaCentering centering = PcaCentering::column_mean) {
  using Scalar = typename DerivedL::Scalar;
  if (samples.rows() != simulated.rows() || weights.size() != samples.rows()) {
    throw DimensionMismatch("samples, weights and simulated rows must agree");
  }
  auto X = residual_matrix(simulated.template cast<Scalar>(), data, sigmas);
  auto map = learn_qpca(X, q, centering);
  MatrixX<Scalar> qoi = apply_qpca(map, X);
  const VectorX<Scalar> w = weights.template cast<Scalar>();
  auto dci = wdci(qoi, w, ObservedDensity<Scalar>{StandardNormalProduct{q}});
  const Eigen::Index index = argmax_updated(w, dci.ratios);
  return MudSolution<Scalar>{samples.row(index).transpose(), index, std::move(dci), std::move(map), std::move(qoi)};
}

/// Linear map Q(lambda) = A lambda + b with Gaussian initial and observed densities.
template <typename Scalar = double>
struct LinearGaussianProblem {
  MatrixX<Scalar> A;
  VectorX<Scalar> b;
  VectorX<Scalar> lambda_init;
  MatrixX<Scalar> sigma_init;
  MatrixX<Scalar> sigma_obs;
};

template <typename Scalar = double>
struct LinearGaussianMud {
  VectorX<Scalar> mud_point;
  MatrixX<Scalar> updated_cov;
};

/**
 * Closed-form MUD point and updated covariance for a linear-Gaussian problem:
 * \f[
 *   \lambda^\mathrm{MUD} = \lambda_0 + \Sigma_0 A^\top \Sigma_p^{-1}(-b - A\lambda_0), \qquad
 *   \Sigma_u = \Sigma_0 - \Sigma_0 A^\top \Sigma_p^{-1}[\Sigma_p - \Sigma_o]\Sigma_p^{-1} A \Sigma_0,
 * \f]
 * with \f$\Sigma_p = A\Sigma_0A^\top\f$.
 */
template <typename Scalar>
LinearGaussianMud<Scalar> linear_gaussian_mud(const LinearGaussianProblem<Scalar>& problem) {
  const auto& A = problem.A;
  const Eigen::Index q = A.rows();
  const Eigen::Index p = A.cols();
  if (problem.b.size() != q || problem.lambda_init.size() != p || problem.sigma_init.rows() != p ||
      problem.sigma_init.cols() != p || problem.sigma_obs.rows() != q || problem.sigma_obs.cols() != q) {
    throw DimensionMismatch("linear-Gaussian problem has inconsistent shapes");
  }
  const MatrixX<Scalar> sigma_pred = A * problem.sigma_init * A.transpose();
  Eigen::LDLT<MatrixX<Scalar>> factor(sigma_pred);
  // rcond() is unreliable when a pivot is exactly zero, so the pivots are checked directly.
  const VectorX<Scalar> pivots = factor.vectorD();
  const Scalar largest = pivots.cwiseAbs().maxCoeff();
  if (factor.info() != Eigen::Success || !factor.isPositive() || !(largest > Scalar(0)) ||
      pivots.minCoeff() <= Scalar(16) * std::numeric_limits<Scalar>::epsilon() * largest ||
      factor.rcond() < Scalar(16) * std::numeric_limits<Scalar>::epsilon()) {
    throw SingularPrediction("predicted covariance A Sigma_init A^T is singular");
  }
  const MatrixX<Scalar> gain = problem.sigma_init * A.transpose();  // p x q
  const VectorX<Scalar> innovation = -problem.b - A * problem.lambda_init;
  LinearGaussianMud<Scalar> out;
  out.mud_point = problem.lambda_init + gain * factor.solve(innovation);
  const MatrixX<Scalar> left = factor.solve(gain.transpose());  // Sigma_pred^{-1} A Sigma_init, q x p
  out.updated_cov = problem.sigma_init - left.transpose() * (sigma_pred - problem.sigma_obs) * left;
  return out;
}

}  // namespace sdci

#endif
