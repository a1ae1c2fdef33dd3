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

#ifndef SDCI_KDE_HPP
#define SDCI_KDE_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include <sdci/errors.hpp>
#include <sdci/random.hpp>

/**
 * \file
 * \brief Weighted Gaussian product-kernel density estimation.
 *
 * The estimate at a query point \f$x\f$ is
 * \f[
 *   \hat\pi(x) = \frac{1}{\sum_i w_i} \sum_{i=1}^k w_i \prod_{j=1}^q \frac{1}{h_j\sqrt{2\pi}}
 *                \exp\left(-\frac{(x_j - x^{(i)}_j)^2}{2 h_j^2}\right)
 * \f]
 * with diagonal bandwidths chosen by Scott's rule.
 */

namespace sdci {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

namespace detail {

template <typename Derived>
void require_nonnegative_weights(const Eigen::MatrixBase<Derived>& weights) {
  using Scalar = typename Derived::Scalar;
  if (weights.size() == 0) {
    throw std::invalid_argument("weights must not be empty");
  }
  bool any_positive = false;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    const Scalar w = weights(i);
    if (!(w >= Scalar(0)) || !std::isfinite(static_cast<double>(w))) {
      throw std::invalid_argument("weights must be finite and nonnegative");
    }
    any_positive = any_positive || w > Scalar(0);
  }
  if (!any_positive) {
    throw std::invalid_argument("at least one weight must be positive");
  }
}

}  // namespace detail

/// Weighted effective sample count \f$(\sum w)^2 / \sum w^2\f$.
template <typename Derived>
typename Derived::Scalar effective_sample_count(const Eigen::MatrixBase<Derived>& weights) {
  const auto total = weights.sum();
  return total * total / weights.squaredNorm();
}

/**
 * Per-dimension Scott's-rule bandwidths for weighted samples.
 *
 * \f$h_j = k_\mathrm{eff}^{-1/(q+4)} s_j\f$ where \f$s_j\f$ is the weighted standard
 * deviation of column \f$j\f$ with the reliability-weight (unbiased) correction, which
 * reduces to the usual sample standard deviation for equal weights.
 *
 * \throws DegenerateDimension when a column has zero weighted variance.
 */
template <typename DerivedP, typename DerivedW>
VectorX<typename DerivedP::Scalar> scott_bandwidths(const Eigen::MatrixBase<DerivedP>& points,
                                                    const Eigen::MatrixBase<DerivedW>& weights) {
  using Scalar = typename DerivedP::Scalar;
  const Eigen::Index k = points.rows();
  const Eigen::Index q = points.cols();
  if (k < 2) {
    throw std::invalid_argument("scott_bandwidths needs at least two samples");
  }
  if (weights.size() != k) {
    throw DimensionMismatch("weights length does not match sample count");
  }
  detail::require_nonnegative_weights(weights);

  const VectorX<Scalar> w = weights.template cast<Scalar>() / weights.maxCoeff();
  const Scalar total = w.sum();
  const Scalar correction = total - w.squaredNorm() / total;
  const Scalar k_eff = effective_sample_count(w);
  const Scalar factor = std::pow(k_eff, Scalar(-1) / Scalar(q + 4));

  VectorX<Scalar> bandwidths(q);
  for (Eigen::Index j = 0; j < q; ++j) {
    const Scalar mean = w.dot(points.col(j)) / total;
    const Scalar variance = correction > Scalar(0)
                                ? (w.array() * (points.col(j).array() - mean).square()).sum() / correction
                                : Scalar(0);
    if (!(variance > Scalar(0))) {
      throw DegenerateDimension(static_cast<std::size_t>(j));
    }
    bandwidths(j) = factor * std::sqrt(variance);
  }
  return bandwidths;
}

/**
 * Weighted Gaussian product-kernel density estimate.
 *
 * Immutable after construction, so evaluation is safe from many threads.
 */
template <typename Scalar = double>
class DensityEstimate {
 public:
  using Matrix = MatrixX<Scalar>;
  using Vector = VectorX<Scalar>;

  DensityEstimate(Matrix points, Vector weights, Vector bandwidths)
      : points_{std::move(points)}, weights_{std::move(weights)}, bandwidths_{std::move(bandwidths)} {
    if (points_.rows() < 1 || points_.cols() < 1) {
      throw std::invalid_argument("density estimate needs at least one point of positive dimension");
    }
    if (weights_.size() != points_.rows()) {
      throw DimensionMismatch("weights length does not match sample count");
    }
    if (bandwidths_.size() != points_.cols()) {
      throw DimensionMismatch("bandwidth count does not match dimension");
    }
    detail::require_nonnegative_weights(weights_);
    if (!(bandwidths_.array() > Scalar(0)).all()) {
      throw std::invalid_argument("bandwidths must be positive");
    }
    normalizer_ = weights_.sum();
    inverse_bandwidths_ = bandwidths_.cwiseInverse();
    const Scalar root_two_pi = std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar>);
    kernel_constant_ = Scalar(1);
    for (Eigen::Index j = 0; j < bandwidths_.size(); ++j) {
      kernel_constant_ /= root_two_pi * bandwidths_(j);
    }
  }

  [[nodiscard]] Eigen::Index dimension() const noexcept { return points_.cols(); }
  [[nodiscard]] Eigen::Index size() const noexcept { return points_.rows(); }
  [[nodiscard]] const Matrix& points() const noexcept { return points_; }
  [[nodiscard]] const Vector& weights() const noexcept { return weights_; }
  [[nodiscard]] const Vector& bandwidths() const noexcept { return bandwidths_; }
  [[nodiscard]] Scalar normalizer() const noexcept { return normalizer_; }

  /// Density at a single point; underflows to zero far from the support.
  template <typename Derived>
  Scalar operator()(const Eigen::MatrixBase<Derived>& query) const {
    if (query.size() != dimension()) {
      throw DimensionMismatch("query dimension does not match density dimension");
    }
    Scalar sum{0};
    for (Eigen::Index i = 0; i < points_.rows(); ++i) {
      if (weights_(i) == Scalar(0)) {
        continue;
      }
      Scalar exponent{0};
      for (Eigen::Index j = 0; j < points_.cols(); ++j) {
        const Scalar z = (static_cast<Scalar>(query(j)) - points_(i, j)) * inverse_bandwidths_(j);
        exponent += z * z;
      }
      sum += weights_(i) * std::exp(Scalar(-0.5) * exponent);
    }
    return kernel_constant_ * sum / normalizer_;
  }

  /// Density at each row of `queries`.
  template <typename Derived>
  Vector evaluate(const Eigen::MatrixBase<Derived>& queries) const {
    if (queries.cols() != dimension()) {
      throw DimensionMismatch("query dimension does not match density dimension");
    }
    Vector values(queries.rows());
    for (Eigen::Index m = 0; m < queries.rows(); ++m) {
      values(m) = (*this)(queries.row(m).transpose());
    }
    return values;
  }

  /// Draws `count` points: a support point chosen by weight plus Gaussian kernel noise.
  /// The chosen support rows are appended to `sources` when given.
  Matrix sample(Eigen::Index count, Rng& rng, std::vector<Eigen::Index>* sources = nullptr) const {
    Vector cumulative(weights_.size());
    Scalar running{0};
    for (Eigen::Index i = 0; i < weights_.size(); ++i) {
      running += weights_(i);
      cumulative(i) = running;
    }
    Matrix draws(count, dimension());
    for (Eigen::Index n = 0; n < count; ++n) {
      const Scalar u = uniform<Scalar>(rng, Scalar(0), running);
      const auto* first = cumulative.data();
      const auto* last = first + cumulative.size();
      auto index = static_cast<Eigen::Index>(std::upper_bound(first, last, u) - first);
      index = std::min(index, size() - 1);
      while (weights_(index) == Scalar(0)) {
        --index;
      }
      for (Eigen::Index j = 0; j < dimension(); ++j) {
        draws(n, j) = points_(index, j) + bandwidths_(j) * standard_normal<Scalar>(rng);
      }
      if (sources != nullptr) {
        sources->push_back(index);
      }
    }
    return draws;
  }

 private:
  Matrix points_;
  Vector weights_;
  Vector bandwidths_;
  Vector inverse_bandwidths_;
  Scalar normalizer_{};
  Scalar kernel_constant_{};
};

/// Weighted KDE with Scott's-rule bandwidths.
template <typename DerivedP, typename DerivedW>
DensityEstimate<typename DerivedP::Scalar> wkde_fit(const Eigen::MatrixBase<DerivedP>& points,
                                                    const Eigen::MatrixBase<DerivedW>& weights) {
  using Scalar = typename DerivedP::Scalar;
  VectorX<Scalar> bandwidths = scott_bandwidths(points, weights);
  return DensityEstimate<Scalar>{points, weights.template cast<Scalar>(), std::move(bandwidths)};
}

/// Unweighted KDE (all weights one).
template <typename DerivedP>
DensityEstimate<typename DerivedP::Scalar> wkde_fit(const Eigen::MatrixBase<DerivedP>& points) {
  using Scalar = typename DerivedP::Scalar;
  return wkde_fit(points, VectorX<Scalar>::Ones(points.rows()));
}

template <typename Scalar, typename Derived>
VectorX<Scalar> density_eval(const DensityEstimate<Scalar>& estimate, const Eigen::MatrixBase<Derived>& queries) {
  return estimate.evaluate(queries);
}

}  // namespace sdci

#endif
