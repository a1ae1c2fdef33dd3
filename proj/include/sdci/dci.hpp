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

#ifndef SDCI_DCI_HPP
#define SDCI_DCI_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include <sdci/errors.hpp>
#include <sdci/kde.hpp>

/**
 * \file
 * \brief Weighted data-consistent inversion: predicted density, update ratios and diagnostics.
 */

namespace sdci {

/// Product of independent standard normals in `dimension` coordinates.
struct StandardNormalProduct {
  Eigen::Index dimension{1};
};

/// Gaussian with diagonal covariance.
template <typename Scalar = double>
struct DiagonalGaussian {
  VectorX<Scalar> mean;
  VectorX<Scalar> variance;
};

/**
 * Tabulated density on a regular tensor grid, multilinearly interpolated and zero
 * outside the grid box. `values` is laid out with the first axis varying fastest.
 */
template <typename Scalar = double>
struct GridDensity {
  std::vector<VectorX<Scalar>> axes;
  VectorX<Scalar> values;
};

/// Arbitrary density supplied as a callable; used for test hooks and ad hoc observations.
template <typename Scalar = double>
struct CallableDensity {
  Eigen::Index dimension{1};
  std::function<Scalar(const VectorX<Scalar>&)> density;
};

template <typename Scalar = double>
class ObservedDensity {
 public:
  using Vector = VectorX<Scalar>;
  using Kind = std::variant<StandardNormalProduct, DiagonalGaussian<Scalar>, GridDensity<Scalar>,
                            CallableDensity<Scalar>>;

  ObservedDensity(StandardNormalProduct kind) : kind_{kind} {  // NOLINT(google-explicit-constructor)
    if (kind.dimension < 1) {
      throw std::invalid_argument("observed density dimension must be positive");
    }
  }

  ObservedDensity(DiagonalGaussian<Scalar> kind) : kind_{std::move(kind)} {  // NOLINT(google-explicit-constructor)
    const auto& g = std::get<DiagonalGaussian<Scalar>>(kind_);
    if (g.mean.size() != g.variance.size() || g.mean.size() < 1) {
      throw DimensionMismatch("gaussian mean and variance sizes differ");
    }
    if (!(g.variance.array() > Scalar(0)).all()) {
      throw std::invalid_argument("gaussian variances must be positive");
    }
  }

  ObservedDensity(GridDensity<Scalar> kind) : kind_{std::move(kind)} {  // NOLINT(google-explicit-constructor)
    const auto& g = std::get<GridDensity<Scalar>>(kind_);
    Eigen::Index total = 1;
    for (const auto& axis : g.axes) {
      if (axis.size() < 2) {
        throw std::invalid_argument("grid axes need at least two nodes");
      }
      for (Eigen::Index i = 1; i < axis.size(); ++i) {
        if (!(axis(i) > axis(i - 1))) {
          throw std::invalid_argument("grid axes must be strictly increasing");
        }
      }
      total *= axis.size();
    }
    if (g.axes.empty() || g.values.size() != total) {
      throw DimensionMismatch("grid values do not match axes");
    }
    if ((g.values.array() < Scalar(0)).any()) {
      throw std::invalid_argument("grid density values must be nonnegative");
    }
  }

  ObservedDensity(CallableDensity<Scalar> kind) : kind_{std::move(kind)} {}  // NOLINT(google-explicit-constructor)

  [[nodiscard]] Eigen::Index dimension() const {
    return std::visit(
        [](const auto& k) -> Eigen::Index {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, DiagonalGaussian<Scalar>>) {
            return k.mean.size();
          } else if constexpr (std::is_same_v<K, GridDensity<Scalar>>) {
            return static_cast<Eigen::Index>(k.axes.size());
          } else {
            return k.dimension;
          }
        },
        kind_);
  }

  [[nodiscard]] const Kind& kind() const noexcept { return kind_; }

  template <typename Derived>
  Scalar operator()(const Eigen::MatrixBase<Derived>& point) const {
    if (point.size() != dimension()) {
      throw DimensionMismatch("observed density evaluated at a point of wrong dimension");
    }
    const Vector x = point.template cast<Scalar>();
    return std::visit([&x](const auto& k) { return evaluate(k, x); }, kind_);
  }

 private:
  static Scalar evaluate(const StandardNormalProduct&, const Vector& x) {
    const Scalar log_norm = Scalar(-0.5) * static_cast<Scalar>(x.size()) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>);
    return std::exp(log_norm - Scalar(0.5) * x.squaredNorm());
  }

  static Scalar evaluate(const DiagonalGaussian<Scalar>& g, const Vector& x) {
    Scalar log_density{0};
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const Scalar d = x(j) - g.mean(j);
      log_density += Scalar(-0.5) * (std::log(Scalar(2) * std::numbers::pi_v<Scalar> * g.variance(j)) +
                                     d * d / g.variance(j));
    }
    return std::exp(log_density);
  }

  static Scalar evaluate(const GridDensity<Scalar>& g, const Vector& x) {
    const auto dims = static_cast<Eigen::Index>(g.axes.size());
    std::vector<Eigen::Index> lower(static_cast<std::size_t>(dims));
    std::vector<Scalar> fraction(static_cast<std::size_t>(dims));
    for (Eigen::Index d = 0; d < dims; ++d) {
      const auto& axis = g.axes[static_cast<std::size_t>(d)];
      if (x(d) < axis(0) || x(d) > axis(axis.size() - 1)) {
        return Scalar(0);
      }
      const auto* first = axis.data();
      auto upper = static_cast<Eigen::Index>(std::upper_bound(first, first + axis.size(), x(d)) - first);
      const Eigen::Index lo = std::clamp<Eigen::Index>(upper - 1, 0, axis.size() - 2);
      lower[static_cast<std::size_t>(d)] = lo;
      fraction[static_cast<std::size_t>(d)] = (x(d) - axis(lo)) / (axis(lo + 1) - axis(lo));
    }
    Scalar value{0};
    for (Eigen::Index corner = 0; corner < (Eigen::Index{1} << dims); ++corner) {
      Scalar coefficient{1};
      Eigen::Index flat = 0;
      Eigen::Index stride = 1;
      for (Eigen::Index d = 0; d < dims; ++d) {
        const bool up = ((corner >> d) & 1) != 0;
        const auto ud = static_cast<std::size_t>(d);
        coefficient *= up ? fraction[ud] : Scalar(1) - fraction[ud];
        flat += (lower[ud] + (up ? 1 : 0)) * stride;
        stride *= g.axes[ud].size();
      }
      if (coefficient != Scalar(0)) {
        value += coefficient * g.values(flat);
      }
    }
    return value;
  }

  static Scalar evaluate(const CallableDensity<Scalar>& c, const Vector& x) { return c.density(x); }

  Kind kind_;
};

/// Output of a weighted inversion.
template <typename Scalar = double>
struct DciResult {
  DensityEstimate<Scalar> predicted;
  VectorX<Scalar> ratios;
  Scalar expected_ratio{};
  /// Information gain clamped at zero.
  Scalar kl_dci{};
  /// Information gain before clamping; may be slightly negative from estimator noise.
  Scalar kl_dci_raw{};
  /// Factor applied to the caller's weights so that they average to one.
  Scalar weight_scale{};
};

/// Ratios below this predicted density count as underflow when the observed density is not negligible.
template <typename Scalar>
constexpr Scalar predicted_underflow_threshold() {
  constexpr long double threshold = 1e-300L;
  return threshold < static_cast<long double>(std::numeric_limits<Scalar>::min())
             ? std::numeric_limits<Scalar>::min()
             : static_cast<Scalar>(threshold);
}

/**
 * Weighted data-consistent inversion over QoI samples.
 *
 * Fits the predicted density with a weighted KDE and returns per-sample ratios of
 * observed to predicted density. The diagnostics use weights rescaled to mean one:
 * `expected_ratio` is the weighted mean of the ratios and `kl_dci` the weighted mean of
 * \f$r\log r\f$ (with \f$0\log 0 = 0\f$).
 *
 * Zero-weight samples carry no mass: if the predicted density underflows there the
 * ratio is set to zero instead of raising.
 *
 * \throws PredictedUnderflow if the predicted density underflows (below 1e-300) at a
 *         positively weighted sample where the observed density exceeds 1e-12.
 */
template <typename DerivedQ, typename DerivedW>
DciResult<typename DerivedQ::Scalar> wdci(const Eigen::MatrixBase<DerivedQ>& qoi_samples,
                                          const Eigen::MatrixBase<DerivedW>& weights,
                                          const ObservedDensity<typename DerivedQ::Scalar>& observed) {
  using Scalar = typename DerivedQ::Scalar;
  const Eigen::Index k = qoi_samples.rows();
  if (k < 10) {
    throw std::invalid_argument("wdci needs at least ten samples");
  }
  if (weights.size() != k) {
    throw DimensionMismatch("weights length does not match sample count");
  }
  if (observed.dimension() != qoi_samples.cols()) {
    throw DimensionMismatch("observed density dimension does not match QoI dimension");
  }
  if (!qoi_samples.allFinite()) {
    throw std::invalid_argument("QoI samples must be finite");
  }

  auto predicted = wkde_fit(qoi_samples, weights);
  const VectorX<Scalar> w = predicted.weights();
  const Scalar weight_scale = static_cast<Scalar>(k) / w.sum();

  constexpr Scalar pred_floor = predicted_underflow_threshold<Scalar>();
  const Scalar obs_floor = Scalar(1e-12);

  VectorX<Scalar> ratios(k);
  std::vector<std::size_t> underflow;
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto q = qoi_samples.row(i).transpose();
    const Scalar obs = observed(q);
    const Scalar pred = predicted(q);
    if (pred < pred_floor) {
      if (w(i) > Scalar(0) && obs > obs_floor) {
        underflow.push_back(static_cast<std::size_t>(i));
      }
      ratios(i) = Scalar(0);
      continue;
    }
    ratios(i) = obs / pred;
  }
  if (!underflow.empty()) {
    throw PredictedUnderflow(std::move(underflow));
  }

  Scalar expected{0};
  Scalar kl{0};
  for (Eigen::Index i = 0; i < k; ++i) {
    const Scalar wi = w(i) * weight_scale;
    const Scalar r = ratios(i);
    expected += wi * r;
    if (r > Scalar(0)) {
      kl += wi * r * std::log(r);
    }
  }
  expected /= static_cast<Scalar>(k);
  kl /= static_cast<Scalar>(k);

  return DciResult<Scalar>{std::move(predicted), std::move(ratios), expected, std::max(kl, Scalar(0)), kl,
                           weight_scale};
}

}  // namespace sdci

#endif
