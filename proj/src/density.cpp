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

#include <sdci/density.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <sdci/errors.hpp>

namespace sdci {

namespace {

// Rejection attempts per draw before a truncated KDE draw is clamped into its box.
constexpr int kMaxRejections = 1000;

void check_box(const Box& box) {
  if (box.lower.size() != box.upper.size() || box.lower.size() == 0) {
    throw DimensionMismatch("box bounds must have equal positive length");
  }
  if (!(box.upper.array() > box.lower.array()).all()) {
    throw std::invalid_argument("box upper bounds must exceed lower bounds");
  }
}

}  // namespace

bool Box::contains(const Eigen::VectorXd& x) const {
  return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
}

ParameterDensity::ParameterDensity(UniformBox kind) : kind_{std::move(kind)} {
  check_box(std::get<UniformBox>(kind_).box);
}

ParameterDensity::ParameterDensity(GaussianDiagonal kind) : kind_{std::move(kind)} {
  const auto& g = std::get<GaussianDiagonal>(kind_);
  if (g.mean.size() != g.variance.size() || g.mean.size() == 0) {
    throw DimensionMismatch("gaussian mean and variance sizes differ");
  }
  if (!(g.variance.array() > 0.0).all()) {
    throw std::invalid_argument("gaussian variances must be positive");
  }
}

ParameterDensity::ParameterDensity(KernelDensity kind) : kind_{std::move(kind)} {
  const auto& k = std::get<KernelDensity>(kind_);
  if (k.support) {
    check_box(*k.support);
    if (k.support->lower.size() != k.estimate.dimension()) {
      throw DimensionMismatch("support box dimension does not match kernel density");
    }
  }
}

Eigen::Index ParameterDensity::dimension() const {
  return std::visit(
      [](const auto& k) -> Eigen::Index {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, UniformBox>) {
          return k.box.lower.size();
        } else if constexpr (std::is_same_v<K, GaussianDiagonal>) {
          return k.mean.size();
        } else {
          return k.estimate.dimension();
        }
      },
      kind_);
}

Eigen::MatrixXd ParameterDensity::sample(Eigen::Index count, Rng& rng, std::vector<Eigen::Index>* sources) const {
  const Eigen::Index p = dimension();
  Eigen::MatrixXd draws(count, p);
  if (const auto* u = std::get_if<UniformBox>(&kind_)) {
    for (Eigen::Index i = 0; i < count; ++i) {
      for (Eigen::Index j = 0; j < p; ++j) {
        draws(i, j) = uniform(rng, u->box.lower(j), u->box.upper(j));
      }
    }
    if (sources != nullptr) {
      sources->insert(sources->end(), static_cast<std::size_t>(count), -1);
    }
  } else if (const auto* g = std::get_if<GaussianDiagonal>(&kind_)) {
    for (Eigen::Index i = 0; i < count; ++i) {
      for (Eigen::Index j = 0; j < p; ++j) {
        draws(i, j) = g->mean(j) + std::sqrt(g->variance(j)) * standard_normal(rng);
      }
    }
    if (sources != nullptr) {
      sources->insert(sources->end(), static_cast<std::size_t>(count), -1);
    }
  } else {
    const auto& k = std::get<KernelDensity>(kind_);
    for (Eigen::Index i = 0; i < count; ++i) {
      std::vector<Eigen::Index> from;
      Eigen::VectorXd x = k.estimate.sample(1, rng, &from).row(0).transpose();
      if (k.support) {
        int attempts = 1;
        while (!k.support->contains(x) && attempts < kMaxRejections) {
          from.clear();
          x = k.estimate.sample(1, rng, &from).row(0).transpose();
          ++attempts;
        }
        x = x.cwiseMax(k.support->lower).cwiseMin(k.support->upper);
      }
      draws.row(i) = x.transpose();
      if (sources != nullptr) {
        sources->push_back(from.front());
      }
    }
  }
  return draws;
}

Eigen::VectorXd ParameterDensity::evaluate(const Eigen::MatrixXd& points) const {
  if (points.cols() != dimension()) {
    throw DimensionMismatch("points do not match parameter dimension");
  }
  Eigen::VectorXd values(points.rows());
  if (const auto* u = std::get_if<UniformBox>(&kind_)) {
    const double volume = (u->box.upper - u->box.lower).prod();
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      values(i) = u->box.contains(points.row(i).transpose()) ? 1.0 / volume : 0.0;
    }
  } else if (const auto* g = std::get_if<GaussianDiagonal>(&kind_)) {
    const double log_norm = -0.5 * (static_cast<double>(g->mean.size()) * std::log(2.0 * std::numbers::pi) +
                                    g->variance.array().log().sum());
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      const Eigen::ArrayXd z = (points.row(i).transpose() - g->mean).array();
      values(i) = std::exp(log_norm - 0.5 * (z.square() / g->variance.array()).sum());
    }
  } else {
    const auto& k = std::get<KernelDensity>(kind_);
    values = k.estimate.evaluate(points);
    if (k.support) {
      for (Eigen::Index i = 0; i < points.rows(); ++i) {
        if (!k.support->contains(points.row(i).transpose())) {
          values(i) = 0.0;
        }
      }
    }
  }
  return values;
}

}  // namespace sdci
