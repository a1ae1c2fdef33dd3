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

#include <sdci/models/kl_field.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>

#include <sdci/errors.hpp>

namespace sdci::models {

namespace {

void sign_normalize(Eigen::MatrixXd& modes) {
  for (Eigen::Index m = 0; m < modes.rows(); ++m) {
    Eigen::Index arg = 0;
    modes.row(m).cwiseAbs().maxCoeff(&arg);
    if (modes(m, arg) < 0.0) {
      modes.row(m) *= -1.0;
    }
  }
}

// Eigenpairs of W^{1/2} K W^{1/2}, sorted by decreasing eigenvalue.
struct SymmetricEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

SymmetricEigen weighted_eigen(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& weights) {
  const Eigen::VectorXd root = weights.cwiseSqrt();
  const Eigen::MatrixXd sym = root.asDiagonal() * kernel * root.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("covariance eigen-solve failed");
  }
  SymmetricEigen out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

Eigen::MatrixXd axis_kernel(const Grid2D& grid, double l) {
  const int n = grid.nodes_per_axis();
  Eigen::MatrixXd K(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const double d = grid.coordinate(a) - grid.coordinate(b);
      K(a, b) = std::exp(-d * d / (2.0 * l * l));
    }
  }
  return K;
}

double positive_floor(double largest, Eigen::Index size) {
  return static_cast<double>(size) * std::numeric_limits<double>::epsilon() * largest;
}

void check_arguments(double marginal_std, double correlation_length, Eigen::Index terms, const Grid2D& grid) {
  if (!(marginal_std >= 0.0)) {
    throw std::invalid_argument("marginal standard deviation must be nonnegative");
  }
  if (!(correlation_length > 0.0)) {
    throw std::invalid_argument("correlation length must be positive");
  }
  if (terms < 1 || terms > grid.node_count()) {
    throw std::invalid_argument("KL term count must lie in [1, node count]");
  }
}

}  // namespace

KlField kl_decompose(const Grid2D& grid, double mean_log, double marginal_std, double correlation_length,
                     Eigen::Index terms, KlMethod method) {
  check_arguments(marginal_std, correlation_length, terms, grid);
  const double variance = marginal_std * marginal_std;
  const double area = (grid.upper - grid.lower) * (grid.upper - grid.lower);

  KlField field;
  field.grid = grid;
  field.mean_log = mean_log;
  field.marginal_std = marginal_std;
  field.correlation_length = correlation_length;
  field.eigenvalues.resize(terms);
  field.modes.resize(terms, grid.node_count());
  // Unit-variance share; the trace of the weighted kernel equals the domain area.
  double retained = 0.0;

  if (method == KlMethod::kronecker) {
    const Eigen::VectorXd w = grid.axis_weights();
    const SymmetricEigen axis = weighted_eigen(axis_kernel(grid, correlation_length), w);
    const int n = grid.nodes_per_axis();
    const double floor = positive_floor(axis.values(0), n);
    std::vector<int> positive;
    for (int a = 0; a < n; ++a) {
      if (axis.values(a) > floor) {
        positive.push_back(a);
      }
    }
    struct Pair {
      double value;
      int a;
      int b;
    };
    std::vector<Pair> pairs;
    pairs.reserve(positive.size() * positive.size());
    for (int a : positive) {
      for (int b : positive) {
        pairs.push_back({axis.values(a) * axis.values(b), a, b});
      }
    }
    if (terms > static_cast<Eigen::Index>(pairs.size())) {
      throw RankDeficient(static_cast<std::size_t>(terms), pairs.size());
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
      if (x.value != y.value) {
        return x.value > y.value;
      }
      if (x.a + x.b != y.a + y.b) {
        return x.a + x.b < y.a + y.b;
      }
      return x.a < y.a;
    });
    const Eigen::VectorXd inv_root = w.cwiseSqrt().cwiseInverse();
    for (Eigen::Index m = 0; m < terms; ++m) {
      const Pair& p = pairs[static_cast<std::size_t>(m)];
      field.eigenvalues(m) = variance * p.value;
      retained += p.value;
      const Eigen::VectorXd phi_a = axis.vectors.col(p.a).cwiseProduct(inv_root);
      const Eigen::VectorXd phi_b = axis.vectors.col(p.b).cwiseProduct(inv_root);
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
          field.modes(m, grid.node(i, j)) = phi_a(i) * phi_b(j);
        }
      }
    }
  } else {
    const Eigen::MatrixX2d xy = grid.coordinates();
    const Eigen::Index N = grid.node_count();
    Eigen::MatrixXd K(N, N);
    for (Eigen::Index r = 0; r < N; ++r) {
      for (Eigen::Index c = 0; c < N; ++c) {
        const double d2 = (xy.row(r) - xy.row(c)).squaredNorm();
        K(r, c) = std::exp(-d2 / (2.0 * correlation_length * correlation_length));
      }
    }
    const Eigen::VectorXd w = grid.quadrature_weights();
    const SymmetricEigen full = weighted_eigen(K, w);
    const double floor = positive_floor(full.values(0), N);
    const auto positive = static_cast<Eigen::Index>((full.values.array() > floor).count());
    if (terms > positive) {
      throw RankDeficient(static_cast<std::size_t>(terms), static_cast<std::size_t>(positive));
    }
    const Eigen::VectorXd inv_root = w.cwiseSqrt().cwiseInverse();
    for (Eigen::Index m = 0; m < terms; ++m) {
      field.eigenvalues(m) = variance * full.values(m);
      retained += full.values(m);
      field.modes.row(m) = full.vectors.col(m).cwiseProduct(inv_root).transpose();
    }
  }
  sign_normalize(field.modes);
  field.energy_fraction = retained / area;
  return field;
}

Eigen::VectorXd kl_log_field(const KlField& field, const Eigen::Ref<const Eigen::VectorXd>& coefficients) {
  if (coefficients.size() != field.terms()) {
    throw DimensionMismatch("KL coefficient count does not match the number of terms");
  }
  const Eigen::VectorXd scaled = field.eigenvalues.cwiseSqrt().cwiseProduct(coefficients);
  return (field.modes.transpose() * scaled).array() + field.mean_log;
}

Eigen::VectorXd kl_realize(const KlField& field, const Eigen::Ref<const Eigen::VectorXd>& coefficients) {
  return kl_log_field(field, coefficients).array().exp();
}

}  // namespace sdci::models
