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

#include <sdci/models/grid.hpp>

#include <algorithm>
#include <cmath>
#include <string>

#include <sdci/errors.hpp>

namespace sdci::models {

Eigen::MatrixX2d Grid2D::coordinates() const {
  Eigen::MatrixX2d xy(node_count(), 2);
  for (int j = 0; j < nodes_per_axis(); ++j) {
    for (int i = 0; i < nodes_per_axis(); ++i) {
      xy(node(i, j), 0) = coordinate(i);
      xy(node(i, j), 1) = coordinate(j);
    }
  }
  return xy;
}

Eigen::VectorXd Grid2D::axis_weights() const {
  Eigen::VectorXd w = Eigen::VectorXd::Constant(nodes_per_axis(), spacing());
  w(0) *= 0.5;
  w(cells) *= 0.5;
  return w;
}

Eigen::VectorXd Grid2D::quadrature_weights() const {
  const Eigen::VectorXd w1 = axis_weights();
  Eigen::VectorXd w(node_count());
  for (int j = 0; j < nodes_per_axis(); ++j) {
    for (int i = 0; i < nodes_per_axis(); ++i) {
      w(node(i, j)) = w1(i) * w1(j);
    }
  }
  return w;
}

double bilinear(const Grid2D& grid, const Eigen::VectorXd& nodal, double x, double y) {
  if (!grid.contains(x, y)) {
    throw InvalidSensor("point (" + std::to_string(x) + ", " + std::to_string(y) + ") lies outside the domain");
  }
  const double h = grid.spacing();
  const double sx = (x - grid.lower) / h;
  const double sy = (y - grid.lower) / h;
  const int i = std::clamp(static_cast<int>(std::floor(sx)), 0, grid.cells - 1);
  const int j = std::clamp(static_cast<int>(std::floor(sy)), 0, grid.cells - 1);
  const double fx = sx - i;
  const double fy = sy - j;
  return (1.0 - fx) * (1.0 - fy) * nodal(grid.node(i, j)) + fx * (1.0 - fy) * nodal(grid.node(i + 1, j)) +
         (1.0 - fx) * fy * nodal(grid.node(i, j + 1)) + fx * fy * nodal(grid.node(i + 1, j + 1));
}

double l2_norm(const Grid2D& grid, const Eigen::VectorXd& nodal) {
  return std::sqrt((grid.quadrature_weights().array() * nodal.array().square()).sum());
}

}  // namespace sdci::models
