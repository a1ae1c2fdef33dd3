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

#ifndef SDCI_MODELS_GRID_HPP
#define SDCI_MODELS_GRID_HPP

#include <cstdint>

#include <Eigen/Dense>

namespace sdci::models {

/**
 * Uniform tensor grid on the square [lower, upper]^2 with `cells` cells per axis.
 *
 * Nodes are numbered with the x index varying fastest: node(i, j) = j * nodes_per_axis() + i.
 */
struct Grid2D {
  int cells{64};
  double lower{-2.0};
  double upper{2.0};

  [[nodiscard]] int nodes_per_axis() const noexcept { return cells + 1; }
  [[nodiscard]] Eigen::Index node_count() const noexcept {
    return static_cast<Eigen::Index>(nodes_per_axis()) * nodes_per_axis();
  }
  [[nodiscard]] double spacing() const noexcept { return (upper - lower) / cells; }
  [[nodiscard]] double coordinate(int i) const noexcept { return lower + i * spacing(); }
  [[nodiscard]] Eigen::Index node(int i, int j) const noexcept {
    return static_cast<Eigen::Index>(j) * nodes_per_axis() + i;
  }
  [[nodiscard]] bool on_boundary(int i, int j) const noexcept {
    return i == 0 || j == 0 || i == cells || j == cells;
  }

  /// Node coordinates, one row per node.
  [[nodiscard]] Eigen::MatrixX2d coordinates() const;
  /// 1D trapezoid weights along an axis.
  [[nodiscard]] Eigen::VectorXd axis_weights() const;
  /// Tensor-product trapezoid weights per node.
  [[nodiscard]] Eigen::VectorXd quadrature_weights() const;

  [[nodiscard]] bool contains(double x, double y) const noexcept {
    return x >= lower && x <= upper && y >= lower && y <= upper;
  }
};

/// Bilinear interpolation of nodal values; throws InvalidSensor outside the grid.
[[nodiscard]] double bilinear(const Grid2D& grid, const Eigen::VectorXd& nodal, double x, double y);

/// Discrete L2 norm under the grid's trapezoid quadrature.
[[nodiscard]] double l2_norm(const Grid2D& grid, const Eigen::VectorXd& nodal);

}  // namespace sdci::models

#endif
