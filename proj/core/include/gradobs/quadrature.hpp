#pragma once

#include <vector>

#include <Eigen/Core>

#include "gradobs/geometry.hpp"

namespace gradobs {

/// Gauss-Legendre nodes and weights on [lo, hi]. Exact for polynomials of
/// degree <= 2*order - 1. order >= 1.
void gauss_legendre(int order, double lo, double hi,
                    std::vector<double>& nodes, std::vector<double>& weights);

/// Tensor-product Gauss-Legendre grid over an axis-aligned box. Nodes are
/// strictly interior to the box, so grids over a subregion never touch its
/// boundary.
struct QuadratureGrid {
  Subregion region;
  int order = 64;
  /// Flattened nodes, axis-2-major in 2D: node index k = k1 * n2 + k2.
  std::vector<Point> nodes;
  /// Product weights aligned with nodes.
  Eigen::VectorXd weights;

  int size() const { return static_cast<int>(nodes.size()); }
};

/// Build a grid of the given per-axis order over region.
QuadratureGrid make_grid(const Subregion& region, int order);

/// Integrate samples f(node_k) against the grid weights.
double integrate(const QuadratureGrid& grid, const Eigen::VectorXd& samples);

}  // namespace gradobs
