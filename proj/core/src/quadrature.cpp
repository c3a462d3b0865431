#include "gradobs/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include "gradobs/errors.hpp"

namespace gradobs {
namespace {

// Nodes/weights on [-1,1] by Newton iteration on the Legendre recurrence.
// Symmetric pairs are generated together; converges to ~1e-16 in < 10 sweeps.
void gauss_legendre_unit(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 64; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 0; k < n; ++k) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1.0) * z * p1 - k * p2) / (k + 1.0);
      }
      // p0 = P_n(z); derivative from the standard identity.
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
  if (n % 2 == 1) x[half - 1] = 0.0;
}

}  // namespace

void gauss_legendre(int order, double lo, double hi,
                    std::vector<double>& nodes, std::vector<double>& weights) {
  if (order < 1) throw ConfigError("quadrature order must be >= 1");
  if (!(lo < hi)) throw ConfigError("quadrature range must satisfy lo < hi");
  std::vector<double> x, w;
  gauss_legendre_unit(order, x, w);
  nodes.resize(order);
  weights.resize(order);
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  for (int k = 0; k < order; ++k) {
    nodes[k] = mid + half * x[k];
    weights[k] = half * w[k];
  }
}

QuadratureGrid make_grid(const Subregion& region, int order) {
  QuadratureGrid grid;
  grid.region = region;
  grid.order = order;
  std::vector<double> n1, w1, n2, w2;
  gauss_legendre(order, region.lo[0], region.hi[0], n1, w1);
  if (region.dim == 1) {
    grid.nodes.resize(order);
    grid.weights.resize(order);
    for (int k = 0; k < order; ++k) {
      grid.nodes[k] = {n1[k], 0.0};
      grid.weights[k] = w1[k];
    }
    return grid;
  }
  gauss_legendre(order, region.lo[1], region.hi[1], n2, w2);
  grid.nodes.resize(static_cast<size_t>(order) * order);
  grid.weights.resize(static_cast<Eigen::Index>(order) * order);
  for (int k1 = 0; k1 < order; ++k1)
    for (int k2 = 0; k2 < order; ++k2) {
      const int k = k1 * order + k2;
      grid.nodes[k] = {n1[k1], n2[k2]};
      grid.weights[k] = w1[k1] * w2[k2];
    }
  return grid;
}

double integrate(const QuadratureGrid& grid, const Eigen::VectorXd& samples) {
  if (samples.size() != grid.weights.size())
    throw std::invalid_argument("integrate: sample count does not match grid size");
  return grid.weights.dot(samples);
}

}  // namespace gradobs
