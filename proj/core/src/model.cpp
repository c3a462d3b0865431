#include "gradobs/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gradobs/errors.hpp"

namespace gradobs {
namespace {

void check_point(const DiffusionModel& model, const Point& p) {
  if (!inside_closure(p, model.geometry))
    throw std::domain_error("point lies outside the closure of the domain");
}

// phi1(z) = (e^z - 1)/z, continuous at 0; expm1 keeps small-z accuracy.
double phi1(double z) {
  if (z == 0.0) return 1.0;
  return std::expm1(z) / z;
}

}  // namespace

void validate_model(const DiffusionModel& model) {
  const auto& g = model.geometry;
  if (g.dim != 1 && g.dim != 2) throw ConfigError("geometry dim must be 1 or 2");
  for (int ax = 0; ax < g.dim; ++ax)
    if (!(g.length[ax] > 0.0)) throw ConfigError("domain lengths must be positive");
  if (!(model.gamma1 > 0.0)) throw ConfigError("gamma1 must be positive");
  if (!std::isfinite(model.gamma2)) throw ConfigError("gamma2 must be finite");
  if (model.n1 < 1) throw ConfigError("truncation n1 must be >= 1");
  if (g.dim == 2 && model.n2 < 1) throw ConfigError("truncation n2 must be >= 1");
}

double dirichlet_eigenvalue(const DiffusionModel& model, const ModeIndex& m) {
  const auto& g = model.geometry;
  if (g.dim == 1) {
    const double k = m.i * M_PI / g.length[0];
    return k * k;
  }
  const double r1 = m.i / g.length[0], r2 = m.j / g.length[1];
  return M_PI * M_PI * (r1 * r1 + r2 * r2);
}

double eigenvalue(const DiffusionModel& model, const ModeIndex& m) {
  return model.gamma2 - model.gamma1 * dirichlet_eigenvalue(model, m);
}

std::vector<EigenPair> eigenpairs(const DiffusionModel& model) {
  std::vector<EigenPair> pairs;
  if (model.geometry.dim == 1) {
    pairs.reserve(model.n1);
    for (int n = 1; n <= model.n1; ++n) {
      ModeIndex m = ModeIndex::interval(n);
      pairs.push_back({m, eigenvalue(model, m)});
    }
  } else {
    pairs.reserve(static_cast<size_t>(model.n1) * model.n2);
    for (int i = 1; i <= model.n1; ++i)
      for (int j = 1; j <= model.n2; ++j) {
        ModeIndex m = ModeIndex::rectangle(i, j);
        pairs.push_back({m, eigenvalue(model, m)});
      }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const EigenPair& a, const EigenPair& b) {
    if (a.lambda != b.lambda) return a.lambda > b.lambda;
    return a.index < b.index;
  });
  return pairs;
}

int mode_position(const DiffusionModel& model, const ModeIndex& m) {
  const auto pairs = eigenpairs(model);
  for (size_t k = 0; k < pairs.size(); ++k)
    if (pairs[k].index == m) return static_cast<int>(k);
  return -1;
}

double evaluate_mode(const DiffusionModel& model, const ModeIndex& m, const Point& p) {
  check_point(model, p);
  const auto& g = model.geometry;
  if (g.dim == 1) {
    const double a = g.length[0];
    return std::sqrt(2.0 / a) * std::sin(m.i * M_PI * p[0] / a);
  }
  const double a1 = g.length[0], a2 = g.length[1];
  return 2.0 / std::sqrt(a1 * a2) * std::sin(m.i * M_PI * p[0] / a1) *
         std::sin(m.j * M_PI * p[1] / a2);
}

void mode_gradient(const DiffusionModel& model, const ModeIndex& m, const Point& p,
                   double out[2]) {
  check_point(model, p);
  const auto& g = model.geometry;
  out[0] = out[1] = 0.0;
  if (g.dim == 1) {
    const double a = g.length[0], k = m.i * M_PI / a;
    out[0] = std::sqrt(2.0 / a) * k * std::cos(k * p[0]);
    return;
  }
  const double a1 = g.length[0], a2 = g.length[1];
  const double c = 2.0 / std::sqrt(a1 * a2);
  const double k1 = m.i * M_PI / a1, k2 = m.j * M_PI / a2;
  const double s1 = std::sin(k1 * p[0]), c1 = std::cos(k1 * p[0]);
  const double s2 = std::sin(k2 * p[1]), c2 = std::cos(k2 * p[1]);
  out[0] = c * k1 * c1 * s2;
  out[1] = c * k2 * s1 * c2;
}

void mode_hessian(const DiffusionModel& model, const ModeIndex& m, const Point& p,
                  double out[2][2]) {
  check_point(model, p);
  const auto& g = model.geometry;
  out[0][0] = out[0][1] = out[1][0] = out[1][1] = 0.0;
  if (g.dim == 1) {
    const double a = g.length[0], k = m.i * M_PI / a;
    out[0][0] = -std::sqrt(2.0 / a) * k * k * std::sin(k * p[0]);
    return;
  }
  const double a1 = g.length[0], a2 = g.length[1];
  const double c = 2.0 / std::sqrt(a1 * a2);
  const double k1 = m.i * M_PI / a1, k2 = m.j * M_PI / a2;
  const double s1 = std::sin(k1 * p[0]), c1 = std::cos(k1 * p[0]);
  const double s2 = std::sin(k2 * p[1]), c2 = std::cos(k2 * p[1]);
  out[0][0] = -c * k1 * k1 * s1 * s2;
  out[0][1] = out[1][0] = c * k1 * k2 * c1 * c2;
  out[1][1] = -c * k2 * k2 * s1 * s2;
}

double mode_normal_derivative(const DiffusionModel& model, const ModeIndex& m,
                              const Point& p, double tol) {
  check_point(model, p);
  const auto& g = model.geometry;
  double grad[2];
  mode_gradient(model, m, p, grad);
  for (int ax = 0; ax < g.dim; ++ax) {
    const double scale = tol * std::max(1.0, g.length[ax]);
    if (std::abs(p[ax]) <= scale) return -grad[ax];
    if (std::abs(p[ax] - g.length[ax]) <= scale) return grad[ax];
  }
  throw std::domain_error("normal derivative requested at an interior point");
}

Eigen::VectorXd mild_solution_step(const std::vector<EigenPair>& pairs,
                                   const Eigen::VectorXd& state,
                                   const Eigen::VectorXd& forcing, double dt) {
  const Eigen::Index M = static_cast<Eigen::Index>(pairs.size());
  if (state.size() != M) throw std::invalid_argument("mild step: state length mismatch");
  const bool forced = forcing.size() > 0;
  if (forced && forcing.size() != M)
    throw std::invalid_argument("mild step: forcing length mismatch");
  if (dt < 0.0) throw std::invalid_argument("mild step: dt must be >= 0");
  Eigen::VectorXd next(M);
  for (Eigen::Index k = 0; k < M; ++k) {
    const double z = pairs[k].lambda * dt;
    next[k] = std::exp(z) * state[k];
    if (forced) next[k] += dt * phi1(z) * forcing[k];
  }
  return next;
}

Eigen::VectorXd mild_solution_step(const std::vector<EigenPair>& pairs,
                                   const Eigen::VectorXd& state, double dt) {
  return mild_solution_step(pairs, state, Eigen::VectorXd(), dt);
}

}  // namespace gradobs
