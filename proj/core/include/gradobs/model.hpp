#pragma once

#include <vector>

#include <Eigen/Core>

#include "gradobs/geometry.hpp"

namespace gradobs {

/// Diffusion-reaction dynamics  dx/dt = gamma1 * Laplace(x) + gamma2 * x  on a
/// Dirichlet interval or rectangle, truncated to a finite sine-mode basis.
/// gamma1 > 0; truncation keeps modes 1..n1 (interval) or the full tensor
/// block {1..n1} x {1..n2} (rectangle).
struct DiffusionModel {
  DomainGeometry geometry;
  double gamma1 = 1.0;
  double gamma2 = 0.0;
  int n1 = 16;
  int n2 = 0;  // ignored on interval domains

  int mode_count() const { return geometry.dim == 1 ? n1 : n1 * n2; }
};

/// Validates coefficients, truncation and geometry; throws ConfigError.
void validate_model(const DiffusionModel& model);

struct EigenPair {
  ModeIndex index;
  double lambda = 0.0;
};

/// lambda = gamma2 - gamma1 * (n pi / a)^2 on the interval,
/// lambda = gamma2 - gamma1 * pi^2 (i^2/a1^2 + j^2/a2^2) on the rectangle.
double eigenvalue(const DiffusionModel& model, const ModeIndex& m);

/// Laplacian part kappa_m = (n pi / a)^2 or pi^2 (i^2/a1^2 + j^2/a2^2); the
/// positive Dirichlet eigenvalue, independent of gamma1/gamma2.
double dirichlet_eigenvalue(const DiffusionModel& model, const ModeIndex& m);

/// All retained eigenpairs sorted by descending lambda; ties broken by
/// lexicographic mode index. This ordering fixes modal coefficient layout
/// everywhere (states, output matrices, reports).
std::vector<EigenPair> eigenpairs(const DiffusionModel& model);

/// Position of a mode inside eigenpairs(model); -1 when not retained.
int mode_position(const DiffusionModel& model, const ModeIndex& m);

/// L2(Omega)-orthonormal eigenfunction value at p (p in the closure; zero on
/// the boundary). Throws std::domain_error outside the closure.
double evaluate_mode(const DiffusionModel& model, const ModeIndex& m, const Point& p);

/// Spatial gradient of the eigenfunction at p; out[ax] = d phi / d xi_ax.
void mode_gradient(const DiffusionModel& model, const ModeIndex& m, const Point& p,
                   double out[2]);

/// Second derivatives: out[ax1][ax2] = d^2 phi / (d xi_ax1 d xi_ax2).
void mode_hessian(const DiffusionModel& model, const ModeIndex& m, const Point& p,
                  double out[2][2]);

/// Outward normal derivative d phi / d nu at a boundary point. Throws
/// std::domain_error when p is not on the boundary (within tol * length).
double mode_normal_derivative(const DiffusionModel& model, const ModeIndex& m,
                              const Point& p, double tol = 1e-12);

/// One exact mild-solution step per mode:
///   a_m <- exp(lambda_m dt) a_m + phi1(lambda_m dt) dt b_m
/// where b_m is the modal forcing held constant over the step and
/// phi1(z) = (e^z - 1)/z (continuously 1 at z = 0). Exact for piecewise
/// constant forcing; dt >= 0.
Eigen::VectorXd mild_solution_step(const std::vector<EigenPair>& pairs,
                                   const Eigen::VectorXd& state,
                                   const Eigen::VectorXd& forcing, double dt);

/// Forcing-free convenience overload.
Eigen::VectorXd mild_solution_step(const std::vector<EigenPair>& pairs,
                                   const Eigen::VectorXd& state, double dt);

}  // namespace gradobs
