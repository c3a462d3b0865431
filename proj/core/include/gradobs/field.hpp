#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "gradobs/model.hpp"
#include "gradobs/quadrature.hpp"

namespace gradobs {

/// Modal coefficient vector in eigenpairs(model) order.
using ModalState = Eigen::VectorXd;

/// Pointwise sample of an n-component vector field: component values and
/// their first spatial derivatives. Unused slots stay zero on interval
/// domains.
struct FieldSample {
  double value[2] = {0.0, 0.0};     // value[k] = g_k
  double deriv[2][2] = {{0.0, 0.0}, {0.0, 0.0}};  // deriv[k][ax] = d g_k / d xi_ax
};

/// Field evaluator; the ground truth a GradientField is sampled from.
using FieldFn = std::function<FieldSample(const Point&)>;

/// An n-component vector field (n = spatial dimension) sampled on a
/// quadrature grid, carrying component values and first derivatives plus the
/// evaluator it was sampled from so it can be resampled exactly on other
/// grids.
struct GradientField {
  int dim = 1;
  QuadratureGrid grid;
  /// value[k](node), deriv[k][ax](node); k, ax < dim.
  std::array<Eigen::VectorXd, 2> value;
  std::array<std::array<Eigen::VectorXd, 2>, 2> deriv;
  FieldFn evaluator;

  /// Stacked sample vector with the fixed layout
  ///   [value_0; deriv_0_ax0; (deriv_0_ax1;) value_1; ...],
  /// i.e. per component: values then derivatives by axis. Matches the row
  /// layout of gradient_sampling_matrix.
  Eigen::VectorXd flatten() const;
};

/// Sample fn on grid. dim is the component count (= spatial dimension).
GradientField sample_field(const FieldFn& fn, int dim, const QuadratureGrid& grid);

/// chi_omega grad x for the modal state: the field sum_m a_m grad(phi_m)
/// sampled on grid (grid.region may be the full domain or a subregion).
/// Throws std::invalid_argument when state length != mode count.
GradientField modal_gradient_field(const DiffusionModel& model, const ModalState& state,
                                   const QuadratureGrid& grid);

/// H1(omega)^n norm: sqrt(sum_k int_omega g_k^2 + |grad g_k|^2).
double h1_norm_omega(const GradientField& field);

/// L2(omega)^n norm: value part only.
double l2_norm_omega(const GradientField& field);

/// Resample the field on a fresh grid over omega (same per-axis order as the
/// field's grid). Identity on samples when omega equals the field's region.
/// Throws std::domain_error when omega is not contained in the field's region.
GradientField restrict_field(const GradientField& field, const Subregion& omega);

/// Zero-extend a subregion field to the full domain (samples on a full-domain
/// grid of the same order; the evaluator returns zero outside the closure of
/// the original region). restrict_field(extend_by_zero(g), region) reproduces
/// g exactly because subregion grids of equal order share nodes.
GradientField extend_by_zero(const GradientField& field, const DomainGeometry& geometry);

/// Matrix Phi mapping modal coefficients to the flattened gradient-field
/// sample vector on grid: Phi * a = modal_gradient_field(model, a, grid).flatten().
Eigen::MatrixXd gradient_sampling_matrix(const DiffusionModel& model,
                                         const QuadratureGrid& grid);

/// Quadrature weights aligned with the flattened layout; h1_norm = sqrt(s' W s).
Eigen::VectorXd h1_weight_vector(const QuadratureGrid& grid, int dim);

/// Same but zero on derivative rows; l2_norm = sqrt(s' W s).
Eigen::VectorXd l2_weight_vector(const QuadratureGrid& grid, int dim);

/// Adjoint-style reconstruction: project div(x) onto the retained sine basis
/// and solve the Dirichlet Poisson problem  Laplace(v) = -div(x)  spectrally:
///   v_m = (div x)_m / kappa_m.
/// x must be sampled on a full-domain grid. For x = grad(phi_1) this returns
/// -phi_1 (coefficient -1).
ModalState gradient_adjoint(const DiffusionModel& model, const GradientField& x);

}  // namespace gradobs
