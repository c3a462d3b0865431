#include "gradobs/field.hpp"

#include <cmath>
#include <stdexcept>

#include "gradobs/errors.hpp"

namespace gradobs {
namespace {

bool same_box(const Subregion& a, const Subregion& b) {
  if (a.dim != b.dim) return false;
  for (int ax = 0; ax < a.dim; ++ax)
    if (a.lo[ax] != b.lo[ax] || a.hi[ax] != b.hi[ax]) return false;
  return true;
}

bool box_contains(const Subregion& outer, const Subregion& inner) {
  if (outer.dim != inner.dim) return false;
  for (int ax = 0; ax < outer.dim; ++ax)
    if (inner.lo[ax] < outer.lo[ax] || inner.hi[ax] > outer.hi[ax]) return false;
  return true;
}

FieldSample modal_sample(const DiffusionModel& model,
                         const std::vector<EigenPair>& pairs,
                         const Eigen::VectorXd& state, const Point& p) {
  FieldSample s;
  const int dim = model.geometry.dim;
  double grad[2], hess[2][2];
  for (size_t m = 0; m < pairs.size(); ++m) {
    const double a = state[static_cast<Eigen::Index>(m)];
    if (a == 0.0) continue;
    mode_gradient(model, pairs[m].index, p, grad);
    mode_hessian(model, pairs[m].index, p, hess);
    for (int k = 0; k < dim; ++k) {
      s.value[k] += a * grad[k];
      for (int ax = 0; ax < dim; ++ax) s.deriv[k][ax] += a * hess[k][ax];
    }
  }
  return s;
}

}  // namespace

Eigen::VectorXd GradientField::flatten() const {
  const int G = grid.size();
  const int block = 1 + dim;
  Eigen::VectorXd out(static_cast<Eigen::Index>(dim) * block * G);
  Eigen::Index at = 0;
  for (int k = 0; k < dim; ++k) {
    out.segment(at, G) = value[k];
    at += G;
    for (int ax = 0; ax < dim; ++ax) {
      out.segment(at, G) = deriv[k][ax];
      at += G;
    }
  }
  return out;
}

GradientField sample_field(const FieldFn& fn, int dim, const QuadratureGrid& grid) {
  if (dim != grid.region.dim)
    throw std::invalid_argument("sample_field: component count must match grid dim");
  GradientField f;
  f.dim = dim;
  f.grid = grid;
  f.evaluator = fn;
  const int G = grid.size();
  for (int k = 0; k < dim; ++k) {
    f.value[k].resize(G);
    for (int ax = 0; ax < dim; ++ax) f.deriv[k][ax].resize(G);
  }
  for (int n = 0; n < G; ++n) {
    const FieldSample s = fn(grid.nodes[n]);
    for (int k = 0; k < dim; ++k) {
      f.value[k][n] = s.value[k];
      for (int ax = 0; ax < dim; ++ax) f.deriv[k][ax][n] = s.deriv[k][ax];
    }
  }
  return f;
}

GradientField modal_gradient_field(const DiffusionModel& model, const ModalState& state,
                                   const QuadratureGrid& grid) {
  const auto pairs = eigenpairs(model);
  if (state.size() != static_cast<Eigen::Index>(pairs.size()))
    throw std::invalid_argument("modal_gradient_field: state length != mode count");
  DiffusionModel model_copy = model;
  Eigen::VectorXd state_copy = state;
  FieldFn fn = [model_copy, pairs, state_copy](const Point& p) {
    return modal_sample(model_copy, pairs, state_copy, p);
  };
  return sample_field(fn, model.geometry.dim, grid);
}

double h1_norm_omega(const GradientField& field) {
  double acc = 0.0;
  for (int k = 0; k < field.dim; ++k) {
    acc += field.grid.weights.dot(field.value[k].cwiseAbs2());
    for (int ax = 0; ax < field.dim; ++ax)
      acc += field.grid.weights.dot(field.deriv[k][ax].cwiseAbs2());
  }
  return std::sqrt(acc);
}

double l2_norm_omega(const GradientField& field) {
  double acc = 0.0;
  for (int k = 0; k < field.dim; ++k)
    acc += field.grid.weights.dot(field.value[k].cwiseAbs2());
  return std::sqrt(acc);
}

GradientField restrict_field(const GradientField& field, const Subregion& omega) {
  if (same_box(field.grid.region, omega)) return field;
  if (!box_contains(field.grid.region, omega))
    throw std::domain_error("restrict_field: omega is not contained in the field region");
  if (!field.evaluator)
    throw std::invalid_argument("restrict_field: field carries no evaluator");
  return sample_field(field.evaluator, field.dim, make_grid(omega, field.grid.order));
}

GradientField extend_by_zero(const GradientField& field, const DomainGeometry& geometry) {
  if (geometry.dim != field.dim)
    throw std::invalid_argument("extend_by_zero: geometry dim mismatch");
  if (!contained_in_domain(field.grid.region, geometry))
    throw std::domain_error("extend_by_zero: field region is not contained in the domain");
  if (!field.evaluator)
    throw std::invalid_argument("extend_by_zero: field carries no evaluator");
  const Subregion inner = field.grid.region;
  const FieldFn base = field.evaluator;
  FieldFn fn = [inner, base](const Point& p) {
    if (!inner.contains(p)) return FieldSample{};
    return base(p);
  };
  return sample_field(fn, field.dim, make_grid(Subregion::full(geometry), field.grid.order));
}

Eigen::MatrixXd gradient_sampling_matrix(const DiffusionModel& model,
                                         const QuadratureGrid& grid) {
  const auto pairs = eigenpairs(model);
  const int dim = model.geometry.dim;
  const int G = grid.size();
  const int block = 1 + dim;
  Eigen::MatrixXd Phi(static_cast<Eigen::Index>(dim) * block * G,
                      static_cast<Eigen::Index>(pairs.size()));
  double grad[2], hess[2][2];
  for (size_t m = 0; m < pairs.size(); ++m) {
    for (int n = 0; n < G; ++n) {
      mode_gradient(model, pairs[m].index, grid.nodes[n], grad);
      mode_hessian(model, pairs[m].index, grid.nodes[n], hess);
      for (int k = 0; k < dim; ++k) {
        const Eigen::Index base = static_cast<Eigen::Index>(k) * block * G;
        Phi(base + n, m) = grad[k];
        for (int ax = 0; ax < dim; ++ax)
          Phi(base + (1 + ax) * static_cast<Eigen::Index>(G) + n, m) = hess[k][ax];
      }
    }
  }
  return Phi;
}

Eigen::VectorXd h1_weight_vector(const QuadratureGrid& grid, int dim) {
  const int G = grid.size();
  const int block = 1 + dim;
  Eigen::VectorXd w(static_cast<Eigen::Index>(dim) * block * G);
  for (int k = 0; k < dim; ++k)
    for (int e = 0; e < block; ++e)
      w.segment((static_cast<Eigen::Index>(k) * block + e) * G, G) = grid.weights;
  return w;
}

Eigen::VectorXd l2_weight_vector(const QuadratureGrid& grid, int dim) {
  const int G = grid.size();
  const int block = 1 + dim;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim) * block * G);
  for (int k = 0; k < dim; ++k)
    w.segment(static_cast<Eigen::Index>(k) * block * G, G) = grid.weights;
  return w;
}

ModalState gradient_adjoint(const DiffusionModel& model, const GradientField& x) {
  const Subregion full = Subregion::full(model.geometry);
  if (!same_box(x.grid.region, full))
    throw std::invalid_argument("gradient_adjoint: field must be sampled over the full domain");
  if (x.dim != model.geometry.dim)
    throw std::invalid_argument("gradient_adjoint: field dim mismatch");
  const int G = x.grid.size();
  Eigen::VectorXd div = Eigen::VectorXd::Zero(G);
  for (int ax = 0; ax < x.dim; ++ax) div += x.deriv[ax][ax];
  const auto pairs = eigenpairs(model);
  ModalState v(static_cast<Eigen::Index>(pairs.size()));
  Eigen::VectorXd mode_vals(G);
  for (size_t m = 0; m < pairs.size(); ++m) {
    for (int n = 0; n < G; ++n)
      mode_vals[n] = evaluate_mode(model, pairs[m].index, x.grid.nodes[n]);
    const double proj = x.grid.weights.dot(div.cwiseProduct(mode_vals));
    v[static_cast<Eigen::Index>(m)] = proj / dirichlet_eigenvalue(model, pairs[m].index);
  }
  return v;
}

}  // namespace gradobs
