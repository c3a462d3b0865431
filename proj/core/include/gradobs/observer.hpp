#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "gradobs/strategic.hpp"

namespace gradobs {

/// Output-injection gain. Rows follow eigenpairs order; clusters at or below
/// the stability margin keep zero rows.
struct ObserverGain {
  Eigen::MatrixXd H;          // modes x q
  double target_mu = -1.0;    // prescribed spectral abscissa of the corrected block
  /// Row blocks per unstable cluster, aligned with report.clusters.
  std::vector<Eigen::MatrixXd> cluster_blocks;
};

struct GainOptions {
  double target_mu = -1.0;
  double unstable_margin = 0.0;
  double cluster_rel_tol = 1e-9;
  RankTolerances rank_tol;
  /// Skip unstable clusters the sensors cannot see instead of throwing;
  /// used for negative-control simulations.
  bool best_effort = false;
};

/// Design the gain for the unstable block:
///  - one unstable cluster: H_m = (lambda_m - mu) C_m^+, giving the corrected
///    block mu I exactly;
///  - several clusters whose stacked columns C_u have full column rank:
///    H_u = (Lambda_u - mu I) C_u^+, again exactly mu I;
///  - otherwise exact eigenvalue placement on the unstable block with targets
///    mu, 1.05 mu, 1.10 mu, ... (verified a posteriori by an eigensolve), so
///    the corrected spectral abscissa is exactly mu.
/// Throws NotStrategicError when a visible design does not exist (unless
/// best_effort), std::invalid_argument when target_mu >= 0.
ObserverGain synthesize_gain(const OutputOperator& output, const GainOptions& options);

/// Error dynamics matrix F = diag(lambda) - H C.
Eigen::MatrixXd assemble_error_matrix(const DiffusionModel& model,
                                      const OutputOperator& output,
                                      const ObserverGain& gain);

/// Largest real part of the (possibly complex) spectrum.
double max_real_eigenvalue(const Eigen::MatrixXd& A);

/// Piecewise-constant input profile; value(t) = values[k] for
/// t in [times[k], times[k+1]). Empty profile = zero input.
struct InputProfile {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> values;

  Eigen::VectorXd at(double t, int width) const;
};

/// Plant + full-order observer realization. The reconstruction target is the
/// regional gradient: T = identity on modal coordinates, z = chi_omega grad
/// xhat sampled on the omega grid, direct term zero.
struct ObserverSystem {
  DiffusionModel model;
  OutputOperator output;
  ObserverGain gain;
  Subregion omega;
  int quadrature_order = 64;

  Eigen::MatrixXd B;        // modal input operator (modes x p); 0 x 0 = no input
  InputProfile input;

  ModalState x0;
  ModalState zhat0;         // observer initial modal state
};

enum class Integrator { RK4, Expm };

struct SimulateOptions {
  double horizon = 10.0;
  double dt = 1e-3;
  int output_every = 10;    // store every k-th step (t = 0 always stored)
  Integrator integrator = Integrator::RK4;
};

struct SimulationResult {
  std::vector<double> times;
  Eigen::MatrixXd x;            // modes x instants, true modal trajectory
  Eigen::MatrixXd xhat;         // modes x instants, observer modal trajectory
  Eigen::VectorXd err_h1_omega; // H1(omega)^n norm of chi_omega grad(x - xhat)
  Eigen::VectorXd err_l2_omega;
  Eigen::MatrixXd err_modal;    // modes x instants, |x - xhat| per mode
  std::vector<ModeIndex> mode_labels;
};

/// Propagate the plant with exact modal exponential steps and the observer
/// with classical RK4 (or one precomputed exact matrix exponential per step
/// when integrator = Expm). RK4 throws IntegratorError when dt lies outside
/// the explicit stability region of the error dynamics.
SimulationResult simulate(const ObserverSystem& system, const SimulateOptions& options);

/// Least-squares exponential fit over the trailing window.
struct DecayEstimate {
  double rate = 0.0;            // positive = decay at e^{-rate t}
  double window_start = 0.0;
  double window_end = 0.0;
  double goodness_of_fit = 0.0; // R^2 of the log-linear fit
  /// Error underflowed (< 1e-300) inside the window: the trajectory converged
  /// to zero faster than a rate can be fitted.
  bool degenerate = false;
};

DecayEstimate estimate_decay_rate(const SimulationResult& result,
                                  double tail_fraction = 0.5);

/// Residuals of the observer structure equations for user-supplied maps:
///   structure   = max-norm of  Phi A - F Phi - H_g C
///   input_match = max-norm of  G - Phi B
/// with A = diag(lambda) of the model.
struct ConditionResiduals {
  double structure = 0.0;
  double input_match = 0.0;
};

ConditionResiduals verify_observer_conditions(const Eigen::MatrixXd& Phi,
                                              const Eigen::MatrixXd& F,
                                              const Eigen::MatrixXd& G,
                                              const Eigen::MatrixXd& Hg,
                                              const Eigen::MatrixXd& B,
                                              const OutputOperator& output);

/// For the built-in realization: max over stored instants of the max-norm gap
/// between the sampled gradient error (grad x and grad xhat evaluated
/// separately on the omega grid) and Phi * (x - xhat). Zero up to roundoff by
/// linearity of the sampling map.
double pipeline_residual(const ObserverSystem& system, const SimulationResult& result);

/// Final estimator output M y + N z; defaults M = 0, N = I realized by the
/// caller passing those shapes. Dimension mismatches throw
/// std::invalid_argument.
Eigen::VectorXd estimator_combine(const Eigen::VectorXd& y, const Eigen::VectorXd& z,
                                  const Eigen::MatrixXd& M, const Eigen::MatrixXd& N);

}  // namespace gradobs
