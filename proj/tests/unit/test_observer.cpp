#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <doctest.h>
#include <Eigen/Dense>

#include "gradobs/errors.hpp"
#include "gradobs/field.hpp"
#include "gradobs/model.hpp"
#include "gradobs/observer.hpp"
#include "gradobs/sensors.hpp"
#include "helpers.hpp"

using namespace gradobs;

namespace {

DiffusionModel drift_interval(double g2, int n) {
  DiffusionModel m;
  m.geometry = DomainGeometry::interval(1.0);
  m.gamma1 = 0.01;
  m.gamma2 = g2;
  m.n1 = n;
  return m;
}

DiffusionModel drift_square(int n) {
  DiffusionModel m;
  m.geometry = DomainGeometry::rectangle(1.0, 1.0);
  m.gamma1 = 0.01;
  m.gamma2 = 0.6;
  m.n1 = n;
  m.n2 = n;
  return m;
}

const Point kAnchor{1.0 / std::sqrt(2.0), 0.0};

OutputOperator anchor_output(const DiffusionModel& m) {
  return build_output_matrix({PointwiseSensor{kAnchor}}, m);
}

ObserverSystem make_system(const DiffusionModel& m, OutputOperator output,
                           ObserverGain gain, const Subregion& omega) {
  ObserverSystem sys;
  sys.model = m;
  sys.output = std::move(output);
  sys.gain = std::move(gain);
  sys.omega = omega;
  sys.x0 = Eigen::VectorXd::Ones(m.mode_count());
  sys.zhat0 = Eigen::VectorXd::Zero(m.mode_count());
  return sys;
}

ObserverGain zero_gain(const DiffusionModel& m, int q) {
  ObserverGain g;
  g.H = Eigen::MatrixXd::Zero(m.mode_count(), q);
  return g;
}

}  // namespace

TEST_SUITE_BEGIN("observer");

TEST_CASE("single unstable cluster gain hits the target exactly") {
  const auto m = drift_interval(0.2, 16);  // only mode 1 sits above zero
  const auto output = anchor_output(m);
  GainOptions opt;
  opt.target_mu = -0.05;
  const auto gain = synthesize_gain(output, opt);

  const double lam1 = eigenvalue(m, ModeIndex::interval(1));
  const double c1 = output.C(0, 0);
  REQUIRE(gain.H.rows() == 16);
  CHECK(gain.H(0, 0) == doctest::Approx((lam1 - opt.target_mu) / c1).epsilon(1e-13));
  CHECK(gain.H.bottomRows(15).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(gain.cluster_blocks.size() == 1);

  // Stable rows untouched: the closed-loop spectrum is {mu} plus the stable
  // tail, and mu dominates here.
  const Eigen::MatrixXd F = assemble_error_matrix(m, output, gain);
  CHECK(max_real_eigenvalue(F) == doctest::Approx(opt.target_mu).epsilon(1e-12));
}

TEST_CASE("stacked multi-cluster design corrects the whole unstable block") {
  const auto m = drift_interval(1.0, 12);  // modes 1..3 unstable
  const auto output = build_output_matrix({PointwiseSensor{kAnchor},
                                           PointwiseSensor{Point{0.3, 0.0}},
                                           PointwiseSensor{Point{0.83, 0.0}}},
                                          m);
  GainOptions opt;
  opt.target_mu = -0.3;  // above the first stable eigenvalue
  const auto gain = synthesize_gain(output, opt);

  Eigen::VectorXd lam_u(3);
  for (int k = 0; k < 3; ++k) lam_u[k] = eigenvalue(m, ModeIndex::interval(k + 1));
  const Eigen::MatrixXd block =
      lam_u.asDiagonal().toDenseMatrix() -
      gain.H.topRows(3) * output.C.leftCols(3);
  CHECK((block - opt.target_mu * Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <
        1e-11);
  CHECK(gain.H.bottomRows(9).cwiseAbs().maxCoeff() == 0.0);

  const Eigen::MatrixXd F = assemble_error_matrix(m, output, gain);
  CHECK(max_real_eigenvalue(F) == doctest::Approx(-0.3).epsilon(1e-10));
}

TEST_CASE("single-sensor placement spreads the corrected eigenvalues") {
  const auto m = drift_interval(1.0, 16);
  const auto output = anchor_output(m);
  GainOptions opt;
  opt.target_mu = -2.0;
  const auto gain = synthesize_gain(output, opt);

  // Three unstable clusters behind one sensor: the stacked columns cannot
  // have full column rank, so the design places mu, 1.05 mu, 1.10 mu.
  Eigen::MatrixXd block(3, 3);
  block.setZero();
  for (int k = 0; k < 3; ++k)
    block(k, k) = eigenvalue(m, ModeIndex::interval(k + 1));
  block -= gain.H.topRows(3) * output.C.leftCols(3);
  Eigen::EigenSolver<Eigen::MatrixXd> es(block);
  REQUIRE(es.info() == Eigen::Success);
  std::vector<double> re(3);
  for (int k = 0; k < 3; ++k) {
    re[k] = es.eigenvalues()[k].real();
    CHECK(std::abs(es.eigenvalues()[k].imag()) < 1e-6);
  }
  std::sort(re.begin(), re.end());
  CHECK(re[0] == doctest::Approx(-2.2).epsilon(1e-6));
  CHECK(re[1] == doctest::Approx(-2.1).epsilon(1e-6));
  CHECK(re[2] == doctest::Approx(-2.0).epsilon(1e-6));

  // Stable modes keep their open-loop rates; the slowest one wins.
  const Eigen::MatrixXd F = assemble_error_matrix(m, output, gain);
  CHECK(max_real_eigenvalue(F) ==
        doctest::Approx(-0.57913670417429738).epsilon(1e-9));

  // The synthesis is deterministic.
  const auto again = synthesize_gain(output, opt);
  CHECK((gain.H - again.H).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("degenerate square cluster design is deterministic and stable") {
  const auto m = drift_square(8);
  const auto output = build_output_matrix(
      {PointwiseSensor{Point{1.0 / std::sqrt(2.0), 1.0 / M_PI}},
       PointwiseSensor{Point{1.0 / M_PI, 1.0 / std::exp(1.0)}}},
      m);
  GainOptions opt;
  opt.target_mu = -2.0;
  const auto gain = synthesize_gain(output, opt);
  const auto again = synthesize_gain(output, opt);
  CHECK((gain.H - again.H).cwiseAbs().maxCoeff() == 0.0);

  const Eigen::MatrixXd F = assemble_error_matrix(m, output, gain);
  // First stable eigenvalue of the square drift model.
  CHECK(max_real_eigenvalue(F) ==
        doctest::Approx(0.6 - 0.08 * M_PI * M_PI).epsilon(1e-6));
}

TEST_CASE("strict synthesis refuses invisible unstable clusters") {
  const auto m = drift_interval(1.0, 16);
  const auto blind = build_output_matrix({PointwiseSensor{Point{0.5, 0.0}}}, m);
  GainOptions opt;
  opt.target_mu = -2.0;
  CHECK_THROWS_AS(synthesize_gain(blind, opt), NotStrategicError);
  try {
    synthesize_gain(blind, opt);
  } catch (const NotStrategicError& e) {
    CHECK(std::string(e.what()).find("cluster") != std::string::npos);
  }

  // Too few sensors for a repeated cluster is also refused.
  const auto sq = drift_square(8);
  const auto one = build_output_matrix(
      {PointwiseSensor{Point{1.0 / std::sqrt(2.0), 1.0 / M_PI}}}, sq);
  CHECK_THROWS_AS(synthesize_gain(one, opt), NotStrategicError);
}

TEST_CASE("best effort skips what the sensor cannot see") {
  const auto m = drift_interval(1.0, 16);
  const auto blind = build_output_matrix({PointwiseSensor{Point{0.5, 0.0}}}, m);
  GainOptions opt;
  opt.target_mu = -2.0;
  opt.best_effort = true;
  const auto gain = synthesize_gain(blind, opt);
  // Mode 2 keeps a zero row; its eigenvalue survives in the closed loop.
  CHECK(gain.H.row(1).cwiseAbs().maxCoeff() == 0.0);
  CHECK(gain.H.row(0).cwiseAbs().maxCoeff() > 0.0);
  const Eigen::MatrixXd F = assemble_error_matrix(m, blind, gain);
  CHECK(max_real_eigenvalue(F) ==
        doctest::Approx(0.60521582395642566).epsilon(1e-9));
}

TEST_CASE("nonnegative decay targets are rejected") {
  const auto m = drift_interval(1.0, 8);
  const auto output = anchor_output(m);
  GainOptions opt;
  opt.target_mu = 0.0;
  CHECK_THROWS_AS(synthesize_gain(output, opt), std::invalid_argument);
  opt.target_mu = 1.0;
  CHECK_THROWS_AS(synthesize_gain(output, opt), std::invalid_argument);
}

TEST_CASE("zero-gain simulation reproduces the exact modal flow") {
  const auto m = drift_interval(1.0, 6);
  auto sys = make_system(m, anchor_output(m), zero_gain(m, 1),
                         Subregion::interval(0.2, 0.8));
  Eigen::VectorXd x0(6);
  x0 << 1.0, -0.5, 0.25, 2.0, -1.0, 0.1;
  sys.x0 = x0;

  SimulateOptions opt;
  opt.horizon = 1.0;
  opt.dt = 1e-3;
  opt.output_every = 100;
  const auto result = simulate(sys, opt);

  REQUIRE(result.times.size() == 11);
  CHECK(result.times.front() == 0.0);
  CHECK(result.times.back() == doctest::Approx(1.0).epsilon(1e-12));
  const auto pairs = eigenpairs(m);
  for (size_t k = 0; k < result.times.size(); ++k)
    for (int j = 0; j < 6; ++j)
      CHECK(std::abs(result.x(j, k) -
                     x0[j] * std::exp(pairs[j].lambda * result.times[k])) <= 1e-12);

  // With zero gain and zero observer start, the observer stays at zero and
  // every error column equals the plant state.
  CHECK(result.xhat.cwiseAbs().maxCoeff() == 0.0);
  CHECK((result.err_modal - result.x.cwiseAbs()).cwiseAbs().maxCoeff() == 0.0);

  // Norm channels agree with a direct field evaluation at the final instant.
  const auto grid = make_grid(sys.omega, sys.quadrature_order);
  const auto field = modal_gradient_field(m, result.x.col(10), grid);
  CHECK(result.err_h1_omega[10] ==
        doctest::Approx(h1_norm_omega(field)).epsilon(1e-12));
  CHECK(result.err_l2_omega[10] ==
        doctest::Approx(l2_norm_omega(field)).epsilon(1e-12));
  REQUIRE(result.mode_labels.size() == 6);
  CHECK(result.mode_labels[0].i == 1);
}

TEST_CASE("integrator paths agree on a corrected run") {
  const auto m = drift_interval(1.0, 16);
  const auto output = anchor_output(m);
  GainOptions gopt;
  gopt.target_mu = -2.0;
  auto sys = make_system(m, output, synthesize_gain(output, gopt),
                         Subregion::interval(0.2, 0.8));

  SimulateOptions opt;
  opt.horizon = 2.0;
  opt.dt = 1e-3;
  opt.output_every = 10;
  opt.integrator = Integrator::RK4;
  const auto rk = simulate(sys, opt);
  opt.integrator = Integrator::Expm;
  const auto ex = simulate(sys, opt);

  REQUIRE(rk.times.size() == ex.times.size());
  // The plant advances by exact mild steps in both paths; only roundoff
  // accumulated over the 2000 steps separates them.
  CHECK((rk.x - ex.x).cwiseAbs().maxCoeff() < 1e-11);
  CHECK((rk.xhat - ex.xhat).cwiseAbs().maxCoeff() < 1e-6);
  const int last = static_cast<int>(rk.times.size()) - 1;
  CHECK(rk.err_h1_omega[last] == doctest::Approx(ex.err_h1_omega[last]).epsilon(1e-4));
}

TEST_CASE("explicit stepping rejects a step outside the stability region") {
  const auto m = drift_interval(1.0, 16);
  const auto output = anchor_output(m);
  GainOptions gopt;
  gopt.target_mu = -2.0;
  auto sys = make_system(m, output, synthesize_gain(output, gopt),
                         Subregion::interval(0.2, 0.8));

  SimulateOptions opt;
  opt.horizon = 2.0;
  opt.dt = 0.5;
  opt.output_every = 1;
  CHECK_THROWS_AS(simulate(sys, opt), IntegratorError);
  try {
    simulate(sys, opt);
  } catch (const IntegratorError& e) {
    CHECK(std::string(e.what()).find("stability bound") != std::string::npos);
  }

  // The exact propagator has no such restriction.
  opt.integrator = Integrator::Expm;
  const auto result = simulate(sys, opt);
  CHECK(result.times.size() == 5);

  SimulateOptions bad;
  bad.horizon = -1.0;
  CHECK_THROWS_AS(simulate(sys, bad), std::invalid_argument);
}

TEST_CASE("decay rate estimation") {
  SimulationResult synth;
  const int n = 101;
  synth.err_h1_omega.resize(n);
  synth.err_l2_omega = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < n; ++k) {
    const double t = 0.1 * k;
    synth.times.push_back(t);
    synth.err_h1_omega[k] = 3.0 * std::exp(-0.7 * t);
  }
  const auto fit = estimate_decay_rate(synth);
  CHECK_FALSE(fit.degenerate);
  CHECK(fit.rate == doctest::Approx(0.7).epsilon(1e-10));
  CHECK(fit.goodness_of_fit == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(fit.window_start == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(fit.window_end == doctest::Approx(10.0).epsilon(1e-12));

  const auto tail = estimate_decay_rate(synth, 0.2);
  CHECK(tail.window_start == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(tail.rate == doctest::Approx(0.7).epsilon(1e-10));

  SimulationResult dead = synth;
  for (int k = 60; k < n; ++k) dead.err_h1_omega[k] = 0.0;
  CHECK(estimate_decay_rate(dead).degenerate);
}

TEST_CASE("structure residuals for the modal realization") {
  const auto m = drift_interval(1.0, 8);
  const auto output = anchor_output(m);
  GainOptions gopt;
  gopt.target_mu = -2.0;
  const auto gain = synthesize_gain(output, gopt);
  const Eigen::MatrixXd F = assemble_error_matrix(m, output, gain);
  const Eigen::MatrixXd Phi = Eigen::MatrixXd::Identity(8, 8);
  const Eigen::MatrixXd B = Eigen::MatrixXd::Random(8, 2);

  const auto res = verify_observer_conditions(Phi, F, B, gain.H, B, output);
  CHECK(res.structure < 1e-12);
  CHECK(res.input_match == 0.0);

  Eigen::MatrixXd Fbad = F;
  Fbad(3, 4) += 1e-3;
  const auto perturbed = verify_observer_conditions(Phi, Fbad, B, gain.H, B, output);
  CHECK(perturbed.structure == doctest::Approx(1e-3).epsilon(1e-6));

  CHECK_THROWS_AS(verify_observer_conditions(Eigen::MatrixXd::Identity(7, 7), F, B,
                                             gain.H, B, output),
                  std::invalid_argument);
}

TEST_CASE("sampled error field matches the linear pipeline") {
  const auto m = drift_interval(1.0, 16);
  const auto output = anchor_output(m);
  GainOptions gopt;
  gopt.target_mu = -2.0;
  auto sys = make_system(m, output, synthesize_gain(output, gopt),
                         Subregion::interval(0.2, 0.8));
  SimulateOptions opt;
  opt.horizon = 1.0;
  opt.dt = 1e-3;
  opt.output_every = 100;
  const auto result = simulate(sys, opt);
  CHECK(pipeline_residual(sys, result) <= 1e-10);
}

TEST_CASE("estimator combination") {
  Eigen::VectorXd y(2), z(3);
  y << 1.0, -2.0;
  z << 0.5, 0.25, -1.0;
  const Eigen::MatrixXd N = Eigen::MatrixXd::Identity(3, 3);
  const Eigen::VectorXd same = estimator_combine(y, z, Eigen::MatrixXd(0, 0), N);
  CHECK((same - z).cwiseAbs().maxCoeff() == 0.0);

  Eigen::MatrixXd M(3, 2);
  M << 1.0, 0.0, 0.0, 1.0, 2.0, -1.0;
  const Eigen::VectorXd mixed = estimator_combine(y, z, M, 2.0 * N);
  CHECK((mixed - (M * y + 2.0 * z)).cwiseAbs().maxCoeff() < 1e-15);

  CHECK_THROWS_AS(estimator_combine(y, z, Eigen::MatrixXd(3, 3), N),
                  std::invalid_argument);
  CHECK_THROWS_AS(estimator_combine(y, z, M, Eigen::MatrixXd(3, 2)),
                  std::invalid_argument);
}

TEST_CASE("piecewise input drives plant and observer consistently") {
  const auto m = drift_interval(1.0, 4);
  auto sys = make_system(m, anchor_output(m), zero_gain(m, 1),
                         Subregion::interval(0.2, 0.8));
  sys.B = Eigen::MatrixXd::Zero(4, 1);
  sys.B(0, 0) = 1.0;
  sys.input.times = {0.0, 0.5};
  sys.input.values = {Eigen::VectorXd::Constant(1, 1.0),
                      Eigen::VectorXd::Constant(1, 0.0)};
  Eigen::VectorXd x0(4);
  x0 << 0.2, -0.4, 0.8, 0.3;
  sys.x0 = x0;
  sys.zhat0 = x0;  // perfectly initialized observer

  CHECK((sys.input.at(0.49, 1) - Eigen::VectorXd::Constant(1, 1.0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((sys.input.at(0.5, 1) - Eigen::VectorXd::Zero(1)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((sys.input.at(9.0, 1) - Eigen::VectorXd::Zero(1)).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(sys.input.at(0.1, 3), std::invalid_argument);

  SimulateOptions opt;
  opt.horizon = 1.0;
  opt.dt = 1e-3;
  opt.output_every = 1000;
  const auto result = simulate(sys, opt);

  // Mode 1 with the switched forcing, integrated independently in two legs.
  const auto pairs = eigenpairs(m);
  const double lam = pairs[0].lambda;
  const auto rhs_on = [&](double, const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return lam * v + Eigen::VectorXd::Constant(1, 1.0);
  };
  const auto rhs_off = [&](double, const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return lam * v;
  };
  Eigen::VectorXd s = Eigen::VectorXd::Constant(1, x0[0]);
  s = testref::integrate_ode(rhs_on, s, 0.0, 0.5, 1e-12);
  s = testref::integrate_ode(rhs_off, s, 0.5, 1.0, 1e-12);
  const int last = static_cast<int>(result.times.size()) - 1;
  CHECK(std::abs(result.x(0, last) - s[0]) <= 1e-9);

  // A perfectly initialized observer under the same input keeps a tiny error.
  CHECK(result.err_modal.col(last).maxCoeff() < 1e-9);
}

TEST_SUITE_END();
