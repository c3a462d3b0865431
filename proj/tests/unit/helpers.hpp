#pragma once

// Reference numerics used to cross-check the library: an adaptive Cash-Karp
// ODE stepper and an adaptive Simpson rule. Both are deliberately independent
// of the quadrature and time-stepping code under test.

#include <cmath>
#include <functional>
#include <stdexcept>

#include <Eigen/Core>

namespace testref {

using OdeRhs = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

// Integrates y' = f(t, y) from t0 to t1 with Cash-Karp embedded RK45 and
// elementwise error control.
inline Eigen::VectorXd integrate_ode(const OdeRhs& f, Eigen::VectorXd y,
                                     double t0, double t1, double tol) {
  static const double a2 = 1.0 / 5, a3 = 3.0 / 10, a4 = 3.0 / 5, a5 = 1.0,
                      a6 = 7.0 / 8;
  static const double b21 = 1.0 / 5;
  static const double b31 = 3.0 / 40, b32 = 9.0 / 40;
  static const double b41 = 3.0 / 10, b42 = -9.0 / 10, b43 = 6.0 / 5;
  static const double b51 = -11.0 / 54, b52 = 5.0 / 2, b53 = -70.0 / 27,
                      b54 = 35.0 / 27;
  static const double b61 = 1631.0 / 55296, b62 = 175.0 / 512,
                      b63 = 575.0 / 13824, b64 = 44275.0 / 110592,
                      b65 = 253.0 / 4096;
  static const double c1 = 37.0 / 378, c3 = 250.0 / 621, c4 = 125.0 / 594,
                      c6 = 512.0 / 1771;
  static const double d1 = c1 - 2825.0 / 27648, d3 = c3 - 18575.0 / 48384,
                      d4 = c4 - 13525.0 / 55296, d5 = -277.0 / 14336,
                      d6 = c6 - 1.0 / 4;

  double t = t0;
  double h = (t1 - t0) / 64.0;
  int steps = 0;
  while (t < t1) {
    if (++steps > 2000000) throw std::runtime_error("reference ODE stepper stalled");
    if (t + h > t1) h = t1 - t;
    const Eigen::VectorXd k1 = f(t, y);
    const Eigen::VectorXd k2 = f(t + a2 * h, y + h * b21 * k1);
    const Eigen::VectorXd k3 = f(t + a3 * h, y + h * (b31 * k1 + b32 * k2));
    const Eigen::VectorXd k4 =
        f(t + a4 * h, y + h * (b41 * k1 + b42 * k2 + b43 * k3));
    const Eigen::VectorXd k5 =
        f(t + a5 * h, y + h * (b51 * k1 + b52 * k2 + b53 * k3 + b54 * k4));
    const Eigen::VectorXd k6 = f(
        t + a6 * h,
        y + h * (b61 * k1 + b62 * k2 + b63 * k3 + b64 * k4 + b65 * k5));
    const Eigen::VectorXd y5 = y + h * (c1 * k1 + c3 * k3 + c4 * k4 + c6 * k6);
    const Eigen::VectorXd err =
        h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6);
    const double scale =
        tol * (1.0 + std::max(y.cwiseAbs().maxCoeff(), y5.cwiseAbs().maxCoeff()));
    const double emax = err.cwiseAbs().maxCoeff();
    if (emax <= scale) {
      t += h;
      y = y5;
      if (emax < 0.1 * scale) h *= 2.0;
    } else {
      h *= 0.5;
      if (!(h > 1e-14 * (t1 - t0)))
        throw std::runtime_error("reference ODE stepper underflowed");
    }
  }
  return y;
}

namespace detail {
inline double simpson(const std::function<double(double)>& f, double a,
                      double fa, double b, double fb, double m, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive(const std::function<double(double)>& f, double a,
                       double fa, double b, double fb, double m, double fm,
                       double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(f, a, fa, m, fm, lm, flm);
  const double right = simpson(f, m, fm, b, fb, rm, frm);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adaptive(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double tol = 1e-12) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = detail::simpson(f, a, fa, b, fb, m, fm);
  return detail::adaptive(f, a, fa, b, fb, m, fm, whole, tol, 40);
}

}  // namespace testref
