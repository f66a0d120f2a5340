#pragma once

// Adaptive Runge-Kutta-Fehlberg 7(8) reference solutions of the per-mode ODEs.
// Independent of the closed-form propagators; used by tests and `hcho verify`.
// Integrated in long double: a double-precision run at rel 1e-14 drifts to
// ~1e-10 over a thousand oscillation periods.

#include <array>
#include <cmath>

#include <boost/numeric/odeint.hpp>

namespace hcho::oracle {

using State2 = std::array<double, 2>;
using StateLD = std::array<long double, 2>;

template <class System>
State2 integrate(System sys, State2 y0, double t, long double abs_tol = 1e-19L, long double rel_tol = 1e-17L) {
  namespace odeint = boost::numeric::odeint;
  if (t == 0.0) return y0;
  StateLD y{y0[0], y0[1]};
  auto stepper =
      odeint::make_controlled(abs_tol, rel_tol, odeint::runge_kutta_fehlberg78<StateLD, long double>());
  odeint::integrate_adaptive(stepper, sys, y, 0.0L, static_cast<long double>(t), static_cast<long double>(t) / 1000);
  return {static_cast<double>(y[0]), static_cast<double>(y[1])};
}

// u'' + u' + c u = 0
inline State2 damped_mode(double c, double u0, double v0, double t) {
  return integrate(
      [c = static_cast<long double>(c)](const StateLD& y, StateLD& dy, long double) {
        dy[0] = y[1];
        dy[1] = -c * y[0] - y[1];
      },
      {u0, v0}, t);
}

// v'' + omega^2 v = 0
inline State2 plate_mode(double omega, double v0, double v1, double t) {
  return integrate(
      [omega = static_cast<long double>(omega)](const StateLD& y, StateLD& dy, long double) {
        dy[0] = y[1];
        dy[1] = -omega * omega * y[0];
      },
      {v0, v1}, t);
}

// c' = -i omega c, as (Re c, Im c)
inline State2 schrodinger_mode(double omega, double re, double im, double t) {
  return integrate(
      [omega = static_cast<long double>(omega)](const StateLD& y, StateLD& dy, long double) {
        dy[0] = omega * y[1];
        dy[1] = -omega * y[0];
      },
      {re, im}, t);
}

}  // namespace hcho::oracle
