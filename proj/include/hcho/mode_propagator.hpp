#pragma once

// Per-mode linear algebra for u'' + u' + c u = b(t), c = omega^2 + alpha.
//
// Writing y = (u, u') the system is y' = A y + (0, b) with
//   A = [[0, 1], [-c, -1]],   A^2 + A + c I = 0.
// With q = c - 1/4 the exponential is
//   exp(tA) = e^{-t/2} ( C(t) I + S(t) (A + I/2) ),
//   C = cos(sqrt(q) t), S = sin(sqrt(q) t)/sqrt(q)        (q > 0)
//   C = cosh(mu t),     S = sinh(mu t)/mu,  mu = sqrt(-q)  (q < 0)
// and a power series in q t^2 near the critical value c = 1/4.

#include <array>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "hcho/errors.hpp"
#include "hcho/grid.hpp"

namespace hcho {

struct Mat2 {
  double a11 = 1.0, a12 = 0.0, a21 = 0.0, a22 = 1.0;

  template <class T>
  std::pair<T, T> apply(const T& x, const T& y) const {
    return {a11 * x + a12 * y, a21 * x + a22 * y};
  }
  friend Mat2 operator*(const Mat2& p, const Mat2& r) {
    return {p.a11 * r.a11 + p.a12 * r.a21, p.a11 * r.a12 + p.a12 * r.a22, p.a21 * r.a11 + p.a22 * r.a21,
            p.a21 * r.a12 + p.a22 * r.a22};
  }
};

// Roots of lambda^2 + lambda + (omega^2 + alpha) = 0, stable quadratic formula.
// For complex roots the first has positive imaginary part; for real roots the
// first is the one closer to zero.
inline std::pair<Complex, Complex> mode_eigenvalues(double omega, double alpha) {
  if (!(alpha > 0.0)) throw ParameterError("mode_eigenvalues: alpha must be positive");
  if (!(omega >= 0.0)) throw ParameterError("mode_eigenvalues: omega must be nonnegative");
  const double c = omega * omega + alpha;
  const double disc = 1.0 - 4.0 * c;
  if (disc < 0.0) {
    const double im = 0.5 * std::sqrt(-disc);
    return {Complex(-0.5, im), Complex(-0.5, -im)};
  }
  // q' = -(1 + sqrt(disc))/2 is the larger-magnitude root; the other is c/q'.
  const double far = -0.5 * (1.0 + std::sqrt(disc));
  return {Complex(c / far, 0.0), Complex(far, 0.0)};
}

struct ModeLinearSystem {
  double omega = 0.0;
  double alpha = 0.0;
  Complex lambda_plus, lambda_minus;

  ModeLinearSystem(double omega_, double alpha_) : omega(omega_), alpha(alpha_) {
    std::tie(lambda_plus, lambda_minus) = mode_eigenvalues(omega, alpha);
  }
  double stiffness() const { return omega * omega + alpha; }
  // Slowest decay rate of the mode, min |Re lambda|.
  double decay_rate() const { return std::min(-lambda_plus.real(), -lambda_minus.real()); }
};

namespace detail {

// e^{-t/2} C(t) and e^{-t/2} S(t) for q = c - 1/4.
inline std::pair<double, double> damped_cs(double q, double t) {
  const double x = q * t * t;
  const double decay = std::exp(-0.5 * t);
  if (std::abs(x) < 1e-3) {
    // C = sum (-x)^j/(2j)!, S = t sum (-x)^j/(2j+1)!
    double c = 0.0, s = 0.0, term_c = 1.0, term_s = 1.0;
    for (int j = 0; j < 9; ++j) {
      c += term_c;
      s += term_s;
      term_c *= -x / double((2 * j + 1) * (2 * j + 2));
      term_s *= -x / double((2 * j + 2) * (2 * j + 3));
    }
    return {decay * c, decay * t * s};
  }
  if (q > 0.0) {
    const double r = std::sqrt(q);
    return {decay * std::cos(r * t), decay * std::sin(r * t) / r};
  }
  // mu < 1/2 since c > 0, so both exponents below are nonpositive for t >= 0.
  const double mu = std::sqrt(-q);
  const double ep = std::exp((mu - 0.5) * t), em = std::exp((-mu - 0.5) * t);
  return {0.5 * (ep + em), 0.5 * (ep - em) / mu};
}

}  // namespace detail

// exp(tA) for stiffness c = omega^2 + alpha > 0.
inline Mat2 mode_propagator(double c, double t) {
  const auto [ec, es] = detail::damped_cs(c - 0.25, t);
  return {ec + 0.5 * es, es, -c * es, ec - 0.5 * es};
}

// Closed-form mean of u'' + u' + alpha u = 0 (the m = 0 mode, which the
// Laplacian leaves untouched). Returns (u(t), u'(t)).
inline std::pair<double, double> zero_mode_solution(double u0_mean, double v0_mean, double alpha, double t) {
  if (!(alpha > 0.0)) throw ParameterError("zero_mode_solution: alpha must be positive");
  return mode_propagator(alpha, t).apply(u0_mean, v0_mean);
}

// Exponential-integrator weights for a forcing acting on u' only.
//   w1 = int_0^h exp(sA) e2 ds                     (constant forcing)
//   v  = int_0^h exp((h-s)A) e2 (s/h) ds           (linearly growing forcing)
// With J = int_0^h Phi12 = (1 - Phi22 - Phi12)/c:
//   w1 = (J, Phi12),  v = ((1 - (J + Phi12)/h)/c, J/h).
// Those closed forms cancel badly once c h^2 is small, so below that
// threshold the integrals are done by Gauss-Legendre on the entries.
struct EtdWeights {
  Mat2 phi;
  double w1_u = 0.0, w1_v = 0.0;
  double v_u = 0.0, v_v = 0.0;
};

inline EtdWeights etd_weights(double c, double h) {
  if (!(c > 0.0) || !(h > 0.0)) throw ParameterError("etd_weights: stiffness and step must be positive");
  EtdWeights w;
  w.phi = mode_propagator(c, h);
  if (c * h * h >= 1.0) {
    const double j = (1.0 - w.phi.a22 - w.phi.a12) / c;
    w.w1_u = j;
    w.w1_v = w.phi.a12;
    w.v_u = (1.0 - (j + w.phi.a12) / h) / c;
    w.v_v = j / h;
    return w;
  }
  using GL = boost::math::quadrature::gauss<double, 30>;
  w.w1_u = GL::integrate([c](double s) { return mode_propagator(c, s).a12; }, 0.0, h);
  w.w1_v = w.phi.a12;
  w.v_u = GL::integrate([c, h](double s) { return mode_propagator(c, h - s).a12 * s; }, 0.0, h) / h;
  w.v_v = GL::integrate([c, h](double s) { return mode_propagator(c, h - s).a22 * s; }, 0.0, h) / h;
  return w;
}

// One entry per integer |m|^2 that occurs on the grid (index = |m|^2).
class ModeTable {
 public:
  ModeTable(const Grid& grid, double alpha) : grid_(grid), alpha_(alpha), present_(grid.max_msq() + 1, 0) {
    if (!(alpha > 0.0)) throw ParameterError("alpha must be positive");
    for (int m : grid.msq_table()) present_[m] = 1;
  }
  const Grid& grid() const { return grid_; }
  double alpha() const { return alpha_; }
  bool present(int msq) const { return present_[msq] != 0; }
  double omega(int msq) const { return grid_.k2_of_msq(msq); }
  double stiffness(int msq) const {
    const double w = omega(msq);
    return w * w + alpha_;
  }

  std::vector<Mat2> propagators(double t) const {
    std::vector<Mat2> out(present_.size());
    for (std::size_t m = 1; m < present_.size(); ++m)
      if (present_[m]) out[m] = mode_propagator(stiffness(int(m)), t);
    return out;
  }

  std::vector<EtdWeights> etd(double h) const {
    std::vector<EtdWeights> out(present_.size());
    for (std::size_t m = 1; m < present_.size(); ++m)
      if (present_[m]) out[m] = etd_weights(stiffness(int(m)), h);
    return out;
  }

 private:
  Grid grid_;
  double alpha_;
  std::vector<char> present_;
};

}  // namespace hcho
