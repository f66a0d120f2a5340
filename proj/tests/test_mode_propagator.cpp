#include <catch_amalgamated.hpp>

#include <cmath>

#include "hcho/mode_propagator.hpp"
#include "hcho/ode_oracle.hpp"

using namespace hcho;

namespace {

// u'' + u' + c u = a + b s/h from rest, via the long double oracle
oracle::State2 forced(double c, double h, double a, double b) {
  return oracle::integrate(
      [=](const oracle::StateLD& y, oracle::StateLD& dy, long double s) {
        dy[0] = y[1];
        dy[1] = -c * y[0] - y[1] + a + b * s / h;
      },
      {0.0, 0.0}, h);
}

double rel(double x, double y, double rx, double ry) { return std::hypot(x - rx, y - ry) / std::hypot(rx, ry); }

}  // namespace

TEST_CASE("mode propagator matches the ODE in every damping regime") {
  for (double c : {1e-6, 0.1, 0.2499, 0.25, 0.2501, 0.5, 3.0, 1e4}) {
    for (double t : {1e-4, 0.3, 2.0, 10.0}) {
      const auto [u, v] = mode_propagator(c, t).apply(0.8, -1.3);
      const auto r = oracle::damped_mode(c, 0.8, -1.3, t);
      INFO("c = " << c << " t = " << t);
      CHECK(rel(u, v, r[0], r[1]) < 1e-12);
    }
  }
}

TEST_CASE("propagator is a semigroup") {
  const Mat2 a = mode_propagator(2.0, 0.4) * mode_propagator(2.0, 1.1);
  const Mat2 b = mode_propagator(2.0, 1.5);
  CHECK(a.a11 == Catch::Approx(b.a11).epsilon(1e-14));
  CHECK(a.a12 == Catch::Approx(b.a12).epsilon(1e-14));
  CHECK(a.a21 == Catch::Approx(b.a21).epsilon(1e-14));
  CHECK(a.a22 == Catch::Approx(b.a22).epsilon(1e-14));
  const Mat2 id = mode_propagator(2.0, 0.0);
  CHECK(id.a11 == 1.0);
  CHECK(id.a12 == 0.0);
  CHECK(id.a22 == 1.0);
}

TEST_CASE("eigenvalues solve the characteristic polynomial") {
  for (double w : {0.01, 0.3, 1.0, 7.0}) {
    const auto [p, m] = mode_eigenvalues(w, 0.5);
    for (Complex l : {p, m}) CHECK(std::abs(l * l + l + (w * w + 0.5)) < 1e-12 * (1 + w * w));
    const ModeLinearSystem s(w, 0.5);
    CHECK(s.decay_rate() > 0.0);
    CHECK(s.decay_rate() <= 0.5 + 1e-15);
  }
  // strongly overdamped: slow root ~ c (1 + c), c = w^2 + alpha
  const double c = 1e-8 + 1e-6;
  CHECK(ModeLinearSystem(1e-4, 1e-6).decay_rate() == Catch::Approx(c * (1 + c)).epsilon(1e-10));
}

TEST_CASE("ETD weights against the forced ODE on both sides of the switch") {
  for (double c : {1e-3, 0.24, 0.26, 1.0, 50.0, 1e4}) {
    for (double h : {1e-3, 0.01, 0.1, 1.0}) {
      const EtdWeights w = etd_weights(c, h);
      const auto r1 = forced(c, h, 1.0, 0.0);
      const auto r2 = forced(c, h, 0.0, 1.0);
      INFO("c = " << c << " h = " << h << " c h^2 = " << c * h * h);
      CHECK(rel(w.w1_u, w.w1_v, r1[0], r1[1]) < 1e-11);
      CHECK(rel(w.v_u, w.v_v, r2[0], r2[1]) < 1e-11);
    }
  }
  CHECK_THROWS_AS(etd_weights(0.0, 0.1), ParameterError);
  CHECK_THROWS_AS(etd_weights(1.0, 0.0), ParameterError);
}

TEST_CASE("zero-mode closed form against the ODE") {
  for (double alpha : {1e-3, 0.25, 1.0, 10.0}) {
    const auto [u, v] = zero_mode_solution(0.3, 0.9, alpha, 7.5);
    const auto r = oracle::damped_mode(alpha, 0.3, 0.9, 7.5);
    CHECK(rel(u, v, r[0], r[1]) < 1e-12);
  }
  CHECK_THROWS_AS(zero_mode_solution(1.0, 0.0, 0.0, 1.0), ParameterError);
}

TEST_CASE("mode table covers exactly the grid's |m|^2") {
  const Grid g(6.0, 8);
  const ModeTable t(g, 2.0);
  CHECK(t.present(1));
  CHECK(t.present(48));
  CHECK_FALSE(t.present(7));
  CHECK_FALSE(t.present(39));
  CHECK(t.stiffness(3) == Catch::Approx(std::pow(g.k2_of_msq(3), 2) + 2.0));
  CHECK_THROWS_AS(ModeTable(g, 0.0), ParameterError);
}
