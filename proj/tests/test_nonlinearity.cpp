#include <catch_amalgamated.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "hcho/nonlinearity.hpp"
#include "hcho/random_fields.hpp"

using namespace hcho;

namespace {
const double kTwoPi = 2.0 * std::numbers::pi;
}

TEST_CASE("F is the antiderivative of f and fp, fpp its derivatives") {
  const NonlinearitySpec s = NonlinearitySpec::polynomial(0.5, 1.0, 0.0, 0.7, 1.5);
  for (double u : {-2.3, -0.4, 0.0, 0.1, 1.7}) {
    const double F = boost::math::quadrature::gauss_kronrod<double, 31>::integrate([&](double x) { return s.f(x); },
                                                                                  0.0, u, 8, 1e-14);
    CHECK(s.F(u) == Catch::Approx(F).epsilon(1e-12).margin(1e-15));
    const double h = 1e-5;
    CHECK(s.fp(u) == Catch::Approx((s.f(u + h) - s.f(u - h)) / (2 * h)).epsilon(1e-7).margin(1e-8));
    CHECK(s.fpp(u) == Catch::Approx((s.fp(u + h) - s.fp(u - h)) / (2 * h)).epsilon(1e-6).margin(1e-6));
  }
}

TEST_CASE("derived structural constants") {
  const NonlinearitySpec c = NonlinearitySpec::cubic();
  CHECK(c.L == 0.25);
  CHECK(c.K == 0.0);
  CHECK(c.C == 6.0);
  const NonlinearitySpec p = NonlinearitySpec::polynomial(2.0, 1.0, 0.0, 1.0, 1.0);
  CHECK(p.L == Catch::Approx(0.25));  // max(1/4, 1/5)
  CHECK(p.K == Catch::Approx(0.5));
  CHECK(p.C == Catch::Approx(6.0 + 4.0 * 3.0));
  CHECK(NonlinearitySpec::polynomial(0.0, 0.0, 0.0, 1.0, 0.5).L == 0.25);
  CHECK(NonlinearitySpec::polynomial(0.0, 0.0, 0.0, 1.0, 2.5).L == Catch::Approx(1.0 / 3.5));
  CHECK_THROWS_AS(NonlinearitySpec::polynomial(0, 1, 0, 0, 0.0), ParameterError);
  CHECK_THROWS_AS(NonlinearitySpec::polynomial(0, 1, 0, 0, 3.5), ParameterError);
}

TEST_CASE("structural conditions: admissible and inadmissible choices") {
  CHECK(verify_structural_conditions(NonlinearitySpec::cubic(), 50.0, 4001).all_passed());
  CHECK(verify_structural_conditions(NonlinearitySpec::polynomial(1.0, 1.0, 0.0, 0.5, 0.5), 50.0, 4001).all_passed());

  auto neg = NonlinearitySpec::cubic(-1.0);
  const auto r = verify_structural_conditions(neg, 5.0, 1000);
  CHECK_FALSE(r.sign.passed);
  CHECK(std::abs(r.sign.worst_u) == Catch::Approx(5.0));

  // sign holds on the sampled range but fails beyond it
  auto late = NonlinearitySpec::polynomial(1.0, -1e-6, 0.0, 0.0, 2.0);
  const auto rl = verify_structural_conditions(late, 10.0, 1000);
  CHECK_FALSE(rl.sign.passed);
  CHECK(std::isinf(rl.sign.worst_u));

  // quintic is critical: growth fails
  auto quint = NonlinearitySpec::polynomial(0.0, 0.0, 1.0, 0.0, 1.0);
  quint.C = 1e6;
  CHECK_FALSE(verify_structural_conditions(quint, 2.0, 1000).growth.passed);

  // too small an L breaks the potential bound
  auto tight = NonlinearitySpec::cubic();
  tight.L = 0.2;
  const auto rt = verify_structural_conditions(tight, 3.0, 1000);
  CHECK_FALSE(rt.potential.passed);
  CHECK(std::isfinite(rt.potential.worst_u));

  CHECK_THROWS_AS(verify_structural_conditions(NonlinearitySpec::cubic(), 3.0, 999), ParameterError);
}

TEST_CASE("cubic of a single mode: exact trig identity after dealiasing") {
  const Grid g(kTwoPi, 16);
  const double a = 1.3;
  const SpectralField u = cosine_mode(g, 0, 2, 0, a);
  const SpectralField f = f_apply(u, NonlinearitySpec::cubic());
  CHECK(std::abs(f.at(0, 2, 0) - Complex(0.375 * a * a * a)) < 1e-14);
  // 3 * 2 = 6 > 16/3: removed by the mask
  CHECK(std::abs(f.at(0, 6, 0)) < 1e-15);
  const SpectralField f1 = f_apply(cosine_mode(g, 1, 0, 0, a), NonlinearitySpec::cubic());
  CHECK(std::abs(f1.at(3, 0, 0) - Complex(0.125 * a * a * a)) < 1e-14);
}

TEST_CASE("mean of f(u) is removed and reported") {
  const Grid g(kTwoPi, 16);
  SpectralField u = cosine_mode(g, 1, 0, 0, 1.0);
  const NonlinearEvaluation e = f_evaluate(u, NonlinearitySpec::polynomial(0.0, 0.0, 0.0, 1.0, 2.0));
  // f = |u| u -> u^2 sign(u); the odd symmetry of cos about pi/2 keeps the mean 0,
  // so use u^2 type data instead
  CHECK(e.f.mean_zero());
  const SpectralField w = cosine_mode(g, 1, 0, 0, 1.0) + cosine_mode(g, 2, 0, 0, 1.0);
  const NonlinearEvaluation e2 = f_evaluate(w, NonlinearitySpec::cubic());
  // mean of (cos x + cos 2x)^3 = 3/4
  CHECK(e2.removed_mean == Catch::Approx(0.75).epsilon(1e-12));
  CHECK(e2.f.mean_zero());
}

TEST_CASE("potential energy by quadrature") {
  const Grid g(kTwoPi, 16);
  const SpectralField u = cosine_mode(g, 1, 0, 0, 2.0);
  // (u^4/4, 1) = vol * 16 * 3/8 / 4
  CHECK(potential_energy(u, NonlinearitySpec::cubic()) == Catch::Approx(g.volume() * 1.5).epsilon(1e-12));
  CHECK(potential_energy(u, NonlinearitySpec::zero()) == 0.0);
}

TEST_CASE("padding reduces aliasing and is idempotent for band-limited cubics") {
  const Grid g(kTwoPi, 16);
  const SpectralField u = random_field(g, 7, {1.0, 2.0});  // |m| <= 2: u^3 has |m| <= 6
  const SpectralField a = f_apply(u, NonlinearitySpec::cubic(), 1.5);
  const SpectralField b = f_apply(u, NonlinearitySpec::cubic(), 2.0);
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  CHECK(d < 1e-13);
  CHECK(padded_size(16, 1.5) == 24);
  CHECK(padded_size(10, 1.25) == 14);
  CHECK_THROWS_AS(padded_size(16, 0.5), ParameterError);
}

TEST_CASE("non-finite values raise blow-up") {
  const Grid g(kTwoPi, 8);
  SpectralField u = cosine_mode(g, 1, 0, 0, 1e200);
  CHECK_THROWS_AS(f_apply(u, NonlinearitySpec::cubic()), BlowUpError);
}
