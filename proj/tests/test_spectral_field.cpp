#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "hcho/random_fields.hpp"
#include "hcho/spectral_field.hpp"

using namespace hcho;

namespace {
const double kTwoPi = 2.0 * std::numbers::pi;
}

TEST_CASE("forward transform of a cosine hits the right modes") {
  const Grid g(kTwoPi, 16);
  const PhysicalField p = PhysicalField::sample(g, [](double x, double y, double) { return 3.0 * std::cos(2 * x - y); });
  const SpectralField f = forward_transform(p);
  CHECK(std::abs(f.at(2, -1, 0) - Complex(1.5, 0)) < 1e-13);
  CHECK(std::abs(f.at(-2, 1, 0) - Complex(1.5, 0)) < 1e-13);
  double rest = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) rest += std::norm(f[i]);
  CHECK(rest == Catch::Approx(2 * 1.5 * 1.5).epsilon(1e-12));
}

TEST_CASE("inverse transform refuses non-Hermitian data") {
  const Grid g(kTwoPi, 8);
  SpectralField f(g);
  f.at(1, 0, 0) = Complex(1.0, 0.0);
  CHECK_THROWS_AS(inverse_transform(f), DataIntegrityError);
  // the complex path accepts it
  const ComplexPhysicalField c = inverse_transform_complex(f);
  CHECK(std::abs(c.values[g.index(0, 0, 0)] - Complex(1.0, 0.0)) < 1e-14);
}

TEST_CASE("complex transform round trip") {
  const Grid g(kTwoPi, 8);
  SpectralField f(g);
  f.at(1, 2, -3) = Complex(0.3, -0.7);
  f.at(0, -1, 0) = Complex(-1.0, 0.25);
  const SpectralField back = forward_transform(inverse_transform_complex(f));
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(back[i] - f[i]) < 1e-14);
}

TEST_CASE("homogeneous Sobolev norm of a single mode") {
  const Grid g(kTwoPi * 2.0, 16);  // dk = 1/2
  const SpectralField f = cosine_mode(g, 2, 0, 0, 1.0);
  const double vol = g.volume();
  // ||cos||^2_{L2} = vol/2, weight |k|^{2s} with |k| = 1
  CHECK(sobolev_norm_squared(f, 0.0) == Catch::Approx(0.5 * vol));
  const SpectralField h = cosine_mode(g, 4, 0, 0, 1.0);  // |k| = 2
  CHECK(sobolev_norm_squared(h, 1.0) == Catch::Approx(0.5 * vol * 4.0));
  CHECK(sobolev_norm_squared(h, -1.0) == Catch::Approx(0.5 * vol / 4.0));
}

TEST_CASE("negative Sobolev order needs a mean-zero field") {
  const Grid g(kTwoPi, 8);
  SpectralField f = cosine_mode(g, 1, 0, 0, 1.0);
  f.at(0, 0, 0) = 0.5;
  CHECK_THROWS_AS(sobolev_norm(f, -1.0), DomainError);
  CHECK_NOTHROW(sobolev_norm(f, 1.0));
  CHECK_THROWS_AS(apply_inverse_laplacian(f), DomainError);
}

TEST_CASE("Laplacian and inverse compose to the identity") {
  const Grid g(5.0, 16);
  const SpectralField f = random_field(g, 3, {1.0, 5.0});
  const SpectralField a = apply_laplacian(apply_inverse_laplacian(f));
  const SpectralField b = apply_inverse_laplacian(apply_laplacian(f));
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(std::abs(a[i] - f[i]) < 1e-13);
    CHECK(std::abs(b[i] - f[i]) < 1e-13);
  }
  // sign: -Delta is positive
  CHECK(inner_product(apply_laplacian(f), f) < 0.0);
}

TEST_CASE("projector keeps exactly the band 1/N <= |k| <= N") {
  const Grid g(kTwoPi * 4.0, 16);  // dk = 1/4
  SpectralField f(g);
  f += cosine_mode(g, 1, 0, 0, 1.0);  // |k| = 0.25
  f += cosine_mode(g, 2, 0, 0, 1.0);  // |k| = 0.5, below 1/N
  f += cosine_mode(g, 0, 3, 0, 1.0);  // |k| = 0.75
  f += cosine_mode(g, 6, 0, 0, 1.0);  // |k| = 1.5
  f += cosine_mode(g, 7, 0, 0, 1.0);  // |k| = 1.75
  const SpectralField p = project_PN(f, 1.5);
  CHECK(p.at(1, 0, 0) == Complex(0.0));
  CHECK(p.at(7, 0, 0) == Complex(0.0));
  CHECK(p.at(2, 0, 0) == Complex(0.0));
  CHECK(p.at(0, 3, 0) == Complex(0.5));
  CHECK(p.at(6, 0, 0) == Complex(0.5));
  CHECK_THROWS_AS(project_PN(f, 1.0), ParameterError);
  CHECK_THROWS_AS(project_PN(f, 0.5), ParameterError);
}

TEST_CASE("energy norm combines the three pieces") {
  const Grid g(kTwoPi, 8);
  StateVector s(g);
  s.u = cosine_mode(g, 2, 0, 0, 1.0);  // |k|^2 = 4
  s.v = cosine_mode(g, 0, 1, 0, 2.0);  // |k|^2 = 1
  const double vol = g.volume();
  const double alpha = 3.0;
  const double expect = 0.5 * vol * (4.0 + alpha / 4.0) + 0.5 * vol * 4.0 / 1.0;
  CHECK(energy_norm_squared(s, alpha) == Catch::Approx(expect));
  s.v.at(0, 0, 0) = 1.0;
  CHECK_THROWS_AS(energy_norm(s, alpha), DomainError);
}

TEST_CASE("zero padding preserves the physical field") {
  const Grid g(kTwoPi, 8);
  const SpectralField f = random_field(g, 9, {1.0, 0.0});
  const SpectralField p = zero_pad(f, 16);
  const PhysicalField a = inverse_transform(f), b = inverse_transform(p);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      for (int l = 0; l < 8; ++l)
        CHECK(std::abs(a.values[(i * 8 + j) * 8 + l] - b.values[((2 * i) * 16 + 2 * j) * 16 + 2 * l]) < 1e-13);
  CHECK(sobolev_norm(p, 1.0) == Catch::Approx(sobolev_norm(f, 1.0)).epsilon(1e-13));
  CHECK_THROWS_AS(zero_pad(f, 6), ParameterError);
}

TEST_CASE("sup norm with refinement") {
  const Grid g(kTwoPi, 8);
  const SpectralField f = cosine_mode(g, 3, 0, 0, 2.0);
  CHECK(sup_norm(f) == Catch::Approx(2.0));
  CHECK(sup_norm(f, true) == Catch::Approx(2.0));
}

TEST_CASE("random fields are seeded, Hermitian and mean-zero") {
  const Grid g(kTwoPi, 8);
  const SpectralField a = random_field(g, 5), b = random_field(g, 5), c = random_field(g, 6);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(a.mean_zero());
  CHECK(hermitian_defect(a) == 0.0);
  const StateVector s = random_state(g, 5, 2.0, 3.5);
  CHECK(energy_norm(s, 2.0) == Catch::Approx(3.5));
}
