#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "hcho/duhamel.hpp"
#include "hcho/random_fields.hpp"

using namespace hcho;

namespace {
const double kTwoPi = 2.0 * std::numbers::pi;

SolverConfig config(const Grid& g) {
  SolverConfig c(g);
  c.dt = 0.005;
  c.alpha = 1.0;
  c.g = cosine_mode(g, 1, 0, 1, 0.3);
  return c;
}
}  // namespace

TEST_CASE("Duhamel iterates contract and approach the integrator") {
  const Grid g(kTwoPi, 8);
  const StateVector x = random_state(g, 1, 1.0, 2.0, {2.0, 2.0});
  const SolverConfig c = config(g);
  const DuhamelResult r = duhamel_iterate(x, 0.05, 5, c, NonlinearitySpec::cubic());
  REQUIRE(r.ratios.size() == 4);
  for (double q : r.ratios) CHECK(q < 1.0);
  CHECK_FALSE(r.diverged);
  CHECK(r.times.size() == 11);
  CHECK(r.times.back() == Catch::Approx(0.05));
  SolverConfig fine = c;
  fine.dt = 0.05 / 64;
  const StateVector ref = evolve(x, 0.05, fine, NonlinearitySpec::cubic()).final_state;
  const StateVector d = r.iterates.back().back() - ref;
  CHECK(energy_norm(d, 1.0) < 1e-6 * energy_norm(ref, 1.0));
}

TEST_CASE("contraction weakens on longer intervals") {
  const Grid g(kTwoPi, 8);
  // big enough that the differences stay above roundoff for five iterations
  const StateVector x = random_state(g, 2, 1.0, 20.0, {2.0, 2.0});
  const SolverConfig c = config(g);
  const auto a = duhamel_iterate(x, 0.05, 5, c, NonlinearitySpec::cubic());
  const auto b = duhamel_iterate(x, 0.10, 5, c, NonlinearitySpec::cubic());
  for (std::size_t j = 0; j < a.ratios.size(); ++j) CHECK(b.ratios[j] > a.ratios[j]);
}

TEST_CASE("linear problem: the first iterate is already the fixed point") {
  const Grid g(kTwoPi, 8);
  const StateVector x = random_state(g, 3, 1.0, 1.0);
  const auto r = duhamel_iterate(x, 0.05, 3, config(g), NonlinearitySpec::zero());
  for (double d : r.differences) CHECK(d == 0.0);
  for (double q : r.ratios) CHECK(q == 0.0);
  CHECK_FALSE(r.diverged);
}

TEST_CASE("large data on a long interval diverges") {
  const Grid g(kTwoPi, 8);
  const StateVector x = random_state(g, 4, 1.0, 200.0, {2.0, 2.0});
  SolverConfig c = config(g);
  c.dt = 0.05;
  const auto r = duhamel_iterate(x, 1.0, 4, c, NonlinearitySpec::cubic());
  CHECK(r.diverged);
}

TEST_CASE("argument checks") {
  const Grid g(kTwoPi, 8);
  const StateVector x = random_state(g, 5, 1.0, 1.0);
  CHECK_THROWS_AS(duhamel_iterate(x, 0.05, 1, config(g), NonlinearitySpec::cubic()), ParameterError);
  CHECK_THROWS_AS(duhamel_iterate(x, 0.0, 3, config(g), NonlinearitySpec::cubic()), ParameterError);
}
