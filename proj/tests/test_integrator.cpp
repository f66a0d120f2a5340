#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "hcho/integrator.hpp"
#include "hcho/linear_propagators.hpp"
#include "hcho/random_fields.hpp"

using namespace hcho;

namespace {
const double kTwoPi = 2.0 * std::numbers::pi;

double dist(const StateVector& a, const StateVector& b, double alpha) {
  StateVector d = a;
  d -= b;
  return energy_norm(d, alpha);
}

SolverConfig config(const Grid& g, double dt, Scheme s = Scheme::etd2) {
  SolverConfig c(g);
  c.dt = dt;
  c.scheme = s;
  c.alpha = 1.0;
  c.g = cosine_mode(g, 1, 1, 0, 0.4);
  c.snapshot = 0.0;
  c.store_states = false;
  return c;
}
}  // namespace

TEST_CASE("zero nonlinearity reproduces the exact linear flow") {
  const Grid g(kTwoPi, 8);
  const StateVector x = random_state(g, 1, 1.0, 2.0);
  for (Scheme s : {Scheme::etd1, Scheme::etd2}) {
    SolverConfig c = config(g, 0.25, s);
    const Trajectory tr = evolve(x, 2.0, c, NonlinearitySpec::zero());
    SpectralField mg = c.g;
    mg *= -1.0;
    const StateVector ref = lin_cho_evolve(x, 2.0, 1.0, ForcingSampler::constant(mg, 0.0005));
    CHECK(dist(tr.final_state, ref, 1.0) < 1e-11 * energy_norm(ref, 1.0));
  }
}

TEST_CASE("observed orders of ETD1 and ETD2") {
  const Grid g(kTwoPi, 8);
  const StateVector x = random_state(g, 2, 1.0, 1.5, {2.0, 2.0});
  const NonlinearitySpec spec = NonlinearitySpec::cubic();
  const double T = 1.0;
  const StateVector ref = evolve(x, T, config(g, T / 1024), spec).final_state;
  for (Scheme s : {Scheme::etd1, Scheme::etd2}) {
    const double e1 = dist(evolve(x, T, config(g, T / 16, s), spec).final_state, ref, 1.0);
    const double e2 = dist(evolve(x, T, config(g, T / 32, s), spec).final_state, ref, 1.0);
    const double order = std::log2(e1 / e2);
    INFO(to_string(s) << " e1 = " << e1 << " e2 = " << e2);
    CHECK(order == Catch::Approx(scheme_order(s)).margin(0.2));
  }
}

TEST_CASE("snapshots, sample times and absolute time labels") {
  const Grid g(kTwoPi, 8);
  StateVector x = random_state(g, 3, 1.0, 1.0);
  x.time = 5.0;
  SolverConfig c = config(g, 0.1);
  c.snapshot = 0.5;
  c.store_states = true;
  const Trajectory tr = evolve(x, 2.0, c, NonlinearitySpec::cubic());
  REQUIRE(tr.size() == 5);
  CHECK(tr.states.size() == 5);
  CHECK(tr.times.front() == 5.0);
  CHECK(tr.times.back() == Catch::Approx(7.0).epsilon(1e-15));
  CHECK(tr.sample_times.size() == 21);
  CHECK(tr.final_state.time == tr.times.back());
  CHECK(tr.records[0].dissipation == 0.0);
  CHECK(tr.records[1].dissipation > 0.0);
  for (std::size_t i = 0; i < tr.size(); ++i) CHECK(tr.records[i].time == tr.times[i]);
}

TEST_CASE("invalid run parameters") {
  const Grid g(kTwoPi, 8);
  const StateVector x = random_state(g, 4, 1.0, 1.0);
  SolverConfig c = config(g, 0.3);
  CHECK_THROWS_AS(evolve(x, 1.0, c, NonlinearitySpec::cubic()), ConfigError);
  CHECK_THROWS_AS(evolve(x, 0.0, c, NonlinearitySpec::cubic()), ConfigError);
  c.dt = -1.0;
  CHECK_THROWS_AS(Integrator(c, NonlinearitySpec::cubic()), ConfigError);
  c = config(g, 0.1);
  c.g.at(0, 0, 0) = 1.0;
  CHECK_THROWS_AS(Integrator(c, NonlinearitySpec::cubic()), DomainError);
  c = config(g, 0.1);
  StateVector bad = x;
  bad.u.at(0, 0, 0) = 0.1;
  CHECK_THROWS_AS(step(bad, c, NonlinearitySpec::cubic()), DomainError);
  const Grid other(kTwoPi, 16);
  CHECK_THROWS_AS(step(StateVector(other), c, NonlinearitySpec::cubic()), ConfigError);
}

TEST_CASE("blow-up carries time and the partial trajectory") {
  const Grid g(kTwoPi, 8);
  StateVector x(g);
  x.u = cosine_mode(g, 1, 0, 0, 20.0);
  SolverConfig c = config(g, 0.01);
  c.g = SpectralField(g);
  auto bad = NonlinearitySpec::cubic(-1.0);
  try {
    evolve(x, 10.0, c, bad);
    FAIL("expected blow-up");
  } catch (const BlowUpError& e) {
    REQUIRE(e.time().has_value());
    CHECK(*e.time() > 0.0);
    CHECK(*e.time() < 10.0);
    REQUIRE(e.partial());
    CHECK(e.partial()->size() >= 1);
    CHECK(e.partial()->sample_times.back() <= *e.time());
  }
}

TEST_CASE("runs are deterministic") {
  const Grid g(kTwoPi, 8);
  const StateVector x = random_state(g, 5, 1.0, 2.0);
  const auto a = evolve(x, 1.0, config(g, 0.05), NonlinearitySpec::cubic());
  const auto b = evolve(x, 1.0, config(g, 0.05), NonlinearitySpec::cubic());
  CHECK(a.final_state == b.final_state);
}
