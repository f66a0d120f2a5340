#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "hcho/diagnostics.hpp"
#include "hcho/random_fields.hpp"

using namespace hcho;

namespace {
const double kTwoPi = 2.0 * std::numbers::pi;

SolverConfig config(const Grid& g, double dt, double snapshot) {
  SolverConfig c(g);
  c.dt = dt;
  c.alpha = 1.0;
  c.snapshot = snapshot;
  return c;
}
}  // namespace

TEST_CASE("snapshot scalars agree with the direct functionals") {
  const Grid g(kTwoPi, 8);
  SolverConfig c = config(g, 0.05, 0.25);
  c.g = cosine_mode(g, 1, 1, 1, 0.5);
  const StateVector x = random_state(g, 1, 1.0, 2.0);
  const NonlinearitySpec spec = NonlinearitySpec::cubic();
  const Trajectory tr = evolve(x, 1.0, c, spec);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const auto& r = tr.records[i];
    const StateVector& s = tr.states[i];
    CHECK(r.full_energy() == Catch::Approx(full_energy(s, c.g, spec, 1.0)).epsilon(1e-12));
    CHECK(r.lyapunov(0.1) == Catch::Approx(lyapunov(s, 0.1, spec, 1.0)).epsilon(1e-12));
    CHECK(std::sqrt(r.e2_sq) == Catch::Approx(e2_norm(s)).epsilon(1e-12));
    CHECK(r.cross == Catch::Approx(lyapunov_cross_term(s)).epsilon(1e-10).margin(1e-14));
  }
}

TEST_CASE("decay fit recovers an exponential") {
  std::vector<double> t, v;
  for (int i = 0; i <= 50; ++i) {
    t.push_back(0.2 * i);
    v.push_back(3.0 * std::exp(-0.7 * t.back()));
  }
  const DecayFit f = fit_decay_rate(t, v, 1.0);
  CHECK(f.beta == Catch::Approx(0.7).epsilon(1e-12));
  CHECK(f.C == Catch::Approx(3.0).epsilon(1e-12));
  CHECK(f.residual < 1e-12);
  v[40] = 0.0;
  CHECK_THROWS_AS(fit_decay_rate(t, v, 0.5), FitError);
  CHECK_THROWS_AS(fit_decay_rate({1.0}, {1.0}, 1.0), FitError);
}

TEST_CASE("Lyapunov functional decays with g = 0 and a calibrated delta") {
  const Grid g(kTwoPi, 8);
  const StateVector x = random_state(g, 2, 1.0, 3.0, {2.0, 2.0});
  const Trajectory tr = evolve(x, 8.0, config(g, 0.02, 0.2), NonlinearitySpec::cubic());
  const DiagnosticsReport rep = build_report(tr);
  CHECK(rep.delta_calibrated);
  CHECK(rep.delta > 0.0);
  CHECK(rep.lyapunov_violation <= 1e-12);
  REQUIRE(rep.decay);
  CHECK(rep.decay->beta > 0.0);
  // energy identity: full energy drop equals accumulated dissipation to O(dt^2)
  for (std::size_t i = 1; i < tr.size(); ++i) {
    const double lhs = tr.records[i - 1].full_energy() - tr.records[i].full_energy();
    CHECK(lhs == Catch::Approx(tr.records[i].dissipation).epsilon(1e-2).margin(1e-8));
  }
}

TEST_CASE("calibration fails on a growing series") {
  std::vector<SnapshotRecord> rec(3);
  for (int i = 0; i < 3; ++i) {
    rec[i].energy_sq = 1.0 + i;
    rec[i].time = i;
  }
  CHECK_FALSE(calibrate_delta(rec, 0.5, 5).has_value());
  CHECK(lyapunov_max_violation(rec, 0.1) > 0.0);
  CHECK_THROWS_AS(calibrate_delta({rec[0]}), RangeError);
}

TEST_CASE("Strichartz window norm from per-step samples") {
  const Grid g(kTwoPi, 8);
  Trajectory tr(g);
  for (int i = 0; i <= 10; ++i) {
    tr.sample_times.push_back(0.1 * i);
    tr.sample_sup.push_back(2.0);
  }
  CHECK(strichartz_window_norm(tr, 0.0, 1.0) == Catch::Approx(2.0));
  CHECK(strichartz_window_norm(tr, 0.25, 0.5) == Catch::Approx(2.0 * std::pow(0.5, 0.25)));
  CHECK_THROWS_AS(strichartz_window_norm(tr, 0.5, 1.0), RangeError);
  CHECK_THROWS_AS(strichartz_window_norm(tr, 0.0, 0.0), ParameterError);
}

TEST_CASE("Lipschitz fit on a perturbed pair") {
  const Grid g(kTwoPi, 8);
  SolverConfig c = config(g, 0.02, 0.1);
  c.g = cosine_mode(g, 1, 0, 0, 0.5);
  const StateVector x = random_state(g, 3, 1.0, 2.0, {2.0, 2.0});
  StateVector y = x;
  y.u += cosine_mode(g, 1, 1, 0, 1e-3);
  const NonlinearitySpec spec = NonlinearitySpec::cubic();
  const Trajectory a = evolve(x, 3.0, c, spec), b = evolve(y, 3.0, c, spec);
  for (bool str : {false, true}) {
    const LipschitzFit f = lipschitz_fit(a, b, str);
    CHECK(std::isfinite(f.C));
    CHECK(std::isfinite(f.K));
    CHECK(f.bound_holds);
    CHECK(f.C >= 1.0);
    CHECK_FALSE(lipschitz_bound_holds(f, 0.5 * f.C, f.K));
  }
  CHECK_THROWS_AS(lipschitz_fit(a, a), FitError);
}

TEST_CASE("elliptic residual is second order in the snapshot spacing") {
  const Grid g(kTwoPi, 8);
  const NonlinearitySpec spec = NonlinearitySpec::cubic();
  SolverConfig c = config(g, 0.001, 0.0);
  c.g = cosine_mode(g, 1, 0, 0, 0.5);
  const StateVector x = random_state(g, 4, 1.0, 1.0, {2.0, 2.0});
  auto residual = [&](double spacing) {
    c.snapshot = spacing;
    const Trajectory tr = evolve(x, 2 * spacing, c, spec);
    return elliptic_residual(tr, 1, c.g, spec);
  };
  const double r1 = residual(0.04), r2 = residual(0.02);
  CHECK(std::log2(r1 / r2) == Catch::Approx(2.0).margin(0.3));
}
