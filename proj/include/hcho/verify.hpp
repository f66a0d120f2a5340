#pragma once

// Small-grid invariant suite behind `hcho verify`. Every check is
// deterministic; the hooks let tests swap in faulty operators.

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "hcho/checkpoint.hpp"
#include "hcho/diagnostics.hpp"
#include "hcho/duhamel.hpp"
#include "hcho/integrator.hpp"
#include "hcho/linear_propagators.hpp"
#include "hcho/mode_propagator.hpp"
#include "hcho/nonlinearity.hpp"
#include "hcho/ode_oracle.hpp"
#include "hcho/random_fields.hpp"
#include "hcho/spectral_field.hpp"
#include "hcho/table.hpp"

namespace hcho {

struct VerifyHooks {
  std::function<SpectralField(const SpectralField&)> inverse_laplacian = [](const SpectralField& f) {
    return apply_inverse_laplacian(f);
  };
};

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;      // measured quantity
  double tolerance = 0.0;  // threshold it was compared against
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return !checks.empty();
  }
  std::string table() const {
    CsvTable t({"check", "status", "value", "tolerance", "detail"});
    for (const auto& c : checks)
      t.row().text(c.name).text(c.passed ? "PASS" : "FAIL").num(c.value).num(c.tolerance).text(c.detail);
    return t.str();
  }
};

namespace detail {

inline double rel_diff(const SpectralField& a, const SpectralField& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return den > 0.0 ? num / den : num;
}

}  // namespace detail

inline VerifyReport run_verify(const VerifyHooks& hooks = {}) {
  VerifyReport rep;
  auto check = [&](const std::string& name, double value, double tol, const std::string& what = "") {
    const bool ok = std::isfinite(value) && value <= tol;
    rep.checks.push_back({name, ok, value, tol, what});
  };
  auto guarded = [&](const std::string& name, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      rep.checks.push_back({name, false, std::numeric_limits<double>::quiet_NaN(), 0.0, e.what()});
    }
  };
  const double two_pi = 2.0 * std::numbers::pi;
  const Grid g8(two_pi, 8);
  const Grid g16(two_pi, 16);

  guarded("parseval", [&] {
    const SpectralField f = random_field(g16, 11, {1.0, 6.0});
    const PhysicalField p = inverse_transform(f);
    double quad = 0.0;
    for (double x : p.values) quad += x * x;
    quad *= g16.cell_volume();
    const double spec = sobolev_norm_squared(f, 0.0);
    check("parseval", std::abs(quad - spec) / spec, 1e-10, "L^2 quadrature vs mode sum");
  });

  guarded("transform_roundtrip", [&] {
    const PhysicalField p = PhysicalField::sample(g16, [](double x, double y, double z) {
      return std::sin(x) * std::cos(2 * y) + 0.3 * std::cos(x + y - z);
    });
    const PhysicalField back = inverse_transform(forward_transform(p));
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      err = std::max(err, std::abs(p.values[i] - back.values[i]));
      scale = std::max(scale, std::abs(p.values[i]));
    }
    check("transform_roundtrip", err / scale, 1e-12);
  });

  guarded("projector", [&] {
    const SpectralField f = random_field(g16, 12, {1.0, 7.0});
    const SpectralField h = random_field(g16, 13, {1.0, 7.0});
    const SpectralField pf = project_PN(f, 2.5);
    const double idem = detail::rel_diff(project_PN(pf, 2.5), pf);
    const double adj = std::abs(inner_product(pf, h) - inner_product(f, project_PN(h, 2.5))) /
                       (l2_norm(f) * l2_norm(h));
    check("projector", std::max(idem, adj), 1e-12, "idempotent and self-adjoint");
  });

  guarded("inverse_laplacian_shift", [&] {
    const SpectralField f = random_field(g16, 14, {1.0, 7.0});
    const SpectralField il = hooks.inverse_laplacian(f);
    double worst = 0.0;
    for (double s : {-1.0, 0.0, 1.0, 2.0}) {
      const double a = sobolev_norm(il, s), b = sobolev_norm(f, s - 2.0);
      worst = std::max(worst, std::abs(a - b) / b);
    }
    worst = std::max(worst, detail::rel_diff(apply_laplacian(il), f));
    check("inverse_laplacian_shift", worst, 1e-12, "norm shift by 2 and Delta(Delta^-1 f) = f");
  });

  guarded("linear_oracles", [&] {
    // every |k|^2 of an 8^3 grid with L = 2 pi, t in {1, 5, 10}
    std::vector<char> present(g8.max_msq() + 1, 0);
    for (int m : g8.msq_table()) present[m] = 1;
    double worst = 0.0;
    for (int msq = 1; msq <= g8.max_msq(); ++msq) {
      if (!present[msq]) continue;
      const double w = double(msq);
      for (double t : {1.0, 5.0, 10.0}) {
        const Mat2 phi = mode_propagator(w * w + 1.0, t);
        const auto [u, v] = phi.apply(1.0, -0.5);
        const auto ref = oracle::damped_mode(w * w + 1.0, 1.0, -0.5, t);
        const double scale = std::max(std::hypot(ref[0], ref[1]), 1e-300);
        worst = std::max(worst, std::hypot(u - ref[0], v - ref[1]) / scale);
        const auto pr = oracle::plate_mode(w, 1.0, -0.5, t);
        const double pu = std::cos(w * t) - 0.5 * std::sin(w * t) / w;
        const double pv = -w * std::sin(w * t) - 0.5 * std::cos(w * t);
        worst = std::max(worst, std::hypot(pu - pr[0], pv - pr[1]) / std::hypot(pr[0], pr[1]));
        const auto sr = oracle::schrodinger_mode(w, 1.0, 0.0, t);
        const Complex sc = std::polar(1.0, -w * t);
        worst = std::max(worst, std::hypot(sc.real() - sr[0], sc.imag() - sr[1]));
      }
    }
    check("linear_oracles", worst, 1e-10, "closed forms vs adaptive RKF78");
  });

  guarded("zero_mode_oracle", [&] {
    double worst = 0.0;
    for (double alpha : {0.05, 0.25, 1.0, 3.0}) {
      const auto [u, v] = zero_mode_solution(0.7, -0.2, alpha, 4.0);
      const auto ref = oracle::damped_mode(alpha, 0.7, -0.2, 4.0);
      worst = std::max(worst, std::hypot(u - ref[0], v - ref[1]) / std::hypot(ref[0], ref[1]));
    }
    check("zero_mode_oracle", worst, 1e-12);
  });

  guarded("conservation", [&] {
    const SpectralField U0 = random_field(g8, 15, {1.0, 3.0});
    const SpectralField U = schrodinger_evolve(U0, 100.0);
    const double schro = std::abs(sobolev_norm(U, 1.0) - sobolev_norm(U0, 1.0)) / sobolev_norm(U0, 1.0);
    const SpectralField V1 = random_field(g8, 16, {1.0, 3.0});
    const auto [V, W] = plate_evolve(U0, V1, 37.0);
    const double e0 = plate_energy(U0, V1);
    const double plate = std::abs(plate_energy(V, W) - e0) / e0;
    check("schrodinger_h1_drift", schro, 1e-12);
    check("plate_energy_drift", plate, 1e-10);
  });

  guarded("lin_cho_group", [&] {
    const StateVector x = random_state(g8, 17, 1.0, 2.0, {1.0, 3.0});
    const StateVector a = lin_cho_evolve(lin_cho_evolve(x, 0.7, 1.0), 1.3, 1.0);
    const StateVector b = lin_cho_evolve(x, 2.0, 1.0);
    check("lin_cho_group", std::max(detail::rel_diff(a.u, b.u), detail::rel_diff(a.v, b.v)), 1e-10);
  });

  guarded("lin_cho_energy_identity", [&] {
    // d/dt 1/2 ||xi||_E^2 = -||u_t||^2_{-1}; central difference vs. exact rate
    const StateVector x = random_state(g8, 18, 1.0, 2.0, {1.0, 3.0});
    double worst = 0.0;
    for (double t : {0.5, 1.5}) {
      const double h = 1e-3;
      const double ep = energy_norm_squared(lin_cho_evolve(x, t + h, 1.0), 1.0);
      const double em = energy_norm_squared(lin_cho_evolve(x, t - h, 1.0), 1.0);
      const StateVector s = lin_cho_evolve(x, t, 1.0);
      const double rate = -sobolev_norm_squared(s.v, -1.0);
      worst = std::max(worst, std::abs(0.25 * (ep - em) / h - rate) / std::abs(rate));
    }
    check("lin_cho_energy_identity", worst, 1e-5, "second-order difference, h = 1e-3");
  });

  guarded("structural_conditions", [&] {
    const bool cubic = verify_structural_conditions(NonlinearitySpec::cubic(), 10.0, 2001).all_passed();
    NonlinearitySpec neg = NonlinearitySpec::polynomial(-1.0, 0.0, 0.0, 0.0, 2.0);
    const bool neg_fails = !verify_structural_conditions(neg, 10.0, 2001).sign.passed;
    NonlinearitySpec quint = NonlinearitySpec::polynomial(0.0, 0.0, 1.0, 0.0, 1.0);
    const bool quint_fails = !verify_structural_conditions(quint, 2.0, 2001).growth.passed;
    check("structural_conditions", (cubic && neg_fails && quint_fails) ? 0.0 : 1.0, 0.0,
          "u^3 passes, -u fails sign, u^5 fails growth");
  });

  guarded("cubic_trig_identity", [&] {
    const double a = 0.8;
    const SpectralField u = cosine_mode(g16, 1, 0, 0, a);
    const SpectralField f = f_apply(u, NonlinearitySpec::cubic());
    const double e1 = std::abs(f.at(1, 0, 0).real() - 0.5 * 0.75 * a * a * a);
    const double e3 = std::abs(f.at(3, 0, 0).real() - 0.5 * 0.25 * a * a * a);
    check("cubic_trig_identity", std::max(e1, e3), 1e-14);
  });

  guarded("step_linear_limit", [&] {
    SolverConfig cfg(g16);
    cfg.dt = 0.1;
    cfg.alpha = 1.0;
    const StateVector x = random_state(g16, 19, 1.0, 1.0);
    const StateVector a = step(x, cfg, NonlinearitySpec::zero());
    const StateVector b = lin_cho_evolve(x, 0.1, 1.0);
    check("step_linear_limit", std::max(detail::rel_diff(a.u, b.u), detail::rel_diff(a.v, b.v)), 1e-10);
  });

  guarded("equilibrium", [&] {
    // g := f(u*) - Delta u* - alpha Delta^{-1} u* makes (u*, 0) stationary
    const NonlinearitySpec spec = NonlinearitySpec::cubic();
    SpectralField us = cosine_mode(g16, 1, 0, 0, 0.6);
    us += cosine_mode(g16, 0, 1, 1, 0.3);
    SolverConfig cfg(g16);
    cfg.dt = 0.05;
    cfg.alpha = 1.0;
    cfg.g = f_apply(us, spec) - apply_laplacian(us) - 1.0 * apply_inverse_laplacian(us);
    StateVector x(us, SpectralField(g16), 0.0);
    const Trajectory tr = evolve(x, 1.0, cfg, spec);
    const StateVector& y = tr.final_state;
    check("equilibrium", std::max(detail::rel_diff(y.u, us), sobolev_norm(y.v, -1.0)), 1e-11);
  });

  guarded("energy_identity_order", [&] {
    const NonlinearitySpec spec = NonlinearitySpec::cubic();
    const Grid g(two_pi, 16);
    const StateVector x = random_state(g, 20, 1.0, 3.0, {2.0, 3.0});
    auto residual = [&](double dt) {
      SolverConfig cfg(g);
      cfg.dt = dt;
      cfg.alpha = 1.0;
      cfg.snapshot = 0.2;
      cfg.g = cosine_mode(g, 1, 1, 0, 0.5);
      const Trajectory tr = evolve(x, 0.4, cfg, spec);
      double worst = 0.0;
      for (std::size_t i = 1; i < tr.records.size(); ++i)
        worst = std::max(worst, std::abs(tr.records[i].full_energy() - tr.records[i - 1].full_energy() +
                                         tr.records[i].dissipation));
      return worst;
    };
    const double r1 = residual(0.02), r2 = residual(0.01);
    const double ratio = r1 / r2;
    check("energy_identity_order", std::abs(std::log2(ratio) - 2.0), 0.2,
          "log2 of residual ratio under dt halving, expected 2");
  });

  guarded("lyapunov_monotone", [&] {
    SolverConfig cfg(g8);
    cfg.dt = 0.05;
    cfg.alpha = 1.0;
    cfg.snapshot = 0.25;
    const StateVector x = random_state(g8, 21, 1.0, 2.0, {2.0, 2.0});
    const Trajectory tr = evolve(x, 10.0, cfg, NonlinearitySpec::cubic());
    const auto delta = calibrate_delta(tr.records);
    const double viol = delta ? lyapunov_max_violation(tr.records, *delta) : 1.0;
    check("lyapunov_monotone", viol, 1e-12, delta ? "delta = " + format_number(*delta) : "no delta found");
  });

  guarded("checkpoint_roundtrip", [&] {
    const StateVector x = random_state(g8, 22, 1.0, 1.5);
    const Checkpoint c = decode_checkpoint(encode_checkpoint(x, 0x1234), 0x1234);
    check("checkpoint_roundtrip", (c.state.u == x.u && c.state.v == x.v && c.state.time == x.time) ? 0.0 : 1.0, 0.0);
  });

  guarded("duhamel_contraction", [&] {
    SolverConfig cfg(g8);
    cfg.dt = 0.005;
    cfg.alpha = 1.0;
    const StateVector x = random_state(g8, 23, 1.0, 2.0, {2.0, 2.0});
    const DuhamelResult r = duhamel_iterate(x, 0.05, 4, cfg, NonlinearitySpec::cubic());
    double worst = 0.0;
    for (double q : r.ratios) worst = std::max(worst, q);
    check("duhamel_contraction", worst, 0.999, "largest contraction ratio");
  });

  guarded("decay_rate_oracle", [&] {
    const Grid g(two_pi, 8);
    double worst = 0.0;
    for (int m = 1; m <= 3; ++m) {
      StateVector x(g);
      x.u = cosine_mode(g, m, 0, 0, 1.0);
      std::vector<double> t, e;
      for (int j = 0; j <= 400; ++j) {
        t.push_back(0.05 * j);
        e.push_back(energy_norm(lin_cho_evolve(x, t.back(), 1.0), 1.0));
      }
      const double beta = fit_decay_rate(t, e, 0.5).beta;
      const double ref = ModeLinearSystem(double(m * m), 1.0).decay_rate();
      worst = std::max(worst, std::abs(beta - ref) / ref);
    }
    check("decay_rate_oracle", worst, 0.05);
  });

  return rep;
}

}  // namespace hcho
