#pragma once

// Exponential time stepping for
//   u_tt + u_t + Delta(Delta u - f(u) + g) + alpha u = 0,
// per mode y' = A y + (0, -omega N(t)) with N = P f(u) - g.
//
// etd1:  y1 = Phi(h) y0 + W1(h) b0
// etd2:  y_half = Phi(h/2) y0 + W1(h/2) b0
//        y1 = Phi(h) y0 + (W1(h) - 2V(h)) b0 + 2 V(h) b_half
// The second form interpolates the forcing linearly through t0 and t0 + h/2;
// it keeps order two on the stiff modes (no order reduction from |k|^4).

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "hcho/errors.hpp"
#include "hcho/mode_propagator.hpp"
#include "hcho/nonlinearity.hpp"
#include "hcho/spectral_field.hpp"

namespace hcho {

enum class Scheme { etd1, etd2 };

inline const char* to_string(Scheme s) { return s == Scheme::etd1 ? "etd1" : "etd2"; }
inline int scheme_order(Scheme s) { return s == Scheme::etd1 ? 1 : 2; }

struct SolverConfig {
  double dt = 0.01;
  Scheme scheme = Scheme::etd2;
  double padding = 1.0;   // evaluation grid factor for f(u)
  double alpha = 1.0;
  SpectralField g;        // mean-zero
  double snapshot = 0.0;  // snapshot spacing; 0 means every step
  bool store_states = true;
  double blowup_threshold = 1e8;
  std::uint64_t config_hash = 0;

  explicit SolverConfig(const Grid& grid) : g(grid) {}

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("solver: dt must be positive");
    if (!(alpha > 0.0)) throw ParameterError("solver: alpha must be positive");
    if (!(padding >= 1.0)) throw ConfigError("solver: padding factor must be >= 1");
    if (!g.mean_zero()) throw DomainError("solver: forcing g must be mean-zero");
    if (snapshot < 0.0) throw ConfigError("solver: snapshot spacing must be >= 0");
  }
};

// Scalars cached per snapshot so diagnostics never need the states.
struct SnapshotRecord {
  double time = 0.0;
  double energy_sq = 0.0;     // ||xi||_E^2
  double v_hm1_sq = 0.0;      // ||u_t||^2_{H^-1}
  double u_hm1_sq = 0.0;      // ||u||^2_{H^-1}
  double potential = 0.0;     // (F(u), 1)
  double g_dot_u = 0.0;       // (g, u)
  double cross = 0.0;         // (u_t, -Delta^{-1} u)
  double e2_sq = 0.0;         // second energy norm squared
  double sup = 0.0;           // max |u| on the grid
  double dissipation = 0.0;   // int ||u_t||^2_{H^-1} dt since the previous snapshot

  double energy_norm() const { return std::sqrt(energy_sq); }
  double full_energy() const { return 0.5 * energy_sq + potential - g_dot_u; }
  double lyapunov(double delta) const { return 0.5 * energy_sq + potential + delta * (cross + 0.5 * u_hm1_sq); }
};

struct Trajectory {
  Grid grid;
  double alpha = 1.0;
  double dt = 0.0;
  double snapshot_spacing = 0.0;
  std::uint64_t config_hash = 0;
  std::vector<double> times;
  std::vector<SnapshotRecord> records;
  std::vector<StateVector> states;  // empty unless states were stored
  // Sup-norm of u at every step, for Strichartz quadrature.
  std::vector<double> sample_times;
  std::vector<double> sample_sup;
  StateVector final_state;

  explicit Trajectory(const Grid& g) : grid(g), final_state(g) {}

  std::size_t size() const { return times.size(); }
  bool has_states() const { return !states.empty(); }
  double start() const { return times.empty() ? 0.0 : times.front(); }
  double end() const { return times.empty() ? 0.0 : times.back(); }
};

using Observer = std::function<void(const StateVector&, const SnapshotRecord&)>;

// Snapshot scalars from a state; potential and sup are supplied by the caller
// when they are already known from an f evaluation.
inline SnapshotRecord make_record(const StateVector& s, double alpha, const SpectralField& g, double potential,
                                  double sup) {
  SnapshotRecord r;
  r.time = s.time;
  const Grid& grid = s.grid();
  const auto u = s.u.coefficients();
  const auto v = s.v.coefficients();
  const auto gc = g.coefficients();
  double vh = 0, uh1 = 0, uhm = 0, cross = 0, gu = 0, e2 = 0;
  for (std::size_t i = 1; i < u.size(); ++i) {
    const double k2 = grid.k2(i);
    const double nu = std::norm(u[i]), nv = std::norm(v[i]);
    vh += nv / k2;
    uh1 += k2 * nu;
    uhm += nu / k2;
    cross += (v[i].real() * u[i].real() + v[i].imag() * u[i].imag()) / k2;
    gu += gc[i].real() * u[i].real() + gc[i].imag() * u[i].imag();
    e2 += (k2 * k2 * k2 + 1.0 / k2) * nu + (k2 + 1.0 / k2) * nv;
  }
  const double vol = grid.volume();
  r.v_hm1_sq = vh * vol;
  r.u_hm1_sq = uhm * vol;
  r.energy_sq = (vh + uh1 + alpha * uhm) * vol;
  r.cross = cross * vol;
  r.g_dot_u = gu * vol;
  r.e2_sq = e2 * vol;
  r.potential = potential;
  r.sup = sup;
  return r;
}

class Integrator {
 public:
  Integrator(SolverConfig config, NonlinearitySpec spec)
      : cfg_(std::move(config)), spec_(spec), table_(cfg_.g.grid(), cfg_.alpha) {
    cfg_.validate();
    full_ = table_.etd(cfg_.dt);
    if (cfg_.scheme == Scheme::etd2) half_ = table_.etd(0.5 * cfg_.dt);
  }

  const SolverConfig& config() const { return cfg_; }
  const NonlinearitySpec& spec() const { return spec_; }
  const Grid& grid() const { return cfg_.g.grid(); }

  // One step; `start` receives the f evaluation at the initial state.
  StateVector step(const StateVector& s, NonlinearEvaluation* start = nullptr) const {
    check_state(s);
    NonlinearEvaluation e0 = evaluate(s.u, s.time);
    StateVector out(grid(), s.time + cfg_.dt);
    if (cfg_.scheme == Scheme::etd1) {
      advance(s, e0.f, nullptr, full_, out);
    } else {
      StateVector mid(grid(), s.time + 0.5 * cfg_.dt);
      advance(s, e0.f, nullptr, half_, mid);
      const NonlinearEvaluation em = evaluate(mid.u, mid.time);
      advance(s, e0.f, &em.f, full_, out);
    }
    if (start) *start = std::move(e0);
    return out;
  }

  // Advances by T (a whole number of steps), recording a snapshot every
  // `snapshot` time units and the sup-norm at every step. On blow-up the
  // partial trajectory is attached to the exception.
  Trajectory evolve(const StateVector& initial, double T, const std::vector<Observer>& observers = {}) const {
    check_state(initial);
    const long steps = step_count(T, cfg_.dt, "T");
    const long every = cfg_.snapshot > 0.0 ? step_count(cfg_.snapshot, cfg_.dt, "snapshot spacing") : 1;
    auto traj = std::make_shared<Trajectory>(grid());
    traj->alpha = cfg_.alpha;
    traj->dt = cfg_.dt;
    traj->snapshot_spacing = double(every) * cfg_.dt;
    traj->config_hash = cfg_.config_hash;

    const double t0 = initial.time;
    StateVector s = initial;
    double dissipation = 0.0;
    double prev_vh = 0.0;
    bool warned = false;
    auto snapshot = [&](const StateVector& st, const NonlinearEvaluation& e) {
      SnapshotRecord r = make_record(st, cfg_.alpha, cfg_.g, e.potential, e.u_sup);
      r.dissipation = dissipation;
      dissipation = 0.0;
      traj->times.push_back(st.time);
      traj->records.push_back(r);
      if (cfg_.store_states) traj->states.push_back(st);
      for (const auto& ob : observers) ob(st, r);
      return r.v_hm1_sq;
    };
    try {
      for (long k = 0; k <= steps; ++k) {
        NonlinearEvaluation e{SpectralField(grid())};
        StateVector next(grid());
        if (k < steps) {
          next = step(s, &e);
        } else {
          e = evaluate(s.u, s.time);
        }
        traj->sample_times.push_back(s.time);
        traj->sample_sup.push_back(e.u_sup);
        if (!warned && cfg_.dt * spec_.fp_bound(e.u_sup) > 1.0) {
          warned = true;
          spdlog::warn("evolve: dt * max|f'(u)| = {:.3g} exceeds 1 at t = {:.6g}; consider a smaller dt",
                       cfg_.dt * spec_.fp_bound(e.u_sup), s.time);
        }
        const double vh = sobolev_norm_squared(s.v, -1.0);
        if (k > 0) dissipation += 0.5 * cfg_.dt * (prev_vh + vh);
        prev_vh = vh;
        if (k % every == 0 || k == steps) snapshot(s, e);
        if (k < steps) {
          s = std::move(next);
          s.time = t0 + double(k + 1) * cfg_.dt;
        }
      }
    } catch (const BlowUpError& err) {
      traj->final_state = s;
      const double when = err.time().value_or(s.time);
      throw err.with_context(when, traj);
    }
    traj->final_state = s;
    return std::move(*traj);
  }

  NonlinearEvaluation evaluate(const SpectralField& u, double t) const {
    NonlinearEvaluation e{SpectralField(grid())};
    try {
      e = f_evaluate(u, spec_, cfg_.padding, true);
    } catch (const BlowUpError& err) {
      throw BlowUpError(err.what(), t);
    }
    if (!(e.u_sup <= cfg_.blowup_threshold)) {
      throw BlowUpError("blow-up: sup|u| = " + std::to_string(e.u_sup) + " at t = " + std::to_string(t), t);
    }
    return e;
  }

 private:
  static long step_count(double T, double dt, const char* what) {
    if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError(std::string("evolve: ") + what + " must be positive");
    const double r = T / dt;
    const long k = std::lround(r);
    if (k < 1 || std::abs(r - double(k)) > 1e-9 * std::max(1.0, r)) {
      throw ConfigError(std::string("evolve: ") + what + " must be a positive multiple of dt");
    }
    return k;
  }

  void check_state(const StateVector& s) const {
    require_same_grid(s.grid(), grid(), "integrator");
    if (!s.mean_zero()) throw DomainError("integrator: state must be mean-zero");
  }

  // out = Phi y + W1 b0 (+ V-correction when f_mid is given), b = -omega (f - g).
  void advance(const StateVector& s, const SpectralField& f0, const SpectralField* f_mid,
               const std::vector<EtdWeights>& w, StateVector& out) const {
    const Grid& g = grid();
    const auto msq = g.msq_table();
    const auto u0 = s.u.coefficients();
    const auto v0 = s.v.coefficients();
    const auto gc = cfg_.g.coefficients();
    const auto a = f0.coefficients();
    auto u = out.u.coefficients();
    auto v = out.v.coefficients();
    for (std::size_t i = 1; i < u.size(); ++i) {
      const EtdWeights& e = w[msq[i]];
      const double omega = g.k2(i);
      const Complex b0 = -omega * (a[i] - gc[i]);
      auto [nu, nv] = e.phi.apply(u0[i], v0[i]);
      if (f_mid) {
        const Complex bm = -omega * ((*f_mid)[i] - gc[i]);
        nu += (e.w1_u - 2.0 * e.v_u) * b0 + 2.0 * e.v_u * bm;
        nv += (e.w1_v - 2.0 * e.v_v) * b0 + 2.0 * e.v_v * bm;
      } else {
        nu += e.w1_u * b0;
        nv += e.w1_v * b0;
      }
      u[i] = nu;
      v[i] = nv;
    }
  }

  SolverConfig cfg_;
  NonlinearitySpec spec_;
  ModeTable table_;
  std::vector<EtdWeights> full_, half_;
};

inline StateVector step(const StateVector& state, const SolverConfig& config, const NonlinearitySpec& spec) {
  return Integrator(config, spec).step(state);
}

inline Trajectory evolve(const StateVector& state, double T, const SolverConfig& config,
                         const NonlinearitySpec& spec, const std::vector<Observer>& observers = {}) {
  return Integrator(config, spec).evolve(state, T, observers);
}

}  // namespace hcho
