#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hcho/errors.hpp"
#include "hcho/integrator.hpp"
#include "hcho/nonlinearity.hpp"
#include "hcho/spectral_field.hpp"

namespace hcho {

// 1/2 ||xi||_E^2 + (F(u), 1) - (g, u)
inline double full_energy(const StateVector& s, const SpectralField& g, const NonlinearitySpec& spec, double alpha,
                          double padding = 1.0) {
  return 0.5 * energy_norm_squared(s, alpha) + potential_energy(s.u, spec, padding) - inner_product(g, s.u);
}

// (u_t, -Delta^{-1} u)
inline double lyapunov_cross_term(const StateVector& s) {
  return inner_product(s.v, -1.0 * apply_inverse_laplacian(s.u));
}

// 1/2 ||xi||_E^2 + delta (u_t, -Delta^{-1} u) + delta/2 ||u||^2_{H^-1} + (F(u), 1)
inline double lyapunov(const StateVector& s, double delta, const NonlinearitySpec& spec, double alpha,
                       double padding = 1.0) {
  if (!(delta > 0.0)) throw ParameterError("lyapunov: delta must be positive");
  return 0.5 * energy_norm_squared(s, alpha) + delta * lyapunov_cross_term(s) +
         0.5 * delta * sobolev_norm_squared(s.u, -1.0) + potential_energy(s.u, spec, padding);
}

// (||u||^2_{H^3} + ||u||^2_{H^-1} + ||v||^2_{H^1} + ||v||^2_{H^-1})^{1/2}
inline double e2_norm(const StateVector& s) {
  if (!s.mean_zero()) throw DomainError("e2_norm: state must be mean-zero");
  return std::sqrt(sobolev_norm_squared(s.u, 3.0) + sobolev_norm_squared(s.u, -1.0) +
                   sobolev_norm_squared(s.v, 1.0) + sobolev_norm_squared(s.v, -1.0));
}

// Largest delta = delta_max 2^{-j} for which the recorded Lyapunov values do
// not increase by more than rel_tol times the mean |value|. Returns nullopt if
// no delta down to delta_max 2^{-max_halvings} works.
inline std::optional<double> calibrate_delta(const std::vector<SnapshotRecord>& records, double delta_max = 0.5,
                                             int max_halvings = 40, double rel_tol = 1e-12) {
  if (records.size() < 2) throw RangeError("calibrate_delta: need at least two snapshots");
  double delta = delta_max;
  for (int j = 0; j <= max_halvings; ++j, delta *= 0.5) {
    double scale = 0.0;
    for (const auto& r : records) scale += std::abs(r.lyapunov(delta));
    scale /= double(records.size());
    bool ok = true;
    for (std::size_t i = 1; i < records.size() && ok; ++i)
      ok = records[i].lyapunov(delta) - records[i - 1].lyapunov(delta) <= rel_tol * scale;
    if (ok) return delta;
  }
  return std::nullopt;
}

// Largest increase of the Lyapunov series between snapshots, relative to the
// value at the later snapshot (0 if it never increases).
inline double lyapunov_max_violation(const std::vector<SnapshotRecord>& records, double delta) {
  double worst = 0.0;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const double inc = records[i].lyapunov(delta) - records[i - 1].lyapunov(delta);
    const double ref = std::abs(records[i].lyapunov(delta));
    if (inc > 0.0) worst = std::max(worst, ref > 0.0 ? inc / ref : std::numeric_limits<double>::infinity());
  }
  return worst;
}

// (int_t^{t+window} sup|u|^4)^{1/4} from the per-step samples, trapezoid rule
// with linear interpolation of sup^4 at window ends that fall between samples.
inline double strichartz_window_norm(const Trajectory& traj, double t, double window) {
  if (!(window > 0.0)) throw ParameterError("strichartz_window_norm: window must be positive");
  const auto& ts = traj.sample_times;
  const auto& ss = traj.sample_sup;
  if (ts.size() < 2) throw RangeError("strichartz_window_norm: fewer than two samples");
  const double eps = 1e-9 * std::max(1.0, std::abs(ts.back()));
  const double a = t, b = t + window;
  if (a < ts.front() - eps || b > ts.back() + eps) {
    throw RangeError("strichartz_window_norm: window [" + std::to_string(a) + ", " + std::to_string(b) +
                     "] outside trajectory span");
  }
  auto p4 = [&](std::size_t i) { return ss[i] * ss[i] * ss[i] * ss[i]; };
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const double lo = std::max(ts[i], a), hi = std::min(ts[i + 1], b);
    if (hi <= lo) continue;
    const double span = ts[i + 1] - ts[i];
    auto at = [&](double x) { return p4(i) + (p4(i + 1) - p4(i)) * (x - ts[i]) / span; };
    acc += 0.5 * (hi - lo) * (at(lo) + at(hi));
  }
  return std::pow(acc, 0.25);
}

struct DecayFit {
  double beta = 0.0;
  double C = 0.0;
  double residual = 0.0;  // RMS of the log-linear fit
  std::size_t points = 0;
};

// Least-squares line through (t, log value) over the trailing fraction of the
// series; beta = -slope, C = exp(intercept).
inline DecayFit fit_decay_rate(const std::vector<double>& t, const std::vector<double>& value,
                               double tail_fraction = 0.5) {
  if (t.size() != value.size()) throw FitError("fit_decay_rate: length mismatch");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw FitError("fit_decay_rate: tail fraction outside (0,1]");
  const std::size_t n = t.size();
  const std::size_t count = std::size_t(std::ceil(tail_fraction * double(n) - 1e-9));
  if (count < 2) throw FitError("fit_decay_rate: need at least two points in the tail");
  const std::size_t first = n - count;
  double st = 0, sy = 0;
  for (std::size_t i = first; i < n; ++i) {
    if (!(value[i] > 0.0) || !std::isfinite(value[i])) throw FitError("fit_decay_rate: nonpositive value on tail");
    st += t[i];
    sy += std::log(value[i]);
  }
  const double mt = st / double(count), my = sy / double(count);
  double stt = 0, sty = 0;
  for (std::size_t i = first; i < n; ++i) {
    stt += (t[i] - mt) * (t[i] - mt);
    sty += (t[i] - mt) * (std::log(value[i]) - my);
  }
  if (!(stt > 0.0)) throw FitError("fit_decay_rate: degenerate time values");
  const double slope = sty / stt;
  DecayFit fit;
  fit.beta = -slope;
  fit.C = std::exp(my - slope * mt);
  double rss = 0.0;
  for (std::size_t i = first; i < n; ++i) {
    const double r = std::log(value[i]) - (my + slope * (t[i] - mt));
    rss += r * r;
  }
  fit.residual = std::sqrt(rss / double(count));
  fit.points = count;
  return fit;
}

struct LipschitzFit {
  double C = 0.0;
  double K = 0.0;
  double residual = 0.0;             // RMS of the log-linear fit
  bool bound_holds = false;          // separation <= C e^{Kt} sep(0) at every snapshot
  std::vector<double> times;
  std::vector<double> separation;    // ||xi1 - xi2||_E (plus the windowed Strichartz term if requested)
};

inline bool lipschitz_bound_holds(const LipschitzFit& fit, double C, double K);

// Separation at every snapshot: E-norm, optionally plus the L^4(t-1,t;L^inf)
// norm of u1 - u2 (clipped at the trajectory start).
inline std::vector<double> separation_series(const Trajectory& a, const Trajectory& b, bool with_strichartz = false,
                                             double window = 1.0) {
  if (!a.has_states() || !b.has_states()) throw ConfigError("lipschitz_fit: trajectories must store states");
  require_same_grid(a.grid, b.grid, "lipschitz_fit");
  if (a.times.size() != b.times.size()) throw ConfigError("lipschitz_fit: snapshot counts differ");
  std::vector<double> sep(a.size());
  std::vector<double> sup4(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a.times[i] - b.times[i]) > 1e-9 * std::max(1.0, std::abs(a.times[i])))
      throw ConfigError("lipschitz_fit: snapshot times differ");
    const StateVector d = a.states[i] - b.states[i];
    sep[i] = energy_norm(d, a.alpha);
    if (with_strichartz) {
      const double s = sup_norm(d.u);
      sup4[i] = s * s * s * s;
    }
  }
  if (with_strichartz) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      double acc = 0.0;
      for (std::size_t j = i; j > 0 && a.times[i] - a.times[j - 1] <= window + 1e-12; --j)
        acc += 0.5 * (a.times[j] - a.times[j - 1]) * (sup4[j] + sup4[j - 1]);
      sep[i] += std::pow(acc, 0.25);
    }
  }
  return sep;
}

// K = least-squares slope of log(sep(t)/sep(0)); C = smallest constant making
// sep(t) <= C e^{Kt} sep(0) hold at every snapshot.
inline LipschitzFit lipschitz_fit(const Trajectory& a, const Trajectory& b, bool with_strichartz = false) {
  LipschitzFit fit;
  fit.separation = separation_series(a, b, with_strichartz);
  fit.times = a.times;
  const double s0 = fit.separation.front();
  if (!(s0 > 0.0)) throw FitError("lipschitz_fit: identical initial data");
  std::vector<double> rel(fit.separation.size());
  for (std::size_t i = 0; i < rel.size(); ++i) rel[i] = fit.separation[i] / s0;
  const std::size_t n = rel.size();
  if (n < 2) throw FitError("lipschitz_fit: need at least two snapshots");
  double mt = 0, my = 0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(rel[i] > 0.0)) continue;
    mt += fit.times[i];
    my += std::log(rel[i]);
    ++used;
  }
  if (used < 2) throw FitError("lipschitz_fit: separation vanished");
  mt /= double(used);
  my /= double(used);
  double stt = 0, sty = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(rel[i] > 0.0)) continue;
    stt += (fit.times[i] - mt) * (fit.times[i] - mt);
    sty += (fit.times[i] - mt) * (std::log(rel[i]) - my);
  }
  fit.K = stt > 0.0 ? sty / stt : 0.0;
  double rss = 0.0;
  fit.C = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = fit.times[i] - fit.times.front();
    fit.C = std::max(fit.C, rel[i] * std::exp(-fit.K * t));
    if (rel[i] > 0.0) {
      const double r = std::log(rel[i]) - (my + fit.K * (fit.times[i] - mt));
      rss += r * r;
    }
  }
  fit.residual = std::sqrt(rss / double(used));
  fit.bound_holds = std::isfinite(fit.C) && std::isfinite(fit.K) && lipschitz_bound_holds(fit, fit.C, fit.K);
  return fit;
}

// Whether sep(t) <= C e^{K t} sep(0) at every recorded time (relative slack 1e-12).
inline bool lipschitz_bound_holds(const LipschitzFit& fit, double C, double K) {
  if (fit.separation.empty()) return false;
  const double s0 = fit.separation.front();
  for (std::size_t i = 0; i < fit.separation.size(); ++i) {
    const double t = fit.times[i] - fit.times.front();
    if (fit.separation[i] > C * std::exp(K * t) * s0 * (1.0 + 1e-12)) return false;
  }
  return true;
}

// ||Delta u - P f(u) + g + Delta^{-1}(u_tt + u_t + alpha u)||_{H^-1} at the
// middle state, u_tt by the central difference of the stored u_t.
inline double elliptic_residual(const StateVector& prev, const StateVector& cur, const StateVector& next,
                                const SpectralField& g, const NonlinearitySpec& spec, double alpha,
                                double padding = 1.0) {
  const double span = next.time - prev.time;
  if (!(span > 0.0)) throw RangeError("elliptic_residual: snapshots must be increasing in time");
  SpectralField utt = next.v - prev.v;
  utt *= 1.0 / span;
  SpectralField inner = utt;
  inner += cur.v;
  inner.add_scaled(cur.u, alpha);
  SpectralField r = apply_laplacian(cur.u);
  r -= f_apply(cur.u, spec, padding);
  r += g;
  r += apply_inverse_laplacian(inner);
  return sobolev_norm(r, -1.0);
}

inline double elliptic_residual(const Trajectory& traj, std::size_t index, const SpectralField& g,
                                const NonlinearitySpec& spec, double padding = 1.0) {
  if (traj.states.size() < 3) throw RangeError("elliptic_residual: need three stored snapshots");
  if (index == 0 || index + 1 >= traj.states.size()) throw RangeError("elliptic_residual: index needs two neighbours");
  return elliptic_residual(traj.states[index - 1], traj.states[index], traj.states[index + 1], g, spec, traj.alpha,
                           padding);
}

struct DiagnosticsOptions {
  double delta = 0.0;          // 0: calibrate
  double delta_max = 0.5;
  double window = 1.0;         // Strichartz window length
  double tail_fraction = 0.5;  // decay fit window
};

struct DiagnosticsReport {
  std::vector<double> times;
  std::vector<double> energy_norm;
  std::vector<double> full_energy;
  std::vector<double> lyapunov;
  std::vector<double> dissipation_rate;  // ||u_t||^2_{H^-1}
  std::vector<double> strichartz_window; // NaN where [t, t+window] leaves the span
  std::vector<double> e2_norm;
  double delta = 0.0;
  bool delta_calibrated = false;
  double lyapunov_violation = 0.0;
  std::optional<DecayFit> decay;         // fit of the energy norm
  std::optional<LipschitzFit> lipschitz;
  std::string decay_error;
};

inline DiagnosticsReport build_report(const Trajectory& traj, const DiagnosticsOptions& opt = {}) {
  DiagnosticsReport rep;
  const auto& rec = traj.records;
  if (opt.delta > 0.0) {
    rep.delta = opt.delta;
  } else if (rec.size() >= 2) {
    if (auto d = calibrate_delta(rec, opt.delta_max)) {
      rep.delta = *d;
      rep.delta_calibrated = true;
    }
  }
  for (const auto& r : rec) {
    rep.times.push_back(r.time);
    rep.energy_norm.push_back(r.energy_norm());
    rep.full_energy.push_back(r.full_energy());
    rep.lyapunov.push_back(r.lyapunov(rep.delta));
    rep.dissipation_rate.push_back(r.v_hm1_sq);
    rep.e2_norm.push_back(std::sqrt(r.e2_sq));
    double w = std::numeric_limits<double>::quiet_NaN();
    if (traj.sample_times.size() >= 2 && r.time + opt.window <= traj.sample_times.back() + 1e-9)
      w = strichartz_window_norm(traj, r.time, opt.window);
    rep.strichartz_window.push_back(w);
  }
  if (rep.delta > 0.0) rep.lyapunov_violation = lyapunov_max_violation(rec, rep.delta);
  try {
    rep.decay = fit_decay_rate(rep.times, rep.energy_norm, opt.tail_fraction);
  } catch (const FitError& e) {
    rep.decay_error = e.what();
  }
  return rep;
}

}  // namespace hcho
