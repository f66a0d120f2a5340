#pragma once

// Mode-wise solution operators of the three linear model problems, with
// omega = |k|^2 (the symbol of -Delta):
//
//   Schroedinger   c' = -i omega c + h
//   plate          v'' + omega^2 v = -omega h
//   damped (CHO)   u'' + u' + (omega^2 + alpha) u = -omega h
//
// The free flows are exact. Inhomogeneous terms enter through the variation
// of constants formula, integrated with composite Simpson (fourth order in
// the node spacing) on a uniform grid no coarser than the sampler's step.
// Forcing is sampled at absolute time t0 + s.

#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <spdlog/spdlog.h>

#include "hcho/errors.hpp"
#include "hcho/mode_propagator.hpp"
#include "hcho/parallel.hpp"
#include "hcho/spectral_field.hpp"

namespace hcho {

struct ForcingSampler {
  std::function<SpectralField(double)> sample;
  double step = 0.0;  // largest Simpson node spacing allowed
  std::string rule = "composite-simpson";

  static ForcingSampler constant(SpectralField h, double step = 1.0) {
    return {[h = std::move(h)](double) { return h; }, step};
  }
};

namespace detail {

struct QuadratureNodes {
  std::vector<double> s, w;
};

inline QuadratureNodes simpson_nodes(double t, double max_step) {
  if (!(max_step > 0.0)) throw ParameterError("forcing sampler: quadrature step must be positive");
  QuadratureNodes q;
  if (t <= 0.0) return q;
  long intervals = 2 * long(std::ceil(t / (2.0 * max_step) - 1e-12));
  intervals = std::max(intervals, 2L);
  const double h = t / double(intervals);
  for (long j = 0; j <= intervals; ++j) {
    q.s.push_back(j == intervals ? t : double(j) * h);
    const double c = (j == 0 || j == intervals) ? 1.0 : (j % 2 ? 4.0 : 2.0);
    q.w.push_back(c * h / 3.0);
  }
  return q;
}

inline SpectralField checked_sample(const ForcingSampler& H, double t, const Grid& g) {
  SpectralField h = H.sample(t);
  require_same_grid(h.grid(), g, "forcing sampler");
  for (const Complex& c : h.coefficients())
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw DomainError("forcing sampler: non-finite coefficient at t = " + std::to_string(t));
  return h;
}

}  // namespace detail

inline SpectralField schrodinger_evolve(const SpectralField& U0, double t,
                                        const std::optional<ForcingSampler>& H = std::nullopt, double t0 = 0.0) {
  if (!std::isfinite(t)) throw ParameterError("schrodinger_evolve: time must be finite");
  const Grid& g = U0.grid();
  SpectralField out = U0;
  auto o = out.coefficients();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= std::polar(1.0, -g.k2(i) * t);
  if (!H) return out;
  if (t < 0.0) throw ParameterError("schrodinger_evolve: forcing requires t >= 0");
  const auto q = detail::simpson_nodes(t, H->step);
  for (std::size_t j = 0; j < q.s.size(); ++j) {
    const SpectralField h = detail::checked_sample(*H, t0 + q.s[j], g);
    const auto hc = h.coefficients();
    const double lag = t - q.s[j];
    for (std::size_t i = 0; i < o.size(); ++i) o[i] += q.w[j] * std::polar(1.0, -g.k2(i) * lag) * hc[i];
  }
  return out;
}

// v(t) = cos(omega t) v0 + sin(omega t)/omega v1 - int_0^t sin(omega (t-s)) h(s) ds
inline std::pair<SpectralField, SpectralField> plate_evolve(const SpectralField& V0, const SpectralField& V1, double t,
                                                            const std::optional<ForcingSampler>& H = std::nullopt,
                                                            double t0 = 0.0) {
  require_same_grid(V0.grid(), V1.grid(), "plate_evolve");
  if (!V0.mean_zero() || !V1.mean_zero()) throw DomainError("plate_evolve: data must be mean-zero");
  if (!std::isfinite(t)) throw ParameterError("plate_evolve: time must be finite");
  const Grid& g = V0.grid();
  SpectralField V(g), W(g);
  auto a = V.coefficients();
  auto b = W.coefficients();
  const auto a0 = V0.coefficients();
  const auto b0 = V1.coefficients();
  for (std::size_t i = 1; i < a.size(); ++i) {
    const double w = g.k2(i), cs = std::cos(w * t), sn = std::sin(w * t);
    a[i] = cs * a0[i] + (sn / w) * b0[i];
    b[i] = -w * sn * a0[i] + cs * b0[i];
  }
  if (H) {
    if (t < 0.0) throw ParameterError("plate_evolve: forcing requires t >= 0");
    const auto q = detail::simpson_nodes(t, H->step);
    for (std::size_t j = 0; j < q.s.size(); ++j) {
      const SpectralField h = detail::checked_sample(*H, t0 + q.s[j], g);
      const auto hc = h.coefficients();
      const double lag = t - q.s[j];
      for (std::size_t i = 1; i < a.size(); ++i) {
        const double w = g.k2(i);
        a[i] -= q.w[j] * std::sin(w * lag) * hc[i];
        b[i] -= q.w[j] * w * std::cos(w * lag) * hc[i];
      }
    }
  }
  return {std::move(V), std::move(W)};
}

// Plate energy 1/2 (||V'||^2_{-1} + ||V||^2_1).
inline double plate_energy(const SpectralField& V, const SpectralField& W) {
  return 0.5 * (sobolev_norm_squared(W, -1.0) + sobolev_norm_squared(V, 1.0));
}

// Exact homogeneous flow per mode plus Simpson quadrature of the Duhamel term.
// The result carries time xi0.time + t.
inline StateVector lin_cho_evolve(const StateVector& xi0, double t, double alpha,
                                  const std::optional<ForcingSampler>& H = std::nullopt) {
  if (!(alpha > 0.0)) throw ParameterError("lin_cho_evolve: alpha must be positive");
  if (!xi0.mean_zero()) throw DomainError("lin_cho_evolve: state must be mean-zero");
  if (!std::isfinite(t)) throw ParameterError("lin_cho_evolve: time must be finite");
  const Grid& g = xi0.grid();
  const ModeTable table(g, alpha);
  const auto msq = g.msq_table();
  StateVector out(g, xi0.time + t);
  {
    const auto phi = table.propagators(t);
    const auto u0 = xi0.u.coefficients();
    const auto v0 = xi0.v.coefficients();
    auto u = out.u.coefficients();
    auto v = out.v.coefficients();
    for (std::size_t i = 1; i < u.size(); ++i) std::tie(u[i], v[i]) = phi[msq[i]].apply(u0[i], v0[i]);
  }
  if (!H) return out;
  if (t < 0.0) throw ParameterError("lin_cho_evolve: forcing requires t >= 0");
  const auto q = detail::simpson_nodes(t, H->step);
  auto u = out.u.coefficients();
  auto v = out.v.coefficients();
  for (std::size_t j = 0; j < q.s.size(); ++j) {
    const SpectralField h = detail::checked_sample(*H, xi0.time + q.s[j], g);
    const auto hc = h.coefficients();
    const auto phi = table.propagators(t - q.s[j]);
    for (std::size_t i = 1; i < u.size(); ++i) {
      const Complex b = -q.w[j] * g.k2(i) * hc[i];
      const Mat2& p = phi[msq[i]];
      u[i] += p.a12 * b;
      v[i] += p.a22 * b;
    }
  }
  return out;
}

struct StrichartzStats {
  std::vector<double> quotients;       // NaN for skipped (zero) members
  std::vector<std::size_t> skipped;
  double max = 0.0;
  double mean = 0.0;
  int samples_per_unit = 0;
  long samples = 0;                    // time samples per member
  double refined_max = 0.0;            // same ensemble at twice the sampling rate
  double refinement_change = 0.0;      // |refined_max - max| / max
};

namespace detail {

// (int_0^T sup|U(t)|^4 dt)^{1/4} for the free Schroedinger flow, trapezoid rule.
inline double schrodinger_l4_linf(const SpectralField& U0, double T, long intervals) {
  const double h = T / double(intervals);
  double acc = 0.0;
  for (long j = 0; j <= intervals; ++j) {
    const double s = sup_norm(schrodinger_evolve(U0, j == intervals ? T : double(j) * h));
    const double w = (j == 0 || j == intervals) ? 0.5 : 1.0;
    acc += w * s * s * s * s;
  }
  return std::pow(acc * h, 0.25);
}

inline long sample_intervals(double T, int samples_per_unit) {
  return std::max(1L, long(std::ceil(T * samples_per_unit - 1e-9)));
}

}  // namespace detail

// Quotient ||U||_{L^4(0,T;L^inf)} / ||U0||_{H^1} per member, U the free
// Schroedinger flow. On the torus this is a measurement, not a bound.
inline StrichartzStats strichartz_quotient(const std::vector<SpectralField>& ensemble, double T, int samples_per_unit) {
  if (ensemble.empty()) throw ParameterError("strichartz_quotient: empty ensemble");
  if (!(T > 0.0)) throw ParameterError("strichartz_quotient: T must be positive");
  if (samples_per_unit < 1) throw ParameterError("strichartz_quotient: samples_per_unit must be >= 1");
  StrichartzStats st;
  st.samples_per_unit = samples_per_unit;
  const long intervals = detail::sample_intervals(T, samples_per_unit);
  st.samples = intervals + 1;
  const std::size_t count = ensemble.size();
  st.quotients.assign(count, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> refined(count, std::numeric_limits<double>::quiet_NaN());
  parallel_for(count, [&](std::size_t i) {
    const double h1 = sobolev_norm(ensemble[i], 1.0);
    if (!(h1 > 0.0)) return;
    st.quotients[i] = detail::schrodinger_l4_linf(ensemble[i], T, intervals) / h1;
    refined[i] = detail::schrodinger_l4_linf(ensemble[i], T, 2 * intervals) / h1;
  });
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (std::isnan(st.quotients[i])) {
      st.skipped.push_back(i);
      spdlog::warn("strichartz_quotient: member {} has zero H^1 norm, skipped", i);
      continue;
    }
    st.max = std::max(st.max, st.quotients[i]);
    st.refined_max = std::max(st.refined_max, refined[i]);
    sum += st.quotients[i];
    ++used;
  }
  st.mean = used ? sum / double(used) : 0.0;
  st.refinement_change = st.max > 0.0 ? std::abs(st.refined_max - st.max) / st.max : 0.0;
  return st;
}

struct BandTrendRow {
  double N = 0.0;
  double max_quotient = 0.0;
  double mean_quotient = 0.0;
  std::size_t members = 0;  // members with nonzero projection
};

// Quotient statistics of the projected ensemble P_N U0 for each N.
inline std::vector<BandTrendRow> strichartz_band_trend(const std::vector<SpectralField>& ensemble, double T,
                                                       int samples_per_unit, const std::vector<double>& bands) {
  std::vector<BandTrendRow> rows;
  for (double N : bands) {
    std::vector<SpectralField> projected;
    for (const auto& m : ensemble) {
      auto p = project_PN(m, N);
      if (sobolev_norm(p, 1.0) > 0.0) projected.push_back(std::move(p));
    }
    BandTrendRow row{N, 0.0, 0.0, projected.size()};
    if (!projected.empty()) {
      const auto st = strichartz_quotient(projected, T, samples_per_unit);
      row.max_quotient = st.max;
      row.mean_quotient = st.mean;
    }
    rows.push_back(row);
  }
  return rows;
}

struct CauchyRow {
  double N_low = 0.0, N_high = 0.0;
  double deviation = 0.0;  // ||U_low - U_high||_{L^4(0,T;L^inf)}
};

struct CauchyTable {
  std::vector<CauchyRow> rows;
  double deviation_from_unprojected = 0.0;  // largest band vs. no projection
};

// Evolves P_N U0 with forcing P_N H for each band and compares consecutive
// bands in L^4(0,T;L^inf), trapezoid in time at samples_per_unit.
inline CauchyTable pn_cauchy_check(const SpectralField& U0, const std::optional<ForcingSampler>& H, double T,
                                   const std::vector<double>& bands, int samples_per_unit = 16) {
  if (bands.empty()) throw ParameterError("pn_cauchy_check: no bands");
  for (std::size_t i = 1; i < bands.size(); ++i)
    if (!(bands[i] > bands[i - 1])) throw ParameterError("pn_cauchy_check: bands must be strictly increasing");
  if (!(T > 0.0)) throw ParameterError("pn_cauchy_check: T must be positive");
  const long intervals = detail::sample_intervals(T, samples_per_unit);
  const double h = T / double(intervals);

  // runs[b][j] = solution at t_j; b == bands.size() is the unprojected run.
  const std::size_t nb = bands.size() + 1;
  std::vector<std::vector<SpectralField>> runs(nb);
  parallel_for(nb, [&](std::size_t b) {
    const bool full = b == bands.size();
    std::optional<ForcingSampler> PH;
    if (H) {
      if (full) {
        PH = H;
      } else {
        const double N = bands[b];
        PH = ForcingSampler{[H, N](double t) { return project_PN(H->sample(t), N); }, H->step, H->rule};
      }
    }
    SpectralField U = full ? U0 : project_PN(U0, bands[b]);
    runs[b].reserve(intervals + 1);
    runs[b].push_back(U);
    for (long j = 0; j < intervals; ++j) {
      U = schrodinger_evolve(U, h, PH, double(j) * h);
      runs[b].push_back(U);
    }
  });
  auto l4 = [&](std::size_t a, std::size_t b) {
    double acc = 0.0;
    for (long j = 0; j <= intervals; ++j) {
      const double s = sup_norm(runs[a][j] - runs[b][j]);
      acc += ((j == 0 || j == intervals) ? 0.5 : 1.0) * s * s * s * s;
    }
    return std::pow(acc * h, 0.25);
  };
  CauchyTable table;
  for (std::size_t b = 1; b < bands.size(); ++b) table.rows.push_back({bands[b - 1], bands[b], l4(b - 1, b)});
  table.deviation_from_unprojected = l4(bands.size() - 1, bands.size());
  return table;
}

}  // namespace hcho
