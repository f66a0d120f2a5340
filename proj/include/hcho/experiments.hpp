#pragma once

// Ensemble experiments: absorbing ball, attractor sampling and grid
// refinement of second-energy norms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "hcho/diagnostics.hpp"
#include "hcho/errors.hpp"
#include "hcho/integrator.hpp"
#include "hcho/parallel.hpp"
#include "hcho/random_fields.hpp"

namespace hcho {

struct RunSetup {
  SolverConfig config;
  NonlinearitySpec spec;
};

struct EnsembleSpec {
  std::size_t count = 10;
  std::uint64_t seed = 1;
  double norm_min = 1.0, norm_max = 10.0;  // member i gets an evenly spaced target norm
  RandomFieldSpec field;
};

struct EnsembleMember {
  std::uint64_t seed = 0;
  double target_norm = 0.0;
  StateVector state;
};

inline std::vector<EnsembleMember> generate_ensemble(const EnsembleSpec& e, const Grid& g, double alpha) {
  if (e.count == 0) throw ParameterError("ensemble: count must be positive");
  if (!(e.norm_min > 0.0) || e.norm_max < e.norm_min) throw ParameterError("ensemble: bad norm range");
  std::vector<EnsembleMember> out;
  for (std::size_t i = 0; i < e.count; ++i) {
    const double frac = e.count == 1 ? 0.0 : double(i) / double(e.count - 1);
    const double norm = e.norm_min + (e.norm_max - e.norm_min) * frac;
    const std::uint64_t seed = e.seed + i;
    out.push_back({seed, norm, random_state(g, seed, alpha, norm, e.field)});
  }
  return out;
}

struct AbsorbingBallOptions {
  double tail_fraction = 0.25;  // plateau = mean E-norm of the reference run over this tail
  double radius_factor = 2.0;
  double fixed_radius = 0.0;    // > 0 overrides the reference-run estimate
  int max_doublings = 3;        // T is doubled while some member has not entered
};

struct BallMember {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  double initial_norm = 0.0;
  double final_norm = 0.0;
  double plateau = 0.0;  // tail mean of the member's own E-norm
  double entry_time = std::numeric_limits<double>::quiet_NaN();  // first snapshot inside
  bool remained = false;                                         // never left after entry
};

struct AbsorbingBallReport {
  double radius = 0.0;
  double plateau = 0.0;
  std::size_t reference = 0;  // member with the smallest initial norm
  double T = 0.0;             // final horizon after doublings
  int doublings = 0;
  double max_entry_time = 0.0;
  bool all_absorbed = false;
  std::vector<BallMember> members;
};

namespace detail {

inline double tail_mean(const std::vector<double>& t, const std::vector<double>& x, double fraction) {
  const double cut = t.back() - fraction * (t.back() - t.front());
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= cut - 1e-12) {
      sum += x[i];
      ++n;
    }
  return n ? sum / double(n) : x.back();
}

}  // namespace detail

// Runs every member to T, estimates the ball radius from the reference run
// and records entry times. Members run concurrently.
inline AbsorbingBallReport absorbing_ball_experiment(const std::vector<EnsembleMember>& members, const RunSetup& setup,
                                                     double T, const AbsorbingBallOptions& opt = {}) {
  if (members.empty()) throw ParameterError("absorbing_ball_experiment: empty ensemble");
  SolverConfig cfg = setup.config;
  cfg.store_states = false;
  const Integrator integ(cfg, setup.spec);

  const std::size_t m = members.size();
  std::vector<std::vector<double>> times(m), norms(m);
  std::vector<StateVector> current;
  for (const auto& e : members) current.push_back(e.state);

  auto run_all = [&](double horizon) {
    parallel_for(m, [&](std::size_t i) {
      try {
        Trajectory tr = integ.evolve(current[i], horizon);
        const std::size_t skip = times[i].empty() ? 0 : 1;  // continuation repeats its first snapshot
        for (std::size_t k = skip; k < tr.records.size(); ++k) {
          times[i].push_back(tr.records[k].time);
          norms[i].push_back(tr.records[k].energy_norm());
        }
        current[i] = tr.final_state;
      } catch (const BlowUpError& e) {
        throw BlowUpError("absorbing ball: member " + std::to_string(i) + " (seed " +
                              std::to_string(members[i].seed) + "): " + e.what(),
                          e.time());
      }
    });
  };

  AbsorbingBallReport rep;
  rep.reference = 0;
  for (std::size_t i = 1; i < m; ++i)
    if (members[i].target_norm < members[rep.reference].target_norm) rep.reference = i;

  double horizon = T;
  rep.T = T;
  run_all(T);
  for (;;) {
    rep.plateau = detail::tail_mean(times[rep.reference], norms[rep.reference], opt.tail_fraction);
    rep.radius = opt.fixed_radius > 0.0 ? opt.fixed_radius : opt.radius_factor * rep.plateau;
    rep.members.clear();
    rep.all_absorbed = true;
    rep.max_entry_time = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      BallMember b;
      b.index = i;
      b.seed = members[i].seed;
      b.initial_norm = norms[i].front();
      b.final_norm = norms[i].back();
      b.plateau = detail::tail_mean(times[i], norms[i], opt.tail_fraction);
      // entry = first snapshot from which the member stays inside
      std::optional<std::size_t> first_in;
      for (std::size_t k = 0; k < norms[i].size(); ++k)
        if (norms[i][k] <= rep.radius) {
          first_in = k;
          break;
        }
      if (first_in) {
        b.entry_time = times[i][*first_in];
        b.remained = std::all_of(norms[i].begin() + long(*first_in), norms[i].end(),
                                 [&](double x) { return x <= rep.radius; });
        rep.max_entry_time = std::max(rep.max_entry_time, b.entry_time);
      }
      if (!first_in || !b.remained) rep.all_absorbed = false;
      rep.members.push_back(b);
    }
    const bool someone_outside = std::any_of(rep.members.begin(), rep.members.end(),
                                             [](const BallMember& b) { return std::isnan(b.entry_time); });
    if (!someone_outside || rep.doublings >= opt.max_doublings) break;
    ++rep.doublings;
    spdlog::info("absorbing ball: members still outside radius {:.6g} at T = {:.6g}; doubling T", rep.radius, rep.T);
    run_all(horizon);  // continue by the same horizon, doubling the total
    rep.T += horizon;
    horizon = rep.T;
  }
  return rep;
}

struct AttractorOptions {
  std::optional<double> beta;  // decay rate from a calibration run; fitted when absent
  bool check_burn_in = true;   // require burn_in >= 5 / beta
};

struct AttractorSample {
  double burn_in = 0.0;
  double spacing = 0.0;
  double beta = 0.0;
  std::vector<double> times;
  std::vector<StateVector> states;
  std::vector<double> energy_norms;
  std::vector<double> e2_norms;
  std::vector<double> pairwise;  // E-distances, upper triangle row by row
  double max_energy = 0.0;
  double max_e2 = 0.0;
  // the same harvest after twice the burn-in
  std::vector<double> times_doubled;
  std::vector<double> e2_norms_doubled;
  double max_e2_doubled = 0.0;
  double e2_change = 0.0;  // |max_e2_doubled - max_e2| / max_e2
};

// One run to 2 burn_in + (samples - 1) spacing, harvesting samples after
// burn_in and again after 2 burn_in. Without a given beta, the decay rate
// of the snapshot-to-snapshot increments during burn-in is fitted.
inline AttractorSample attractor_sample(const RunSetup& setup, const StateVector& initial, double burn_in, int samples,
                                        double spacing, const AttractorOptions& opt = {}) {
  if (samples < 1) throw ParameterError("attractor_sample: samples must be >= 1");
  if (!(burn_in > 0.0) || !(spacing > 0.0)) throw ParameterError("attractor_sample: burn_in and spacing must be positive");
  const long b = std::lround(burn_in / spacing);
  if (b < 1 || std::abs(double(b) * spacing - burn_in) > 1e-9 * burn_in)
    throw ParameterError("attractor_sample: burn_in must be a multiple of spacing");
  if (opt.beta && opt.check_burn_in && burn_in * *opt.beta < 5.0)
    throw ParameterError("attractor_sample: burn_in below 5/beta");

  SolverConfig cfg = setup.config;
  cfg.store_states = false;
  cfg.snapshot = spacing;
  const Integrator integ(cfg, setup.spec);
  AttractorSample out;
  out.burn_in = burn_in;
  out.spacing = spacing;

  std::vector<double> inc_t, inc;
  std::optional<StateVector> prev;
  long k = 0;
  Observer harvest = [&](const StateVector& s, const SnapshotRecord& r) {
    if (k <= b) {
      if (prev) {
        inc_t.push_back(s.time);
        inc.push_back(energy_norm(s - *prev, cfg.alpha));
      }
      prev = s;
    }
    if (k >= b && k < b + samples) {
      out.times.push_back(s.time);
      out.states.push_back(s);
      out.energy_norms.push_back(r.energy_norm());
      out.e2_norms.push_back(std::sqrt(r.e2_sq));
    }
    if (k >= 2 * b && k < 2 * b + samples) {
      out.times_doubled.push_back(s.time);
      out.e2_norms_doubled.push_back(std::sqrt(r.e2_sq));
    }
    ++k;
  };
  const double total = 2.0 * burn_in + double(samples - 1) * spacing;
  integ.evolve(initial, total, {harvest});

  if (opt.beta) {
    out.beta = *opt.beta;
  } else {
    // keep the increments above the round-off floor before fitting
    const double peak = inc.empty() ? 0.0 : *std::max_element(inc.begin(), inc.end());
    std::size_t usable = 0;
    while (usable < inc.size() && inc[usable] > 1e-11 * peak) ++usable;
    if (usable >= 4) {
      std::vector<double> t(inc_t.begin(), inc_t.begin() + long(usable)), x(inc.begin(), inc.begin() + long(usable));
      out.beta = fit_decay_rate(t, x, 0.5).beta;
    } else if (peak == 0.0 || usable < inc.size()) {
      out.beta = std::numeric_limits<double>::infinity();  // settled to round-off within burn-in
    }
    if (opt.check_burn_in && !(burn_in * out.beta >= 5.0)) {
      throw ParameterError("attractor_sample: burn_in " + std::to_string(burn_in) + " is below 5/beta (fitted beta " +
                           std::to_string(out.beta) + ")");
    }
  }
  for (std::size_t i = 0; i < out.states.size(); ++i)
    for (std::size_t j = i + 1; j < out.states.size(); ++j)
      out.pairwise.push_back(energy_norm(out.states[i] - out.states[j], cfg.alpha));
  for (double x : out.energy_norms) out.max_energy = std::max(out.max_energy, x);
  for (double x : out.e2_norms) out.max_e2 = std::max(out.max_e2, x);
  for (double x : out.e2_norms_doubled) out.max_e2_doubled = std::max(out.max_e2_doubled, x);
  out.e2_change = out.max_e2 > 0.0 ? std::abs(out.max_e2_doubled - out.max_e2) / out.max_e2
                                   : (out.max_e2_doubled > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  return out;
}

struct RegularityRow {
  int n = 0;
  std::vector<double> times;
  std::vector<double> e2_norms;
  double max_e2 = 0.0;
  double growth = 0.0;          // max_e2 / previous row's max_e2 (0 for the first row)
  bool non_convergent = false;  // growth beyond a factor 2
};

// Same physical setup at each resolution: g and the initial data are the
// trigonometric interpolants of the coarse fields.
inline std::vector<RegularityRow> regularity_refinement_study(const RunSetup& coarse, const StateVector& initial,
                                                              const std::vector<int>& resolutions, double burn_in,
                                                              int samples, double spacing,
                                                              const AttractorOptions& opt = {}) {
  if (resolutions.empty()) throw ParameterError("regularity_refinement_study: no resolutions");
  for (std::size_t i = 1; i < resolutions.size(); ++i)
    if (resolutions[i] <= resolutions[i - 1]) throw ParameterError("regularity_refinement_study: resolutions must increase");
  std::vector<RegularityRow> rows(resolutions.size());
  parallel_for(resolutions.size(), [&](std::size_t i) {
    const int n = resolutions[i];
    if (n < coarse.config.g.grid().n()) throw ParameterError("regularity_refinement_study: resolution below the data grid");
    RunSetup s = coarse;
    s.config.g = zero_pad(coarse.config.g, n);
    StateVector init(zero_pad(initial.u, n), zero_pad(initial.v, n), initial.time);
    const AttractorSample a = attractor_sample(s, init, burn_in, samples, spacing, opt);
    rows[i].n = n;
    rows[i].times = a.times;
    rows[i].e2_norms = a.e2_norms;
    rows[i].max_e2 = a.max_e2;
  });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double prev = rows[i - 1].max_e2, cur = rows[i].max_e2;
    rows[i].growth = prev > 0.0 ? cur / prev : (cur > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    rows[i].non_convergent = rows[i].growth > 2.0 || rows[i].growth < 0.5;
  }
  return rows;
}

}  // namespace hcho
