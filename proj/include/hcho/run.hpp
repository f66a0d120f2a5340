#pragma once

// The CLI commands as library calls: run, strichartz, attractor, sweep.
// Each writes its tables and a summary.json into the output directory and
// returns the process exit code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "hcho/checkpoint.hpp"
#include "hcho/config.hpp"
#include "hcho/diagnostics.hpp"
#include "hcho/experiments.hpp"
#include "hcho/integrator.hpp"
#include "hcho/linear_propagators.hpp"
#include "hcho/mode_propagator.hpp"
#include "hcho/parallel.hpp"
#include "hcho/table.hpp"

namespace hcho {

using Json = nlohmann::ordered_json;

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitInvalidConfig = 2,
  kExitBlowUp = 3,
  kExitDataError = 4,
};

struct RunOptions {
  std::filesystem::path out_dir;                 // empty: output.dir from the config
  std::optional<std::filesystem::path> resume;   // checkpoint to continue from
};

namespace detail {

inline void write_json(const std::filesystem::path& path, const Json& j) {
  CsvTable::write_text(path, j.dump(2) + "\n");
}


inline Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

// Slowest linear decay rate among the modes present in the state.
inline double linear_rate_oracle(const StateVector& s, double alpha) {
  const Grid& g = s.grid();
  double rate = std::numeric_limits<double>::infinity();
  const auto u = s.u.coefficients();
  const auto v = s.v.coefficients();
  for (std::size_t i = 1; i < u.size(); ++i) {
    if (u[i] == Complex{} && v[i] == Complex{}) continue;
    rate = std::min(rate, ModeLinearSystem(g.k2(i), alpha).decay_rate());
  }
  return rate;
}

inline std::filesystem::path out_dir(const RunConfig& cfg, const RunOptions& opt) {
  return opt.out_dir.empty() ? std::filesystem::path(cfg.output_dir) : opt.out_dir;
}

inline void write_run_tables(const std::filesystem::path& dir, const RunConfig& cfg, const Trajectory& traj,
                             const DiagnosticsReport& rep) {
  const std::string hash = hex64(config_hash(cfg));
  const std::string seed = std::to_string(cfg.initial_seed);
  CsvTable tr({"time", "energy_norm", "sup_norm", "e2_norm", "full_energy", "config_hash", "seed"}, cfg.hexfloat);
  for (const auto& r : traj.records) {
    tr.row().num(r.time).num(r.energy_norm()).num(r.sup).num(std::sqrt(r.e2_sq)).num(r.full_energy()).text(hash).text(
        seed);
  }
  tr.write(dir / "trajectory.csv");
  CsvTable dg({"time", "energy_norm", "full_energy", "lyapunov", "delta", "dissipation_rate", "dissipation_integral",
               "strichartz_window", "e2_norm", "config_hash", "seed"},
              cfg.hexfloat);
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    dg.row()
        .num(rep.times[i])
        .num(rep.energy_norm[i])
        .num(rep.full_energy[i])
        .num(rep.lyapunov[i])
        .num(rep.delta)
        .num(rep.dissipation_rate[i])
        .num(traj.records[i].dissipation)
        .num(rep.strichartz_window[i])
        .num(rep.e2_norm[i])
        .text(hash)
        .text(seed);
  }
  dg.write(dir / "diagnostics.csv");
}

inline Json config_block(const RunConfig& cfg) {
  Json j;
  j["config_hash"] = hex64(config_hash(cfg));
  j["physics_hash"] = hex64(physics_hash(cfg));
  j["seed"] = cfg.initial_seed;
  return j;
}

}  // namespace detail

// Evolves the configured problem, writes trajectory.csv, diagnostics.csv,
// summary.json and final.chk. Blow-up writes error.json plus the partial
// tables and returns kExitBlowUp.
inline int run_command(const RunConfig& cfg, const RunOptions& opt = {}) {
  const auto dir = detail::out_dir(cfg, opt);
  std::filesystem::create_directories(dir);
  const Grid grid = make_grid(cfg);
  const NonlinearitySpec spec = make_spec(cfg);
  SolverConfig solver = make_solver(cfg, grid);
  solver.store_states = false;
  const std::uint64_t phash = physics_hash(cfg);

  StateVector initial = make_initial(cfg, grid);
  double horizon = cfg.T;
  bool resumed = false;
  if (opt.resume) {
    Checkpoint ck = checkpoint_read(*opt.resume, phash);
    if (!(ck.state.grid() == grid)) throw ConfigError("resume: checkpoint grid differs from configuration");
    initial = std::move(ck.state);
    horizon = cfg.T - initial.time;
    if (!(horizon > 0.0)) throw ConfigError("resume: checkpoint time is already at or beyond time.T");
    resumed = true;
  }

  Json summary = detail::config_block(cfg);
  summary["command"] = "run";
  summary["resumed"] = resumed;
  summary["start_time"] = initial.time;
  summary["T"] = cfg.T;
  summary["dt"] = cfg.dt;
  summary["scheme"] = cfg.scheme;
  const DiagnosticsOptions dopt{cfg.delta, 0.5, cfg.window, cfg.tail_fraction};
  const double oracle = detail::linear_rate_oracle(initial, cfg.alpha);

  std::optional<Trajectory> traj;
  try {
    traj = Integrator(solver, spec).evolve(initial, horizon);
  } catch (const BlowUpError& e) {
    Json err = detail::config_block(cfg);
    err["status"] = "blow-up";
    err["message"] = e.what();
    err["time"] = detail::number_or_null(e.time().value_or(std::numeric_limits<double>::quiet_NaN()));
    err["partial_outputs"] = bool(e.partial());
    if (e.partial() && !e.partial()->records.empty()) {
      const Trajectory& p = *e.partial();
      detail::write_run_tables(dir, cfg, p, build_report(p, dopt));
      err["partial_snapshots"] = p.records.size();
    }
    detail::write_json(dir / "error.json", err);
    spdlog::error("run: {}", e.what());
    return kExitBlowUp;
  }

  const DiagnosticsReport rep = build_report(*traj, dopt);
  detail::write_run_tables(dir, cfg, *traj, rep);
  checkpoint_write(dir / "final.chk", traj->final_state, phash);

  double max_window = 0.0;
  for (double w : rep.strichartz_window)
    if (std::isfinite(w)) max_window = std::max(max_window, w);
  summary["status"] = "ok";
  summary["final_time"] = traj->final_state.time;
  summary["snapshots"] = traj->records.size();
  summary["final_energy_norm"] = rep.energy_norm.back();
  summary["delta"] = rep.delta;
  summary["delta_calibrated"] = rep.delta_calibrated;
  summary["lyapunov_violation"] = rep.lyapunov_violation;
  if (rep.decay) {
    summary["beta"] = detail::number_or_null(rep.decay->beta);
    summary["beta_C"] = detail::number_or_null(rep.decay->C);
    summary["beta_residual"] = detail::number_or_null(rep.decay->residual);
  } else {
    summary["beta"] = nullptr;
    summary["beta_error"] = rep.decay_error;
  }
  summary["beta_linear_oracle"] = detail::number_or_null(oracle);
  summary["max_strichartz_window"] = max_window;
  summary["outputs"] = {"trajectory.csv", "diagnostics.csv", "final.chk"};
  detail::write_json(dir / "summary.json", summary);
  return kExitOk;
}

inline std::vector<SpectralField> strichartz_ensemble(const RunConfig& cfg, const Grid& g) {
  std::vector<SpectralField> out;
  for (int i = 0; i < cfg.str_members; ++i)
    out.push_back(random_field(g, cfg.str_seed + std::uint64_t(i), {cfg.str_envelope, cfg.initial_band}));
  return out;
}

inline int strichartz_command(const RunConfig& cfg, const RunOptions& opt = {}) {
  const auto dir = detail::out_dir(cfg, opt);
  const Grid grid = make_grid(cfg);
  const auto ensemble = strichartz_ensemble(cfg, grid);
  const auto st = strichartz_quotient(ensemble, cfg.str_T, cfg.str_samples_per_unit);
  const auto trend = strichartz_band_trend(ensemble, cfg.str_T, cfg.str_samples_per_unit, cfg.str_bands);
  const std::string hash = hex64(config_hash(cfg));

  CsvTable members({"member", "seed", "h1_norm", "quotient", "config_hash"}, cfg.hexfloat);
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    members.row()
        .integer(static_cast<long long>(i))
        .text(std::to_string(cfg.str_seed + i))
        .num(sobolev_norm(ensemble[i], 1.0))
        .num(st.quotients[i])
        .text(hash);
  }
  members.write(dir / "strichartz.csv");
  CsvTable bands({"N", "max_quotient", "mean_quotient", "members", "config_hash", "seed"}, cfg.hexfloat);
  for (const auto& r : trend)
    bands.row().num(r.N).num(r.max_quotient).num(r.mean_quotient).integer(static_cast<long long>(r.members)).text(hash).text(
        std::to_string(cfg.str_seed));
  bands.write(dir / "strichartz_bands.csv");

  Json s;
  s["command"] = "strichartz";
  s["config_hash"] = hash;
  s["seed"] = cfg.str_seed;
  s["members"] = ensemble.size();
  s["skipped"] = st.skipped.size();
  s["T"] = cfg.str_T;
  s["samples_per_unit"] = cfg.str_samples_per_unit;
  s["max_quotient"] = st.max;
  s["mean_quotient"] = st.mean;
  s["refined_max_quotient"] = st.refined_max;
  s["refinement_change"] = st.refinement_change;
  s["note"] = "periodic box: quotients are measurements; no bound is asserted";
  detail::write_json(dir / "summary.json", s);
  return kExitOk;
}

inline int attractor_command(const RunConfig& cfg, const RunOptions& opt = {}) {
  const auto dir = detail::out_dir(cfg, opt);
  const Grid grid = make_grid(cfg);
  RunSetup setup{make_solver(cfg, grid), make_spec(cfg)};
  const StateVector initial = make_initial(cfg, grid);
  const std::string hash = hex64(config_hash(cfg));
  const std::string seed = std::to_string(cfg.initial_seed);
  Json s = detail::config_block(cfg);
  s["command"] = "attractor";
  try {
    const AttractorSample a = attractor_sample(setup, initial, cfg.burn_in, cfg.attr_samples, cfg.attr_spacing);
    CsvTable t({"window", "time", "e2_norm", "config_hash", "seed"}, cfg.hexfloat);
    for (std::size_t i = 0; i < a.times.size(); ++i) t.row().integer(1).num(a.times[i]).num(a.e2_norms[i]).text(hash).text(seed);
    for (std::size_t i = 0; i < a.times_doubled.size(); ++i)
      t.row().integer(2).num(a.times_doubled[i]).num(a.e2_norms_doubled[i]).text(hash).text(seed);
    t.write(dir / "attractor.csv");
    s["burn_in"] = cfg.burn_in;
    s["beta"] = detail::number_or_null(a.beta);
    s["max_energy_norm"] = a.max_energy;
    s["max_e2_norm"] = a.max_e2;
    s["max_e2_norm_doubled_burn_in"] = a.max_e2_doubled;
    s["e2_change"] = detail::number_or_null(a.e2_change);
    double diam = 0.0;
    for (double d : a.pairwise) diam = std::max(diam, d);
    s["sample_diameter"] = diam;
    if (!cfg.attr_resolutions.empty()) {
      const auto rows = regularity_refinement_study(setup, initial, cfg.attr_resolutions, cfg.burn_in,
                                                    cfg.attr_samples, cfg.attr_spacing);
      CsvTable r({"n", "max_e2_norm", "growth", "non_convergent", "config_hash", "seed"}, cfg.hexfloat);
      bool ok = true;
      for (const auto& row : rows) {
        r.row().integer(row.n).num(row.max_e2).num(row.growth).integer(row.non_convergent).text(hash).text(seed);
        ok = ok && !row.non_convergent;
      }
      r.write(dir / "regularity.csv");
      s["refinement_converged"] = ok;
    }
  } catch (const BlowUpError& e) {
    s["status"] = "blow-up";
    s["message"] = e.what();
    detail::write_json(dir / "error.json", s);
    return kExitBlowUp;
  }
  s["status"] = "ok";
  detail::write_json(dir / "summary.json", s);
  return kExitOk;
}

struct SweepRow {
  double alpha = 0.0, kappa = 0.0, g_amplitude = 0.0, L = 0.0;
  std::string status = "ok";
  std::string error;
  double beta = std::numeric_limits<double>::quiet_NaN();
  double radius = std::numeric_limits<double>::quiet_NaN();
  double max_strichartz = std::numeric_limits<double>::quiet_NaN();
  double final_norm = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
};

// One sweep cell: beta from the decay of ||xi(t) - xi(T)||_E over [0.25T, 0.6T],
// radius = 2 x mean E-norm over the last quarter, largest windowed Strichartz norm.
inline SweepRow sweep_point(const RunConfig& cfg) {
  SweepRow row;
  row.alpha = cfg.alpha;
  row.kappa = cfg.kappa;
  row.g_amplitude = cfg.forcing_amplitude;
  row.L = cfg.length;
  row.config_hash = config_hash(cfg);
  row.seed = cfg.initial_seed;
  try {
    validate(cfg);
    const Grid grid = make_grid(cfg);
    SolverConfig solver = make_solver(cfg, grid);
    solver.store_states = true;
    const Trajectory traj = Integrator(solver, make_spec(cfg)).evolve(make_initial(cfg, grid), cfg.T);
    std::vector<double> t, d, norms;
    for (std::size_t i = 0; i < traj.size(); ++i) {
      norms.push_back(traj.records[i].energy_norm());
      const double ti = traj.times[i] - traj.start();
      if (ti >= 0.25 * cfg.T - 1e-9 && ti <= 0.6 * cfg.T + 1e-9) {
        t.push_back(traj.times[i]);
        d.push_back(energy_norm(traj.states[i] - traj.final_state, cfg.alpha));
      }
    }
    row.final_norm = norms.back();
    row.radius = 2.0 * detail::tail_mean(traj.times, norms, 0.25);
    try {
      row.beta = fit_decay_rate(t, d, 1.0).beta;
    } catch (const FitError& e) {
      row.error = e.what();
    }
    double mx = 0.0;
    for (double ti : traj.times)
      if (ti + cfg.window <= traj.end() + 1e-9) mx = std::max(mx, strichartz_window_norm(traj, ti, cfg.window));
    row.max_strichartz = mx;
  } catch (const BlowUpError& e) {
    row.status = "blow-up";
    row.error = e.what();
  } catch (const std::exception& e) {
    row.status = "failed";
    row.error = e.what();
  }
  return row;
}

// Cartesian product of the sweep axes (an empty axis keeps the base value).
inline std::vector<RunConfig> sweep_cells(const RunConfig& base) {
  auto axis = [](const std::vector<double>& v, double dflt) { return v.empty() ? std::vector<double>{dflt} : v; };
  const auto A = axis(base.sweep_alpha, base.alpha);
  const auto Kp = axis(base.sweep_kappa, base.kappa);
  const auto G = axis(base.sweep_g_amplitude, base.forcing_amplitude);
  const auto Ls = axis(base.sweep_L, base.length);
  const std::size_t total = A.size() * Kp.size() * G.size() * Ls.size();
  if (total > std::size_t(base.sweep_budget)) {
    throw ConfigError("sweep: " + std::to_string(total) + " cells exceed sweep.budget = " +
                      std::to_string(base.sweep_budget));
  }
  std::vector<RunConfig> cells;
  for (double a : A)
    for (double k : Kp)
      for (double g : G)
        for (double l : Ls) {
          RunConfig c = base;
          c.alpha = a;
          c.kappa = k;
          c.forcing_amplitude = g;
          c.length = l;
          c.sweep_alpha.clear();
          c.sweep_kappa.clear();
          c.sweep_g_amplitude.clear();
          c.sweep_L.clear();
          cells.push_back(std::move(c));
        }
  return cells;
}

inline std::vector<SweepRow> parameter_sweep(const RunConfig& base) {
  const auto cells = sweep_cells(base);
  std::vector<SweepRow> rows(cells.size());
  parallel_for(cells.size(), [&](std::size_t i) { rows[i] = sweep_point(cells[i]); });
  return rows;
}

inline int sweep_command(const RunConfig& cfg, const RunOptions& opt = {}) {
  const auto dir = detail::out_dir(cfg, opt);
  const auto rows = parameter_sweep(cfg);
  CsvTable t({"alpha", "kappa", "g_amplitude", "L", "status", "beta", "ball_radius", "max_strichartz_window",
              "final_energy_norm", "config_hash", "seed", "error"},
             cfg.hexfloat);
  std::size_t failed = 0;
  for (const auto& r : rows) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    t.row()
        .num(r.alpha)
        .num(r.kappa)
        .num(r.g_amplitude)
        .num(r.L)
        .text(r.status)
        .num(r.beta)
        .num(r.radius)
        .num(r.max_strichartz)
        .num(r.final_norm)
        .text(hex64(r.config_hash))
        .text(std::to_string(r.seed))
        .text(err);
    if (r.status != "ok") ++failed;
  }
  t.write(dir / "sweep.csv");
  Json s;
  s["command"] = "sweep";
  s["config_hash"] = hex64(config_hash(cfg));
  s["seed"] = cfg.initial_seed;
  s["cells"] = rows.size();
  s["failed"] = failed;
  detail::write_json(dir / "summary.json", s);
  return kExitOk;
}

}  // namespace hcho
