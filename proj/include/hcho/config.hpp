#pragma once

// Run configuration: flat "key = value" text with dotted section names,
// '#' comments, "[section]" headers allowed. Unknown or repeated keys are
// errors. Lists are comma separated; mode lists are "m1,m2,m3:amp;..." with
// amp the physical cosine amplitude.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <boost/program_options.hpp>
#include <spdlog/spdlog.h>

#include "hcho/errors.hpp"
#include "hcho/integrator.hpp"
#include "hcho/nonlinearity.hpp"
#include "hcho/random_fields.hpp"
#include "hcho/table.hpp"

namespace hcho {

struct ModeAmplitude {
  int m1 = 0, m2 = 0, m3 = 0;
  double amplitude = 0.0;
  friend bool operator==(const ModeAmplitude&, const ModeAmplitude&) = default;
};

struct RunConfig {
  // grid
  double length = 2.0 * std::numbers::pi * 8.0;
  int n = 16;
  // model
  double alpha = 1.0;
  // nonlinearity
  std::string nl_kind = "cubic";
  double c1 = 0.0, c3 = 1.0, c5 = 0.0, c_sub = 0.0, kappa = 2.0;
  double nl_L = 0.0, nl_K = 0.0, nl_C = 0.0;  // 0: derived from the coefficients
  // forcing g
  std::string forcing_kind = "none";
  std::vector<ModeAmplitude> forcing_modes;
  double forcing_amplitude = 1.0;
  std::uint64_t forcing_seed = 1;
  double forcing_envelope = 3.0;
  double forcing_band = 0.0;
  // initial data
  std::string initial_kind = "random";
  std::vector<ModeAmplitude> initial_u_modes, initial_v_modes;
  std::uint64_t initial_seed = 1;
  double initial_norm = 1.0;
  double initial_envelope = 3.0;
  double initial_band = 0.0;
  // time
  double dt = 0.01;
  std::string scheme = "etd2";
  double T = 1.0;
  double snapshot = 0.1;
  double padding = 1.0;
  // diagnostics
  double delta = 0.0;  // 0: calibrate
  double window = 1.0;
  double tail_fraction = 0.5;
  // output
  std::string output_dir = "out";
  bool hexfloat = false;
  // strichartz ensemble
  int str_members = 100;
  double str_T = 1.0;
  int str_samples_per_unit = 32;
  std::vector<double> str_bands = {2.0, 4.0, 8.0};
  std::uint64_t str_seed = 1;
  double str_envelope = 3.0;
  // attractor
  double burn_in = 20.0;
  int attr_samples = 5;
  double attr_spacing = 1.0;
  std::vector<int> attr_resolutions;
  // sweep
  std::vector<double> sweep_alpha, sweep_kappa, sweep_g_amplitude, sweep_L;
  int sweep_budget = 64;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
  }
}

inline long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects an integer, got '" + v + "'");
  }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    const unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects an unsigned integer, got '" + v + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: " + key + " expects true/false, got '" + v + "'");
}

inline std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  if (trim(v).empty()) return out;
  for (const auto& item : split(v, ',')) out.push_back(parse_double(key, item));
  return out;
}

inline std::vector<ModeAmplitude> parse_modes(const std::string& key, const std::string& v) {
  std::vector<ModeAmplitude> out;
  if (trim(v).empty()) return out;
  for (const auto& item : split(v, ';')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("config: " + key + " entry '" + item + "' lacks ':amplitude'");
    const auto idx = split(item.substr(0, colon), ',');
    if (idx.size() != 3) throw ConfigError("config: " + key + " entry '" + item + "' needs three mode indices");
    ModeAmplitude m;
    m.m1 = int(parse_int(key, idx[0]));
    m.m2 = int(parse_int(key, idx[1]));
    m.m3 = int(parse_int(key, idx[2]));
    m.amplitude = parse_double(key, trim(item.substr(colon + 1)));
    out.push_back(m);
  }
  return out;
}

inline std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_number(v[i]);
  return s;
}

inline std::string join_modes(const std::vector<ModeAmplitude>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(v[i].m1) + "," + std::to_string(v[i].m2) + "," + std::to_string(v[i].m3) + ":" +
         format_number(v[i].amplitude);
  }
  return s;
}

struct ConfigKey {
  const char* name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define HCHO_NUM(key, field)                                                         \
  ConfigKey {                                                                        \
    key, [](const RunConfig& c) { return format_number(c.field); },                  \
        [](RunConfig& c, const std::string& v) { c.field = parse_double(key, v); }   \
  }
#define HCHO_INT(key, field)                                                         \
  ConfigKey {                                                                        \
    key, [](const RunConfig& c) { return std::to_string(c.field); },                 \
        [](RunConfig& c, const std::string& v) { c.field = int(parse_int(key, v)); } \
  }
#define HCHO_U64(key, field)                                                         \
  ConfigKey {                                                                        \
    key, [](const RunConfig& c) { return std::to_string(c.field); },                 \
        [](RunConfig& c, const std::string& v) { c.field = parse_u64(key, v); }      \
  }
#define HCHO_STR(key, field)                                                         \
  ConfigKey {                                                                        \
    key, [](const RunConfig& c) { return c.field; },                                 \
        [](RunConfig& c, const std::string& v) { c.field = v; }                      \
  }
#define HCHO_LIST(key, field)                                                          \
  ConfigKey {                                                                          \
    key, [](const RunConfig& c) { return join_doubles(c.field); },                     \
        [](RunConfig& c, const std::string& v) { c.field = parse_double_list(key, v); } \
  }
#define HCHO_MODES(key, field)                                                       \
  ConfigKey {                                                                        \
    key, [](const RunConfig& c) { return join_modes(c.field); },                     \
        [](RunConfig& c, const std::string& v) { c.field = parse_modes(key, v); }    \
  }

// Canonical key order; serialization follows it.
inline const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      HCHO_NUM("grid.length", length),
      HCHO_INT("grid.n", n),
      HCHO_NUM("model.alpha", alpha),
      HCHO_STR("nonlinearity.kind", nl_kind),
      HCHO_NUM("nonlinearity.c1", c1),
      HCHO_NUM("nonlinearity.c3", c3),
      HCHO_NUM("nonlinearity.c5", c5),
      HCHO_NUM("nonlinearity.c_sub", c_sub),
      HCHO_NUM("nonlinearity.kappa", kappa),
      HCHO_NUM("nonlinearity.L", nl_L),
      HCHO_NUM("nonlinearity.K", nl_K),
      HCHO_NUM("nonlinearity.C", nl_C),
      HCHO_STR("forcing.kind", forcing_kind),
      HCHO_MODES("forcing.modes", forcing_modes),
      HCHO_NUM("forcing.amplitude", forcing_amplitude),
      HCHO_U64("forcing.seed", forcing_seed),
      HCHO_NUM("forcing.envelope", forcing_envelope),
      HCHO_NUM("forcing.band", forcing_band),
      HCHO_STR("initial.kind", initial_kind),
      HCHO_MODES("initial.u_modes", initial_u_modes),
      HCHO_MODES("initial.v_modes", initial_v_modes),
      HCHO_U64("initial.seed", initial_seed),
      HCHO_NUM("initial.norm", initial_norm),
      HCHO_NUM("initial.envelope", initial_envelope),
      HCHO_NUM("initial.band", initial_band),
      HCHO_NUM("time.dt", dt),
      HCHO_STR("time.scheme", scheme),
      HCHO_NUM("time.T", T),
      HCHO_NUM("time.snapshot", snapshot),
      HCHO_NUM("time.padding", padding),
      HCHO_NUM("diagnostics.delta", delta),
      HCHO_NUM("diagnostics.window", window),
      HCHO_NUM("diagnostics.tail_fraction", tail_fraction),
      HCHO_STR("output.dir", output_dir),
      ConfigKey{"output.hexfloat", [](const RunConfig& c) { return std::string(c.hexfloat ? "true" : "false"); },
                [](RunConfig& c, const std::string& v) { c.hexfloat = parse_bool("output.hexfloat", v); }},
      HCHO_INT("strichartz.members", str_members),
      HCHO_NUM("strichartz.T", str_T),
      HCHO_INT("strichartz.samples_per_unit", str_samples_per_unit),
      HCHO_LIST("strichartz.bands", str_bands),
      HCHO_U64("strichartz.seed", str_seed),
      HCHO_NUM("strichartz.envelope", str_envelope),
      HCHO_NUM("attractor.burn_in", burn_in),
      HCHO_INT("attractor.samples", attr_samples),
      HCHO_NUM("attractor.spacing", attr_spacing),
      ConfigKey{"attractor.resolutions",
                [](const RunConfig& c) {
                  std::string s;
                  for (std::size_t i = 0; i < c.attr_resolutions.size(); ++i)
                    s += (i ? "," : "") + std::to_string(c.attr_resolutions[i]);
                  return s;
                },
                [](RunConfig& c, const std::string& v) {
                  c.attr_resolutions.clear();
                  if (trim(v).empty()) return;
                  for (const auto& item : split(v, ','))
                    c.attr_resolutions.push_back(int(parse_int("attractor.resolutions", item)));
                }},
      HCHO_LIST("sweep.alpha", sweep_alpha),
      HCHO_LIST("sweep.kappa", sweep_kappa),
      HCHO_LIST("sweep.g_amplitude", sweep_g_amplitude),
      HCHO_LIST("sweep.L", sweep_L),
      HCHO_INT("sweep.budget", sweep_budget),
  };
  return keys;
}

#undef HCHO_NUM
#undef HCHO_INT
#undef HCHO_U64
#undef HCHO_STR
#undef HCHO_LIST
#undef HCHO_MODES

inline bool is_multiple(double T, double dt) {
  const double r = T / dt;
  return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, r) && std::round(r) >= 1.0;
}

inline void check_modes(const std::vector<ModeAmplitude>& modes, int n, const char* key) {
  for (const auto& m : modes) {
    if (m.m1 == 0 && m.m2 == 0 && m.m3 == 0) throw ConfigError(std::string("config: ") + key + " contains the zero mode");
    for (int x : {m.m1, m.m2, m.m3})
      if (x <= -n / 2 || x >= n / 2) throw ConfigError(std::string("config: ") + key + " mode outside the grid");
    if (!std::isfinite(m.amplitude)) throw ConfigError(std::string("config: ") + key + " amplitude not finite");
  }
}

}  // namespace detail

// Range and consistency checks; throws ConfigError naming the offending key.
inline void validate(const RunConfig& c) {
  auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
  if (!(c.length > 0.0) || !std::isfinite(c.length)) fail("grid.length must be positive");
  if (c.n < 8 || c.n % 2 || c.n > 1024) fail("grid.n must be even, between 8 and 1024");
  if (!(c.alpha > 0.0)) fail("model.alpha must be positive");
  if (c.nl_kind != "zero" && c.nl_kind != "cubic" && c.nl_kind != "polynomial")
    fail("nonlinearity.kind must be zero, cubic or polynomial");
  if (!(c.kappa > 0.0 && c.kappa <= 3.0)) fail("nonlinearity.kappa must lie in (0, 3]");
  if (c.nl_L < 0.0 || c.nl_K < 0.0 || c.nl_C < 0.0) fail("nonlinearity constants must be nonnegative");
  if (c.forcing_kind != "none" && c.forcing_kind != "modes" && c.forcing_kind != "random")
    fail("forcing.kind must be none, modes or random");
  if (c.forcing_kind == "modes" && c.forcing_modes.empty()) fail("forcing.kind = modes needs forcing.modes");
  detail::check_modes(c.forcing_modes, c.n, "forcing.modes");
  if (!std::isfinite(c.forcing_amplitude)) fail("forcing.amplitude must be finite");
  if (c.forcing_band < 0.0 || c.initial_band < 0.0) fail("band limits must be nonnegative");
  if (c.initial_kind != "zero" && c.initial_kind != "modes" && c.initial_kind != "random")
    fail("initial.kind must be zero, modes or random");
  detail::check_modes(c.initial_u_modes, c.n, "initial.u_modes");
  detail::check_modes(c.initial_v_modes, c.n, "initial.v_modes");
  if (!(c.initial_norm >= 0.0)) fail("initial.norm must be nonnegative");
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) fail("time.dt must be positive");
  if (c.scheme != "etd1" && c.scheme != "etd2") fail("time.scheme must be etd1 or etd2");
  if (!(c.T > 0.0) || !std::isfinite(c.T)) fail("time.T must be positive");
  if (!detail::is_multiple(c.T, c.dt)) fail("time.T must be a whole number of steps");
  if (c.snapshot < 0.0) fail("time.snapshot must be nonnegative");
  if (c.snapshot > 0.0 && !detail::is_multiple(c.snapshot, c.dt)) fail("time.snapshot must be a multiple of time.dt");
  if (!(c.padding >= 1.0)) fail("time.padding must be >= 1");
  if (c.delta < 0.0) fail("diagnostics.delta must be nonnegative");
  if (!(c.window > 0.0)) fail("diagnostics.window must be positive");
  if (!(c.tail_fraction > 0.0 && c.tail_fraction <= 1.0)) fail("diagnostics.tail_fraction must lie in (0, 1]");
  if (c.output_dir.empty()) fail("output.dir must not be empty");
  if (c.str_members < 1) fail("strichartz.members must be >= 1");
  if (!(c.str_T > 0.0)) fail("strichartz.T must be positive");
  if (c.str_samples_per_unit < 1) fail("strichartz.samples_per_unit must be >= 1");
  for (std::size_t i = 0; i < c.str_bands.size(); ++i) {
    if (!(c.str_bands[i] > 1.0)) fail("strichartz.bands entries must exceed 1");
    if (i && !(c.str_bands[i] > c.str_bands[i - 1])) fail("strichartz.bands must be strictly increasing");
  }
  if (!(c.burn_in > 0.0)) fail("attractor.burn_in must be positive");
  if (c.attr_samples < 1) fail("attractor.samples must be >= 1");
  if (!(c.attr_spacing > 0.0)) fail("attractor.spacing must be positive");
  for (std::size_t i = 0; i < c.attr_resolutions.size(); ++i) {
    const int r = c.attr_resolutions[i];
    if (r < 8 || r % 2 || r > 1024) fail("attractor.resolutions entries must be even, between 8 and 1024");
    if (i && r <= c.attr_resolutions[i - 1]) fail("attractor.resolutions must be increasing");
  }
  for (double a : c.sweep_alpha)
    if (!(a > 0.0)) fail("sweep.alpha entries must be positive");
  for (double k : c.sweep_kappa)
    if (!(k > 0.0 && k <= 3.0)) fail("sweep.kappa entries must lie in (0, 3]");
  for (double l : c.sweep_L)
    if (!(l > 0.0)) fail("sweep.L entries must be positive");
  if (c.sweep_budget < 1) fail("sweep.budget must be >= 1");
}

// Parses and validates. Errors (syntax, unknown or duplicate keys, bad values)
// are ConfigError.
inline RunConfig parse_config(const std::string& text) {
  namespace po = boost::program_options;
  po::options_description desc;
  for (const auto& k : detail::config_keys()) desc.add_options()(k.name, po::value<std::string>());
  po::variables_map vm;
  try {
    std::istringstream in(text);
    po::store(po::parse_config_file(in, desc, false), vm);
  } catch (const po::error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig c;
  for (const auto& k : detail::config_keys()) {
    if (vm.count(k.name)) k.set(c, detail::trim(vm[k.name].as<std::string>()));
  }
  validate(c);
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

// Every key in canonical order; parse_config(serialize(c)) == c.
inline std::string serialize(const RunConfig& c, bool include_output = true) {
  std::string s;
  for (const auto& k : detail::config_keys()) {
    if (!include_output && std::string(k.name).rfind("output.", 0) == 0) continue;
    s += std::string(k.name) + " = " + k.get(c) + "\n";
  }
  return s;
}

// Hash of everything except output.*; written into every table row.
inline std::uint64_t config_hash(const RunConfig& c) { return fnv1a64(serialize(c, false)); }

// Hash of the keys that determine the evolution of a given state: grid,
// model, nonlinearity, forcing and the time stepper. Guards resume.
inline std::uint64_t physics_hash(const RunConfig& c) {
  std::string s;
  for (const auto& k : detail::config_keys()) {
    const std::string name = k.name;
    const bool keep = name.rfind("grid.", 0) == 0 || name.rfind("model.", 0) == 0 ||
                      name.rfind("nonlinearity.", 0) == 0 || name.rfind("forcing.", 0) == 0 ||
                      name == "time.dt" || name == "time.scheme" || name == "time.padding";
    if (keep) s += name + " = " + k.get(c) + "\n";
  }
  return fnv1a64(s);
}

inline Grid make_grid(const RunConfig& c) { return Grid(c.length, c.n); }

inline NonlinearitySpec make_spec(const RunConfig& c) {
  NonlinearitySpec s;
  if (c.nl_kind == "zero") {
    s = NonlinearitySpec::zero();
  } else if (c.nl_kind == "cubic") {
    s = NonlinearitySpec::polynomial(0.0, c.c3, 0.0, 0.0, c.kappa, NonlinearityKind::cubic);
  } else {
    s = NonlinearitySpec::polynomial(c.c1, c.c3, c.c5, c.c_sub, c.kappa);
  }
  if (c.nl_L > 0.0) s.L = c.nl_L;
  if (c.nl_K > 0.0) s.K = c.nl_K;
  if (c.nl_C > 0.0) s.C = c.nl_C;
  return s;
}

inline SpectralField modes_field(const Grid& g, const std::vector<ModeAmplitude>& modes, double scale = 1.0) {
  SpectralField f(g);
  for (const auto& m : modes) f += cosine_mode(g, m.m1, m.m2, m.m3, scale * m.amplitude);
  return f;
}

namespace detail {

inline void drop_mean(SpectralField& f, const char* what) {
  const Complex m = f.remove_mean();
  if (m != Complex{}) spdlog::info("{}: removed spatial mean {:.17g}", what, m.real());
}

}  // namespace detail

// g: cosine modes scaled by forcing.amplitude, or a random field with
// H^1 norm forcing.amplitude.
inline SpectralField make_forcing(const RunConfig& c, const Grid& g) {
  SpectralField f(g);
  if (c.forcing_kind == "modes") {
    f = modes_field(g, c.forcing_modes, c.forcing_amplitude);
  } else if (c.forcing_kind == "random") {
    f = random_field(g, c.forcing_seed, {c.forcing_envelope, c.forcing_band});
    const double h1 = sobolev_norm(f, 1.0);
    if (h1 > 0.0) f *= c.forcing_amplitude / h1;
  }
  detail::drop_mean(f, "forcing");
  return f;
}

inline StateVector make_initial(const RunConfig& c, const Grid& g) {
  StateVector s(g, 0.0);
  if (c.initial_kind == "modes") {
    s.u = modes_field(g, c.initial_u_modes);
    s.v = modes_field(g, c.initial_v_modes);
  } else if (c.initial_kind == "random") {
    s = random_state(g, c.initial_seed, c.alpha, c.initial_norm, {c.initial_envelope, c.initial_band});
  }
  detail::drop_mean(s.u, "initial u");
  detail::drop_mean(s.v, "initial u_t");
  return s;
}

inline SolverConfig make_solver(const RunConfig& c, const Grid& g) {
  SolverConfig s(g);
  s.dt = c.dt;
  s.scheme = c.scheme == "etd1" ? Scheme::etd1 : Scheme::etd2;
  s.padding = c.padding;
  s.alpha = c.alpha;
  s.g = make_forcing(c, g);
  s.snapshot = c.snapshot;
  s.config_hash = config_hash(c);
  return s;
}

}  // namespace hcho
