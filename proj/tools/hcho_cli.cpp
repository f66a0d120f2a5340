#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "hcho/hcho.hpp"

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string resume;
  int dt_halve = 0;
  bool hexfloat = false;
  bool verbose = false;
};

hcho::RunConfig prepare(const Common& c) {
  hcho::RunConfig cfg = c.config.empty() ? hcho::RunConfig{} : hcho::load_config(c.config);
  if (c.seed) {
    cfg.initial_seed = *c.seed;
    cfg.str_seed = *c.seed;
  }
  if (c.dt_halve < 0) throw hcho::ConfigError("--dt-halve must be >= 0");
  cfg.dt = std::ldexp(cfg.dt, -c.dt_halve);
  if (c.hexfloat) cfg.hexfloat = true;
  if (!c.out.empty()) cfg.output_dir = c.out;
  hcho::validate(cfg);
  return cfg;
}

hcho::RunOptions options(const Common& c) {
  hcho::RunOptions o;
  if (!c.out.empty()) o.out_dir = c.out;
  if (!c.resume.empty()) o.resume = c.resume;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral solver for the damped Cahn-Hilliard-Oono equation on a periodic box"};
  app.require_subcommand(1);
  Common c;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", c.config, "config file (key = value)")->check(CLI::ExistingFile);
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--seed", c.seed, "override the random seeds");
    sub->add_option("--dt-halve", c.dt_halve, "halve dt K times");
    sub->add_flag("--hexfloat", c.hexfloat, "write CSV numbers as hexfloat");
    sub->add_flag("-v,--verbose", c.verbose, "debug logging");
  };
  auto* run = app.add_subcommand("run", "integrate one trajectory");
  add_common(run);
  run->add_option("--resume", c.resume, "checkpoint to continue from")->check(CLI::ExistingFile);
  auto* verify = app.add_subcommand("verify", "small-grid invariant checks");
  add_common(verify);
  auto* str = app.add_subcommand("strichartz", "Strichartz quotient ensemble");
  add_common(str);
  auto* attr = app.add_subcommand("attractor", "attractor sampling and regularity");
  add_common(attr);
  auto* sweep = app.add_subcommand("sweep", "parameter sweep");
  add_common(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : hcho::kExitInvalidConfig;
  }
  spdlog::set_level(c.verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*verify) {
      const hcho::VerifyReport rep = hcho::run_verify();
      std::cout << rep.table();
      if (!c.out.empty()) {
        std::filesystem::create_directories(c.out);
        hcho::CsvTable::write_text(std::filesystem::path(c.out) / "verify.csv", rep.table());
      }
      return rep.all_passed() ? hcho::kExitOk : hcho::kExitCheckFailed;
    }
    const hcho::RunConfig cfg = prepare(c);
    const hcho::RunOptions opt = options(c);
    if (*run) return hcho::run_command(cfg, opt);
    if (*str) return hcho::strichartz_command(cfg, opt);
    if (*attr) return hcho::attractor_command(cfg, opt);
    if (*sweep) return hcho::sweep_command(cfg, opt);
  } catch (const hcho::ConfigError& e) {
    spdlog::error("{}", e.what());
    return hcho::kExitInvalidConfig;
  } catch (const hcho::ConfigHashMismatch& e) {
    spdlog::error("{}", e.what());
    return hcho::kExitInvalidConfig;
  } catch (const hcho::ParameterError& e) {
    spdlog::error("{}", e.what());
    return hcho::kExitInvalidConfig;
  } catch (const hcho::DomainError& e) {
    spdlog::error("{}", e.what());
    return hcho::kExitInvalidConfig;
  } catch (const hcho::BlowUpError& e) {
    spdlog::error("{}", e.what());
    return hcho::kExitBlowUp;
  } catch (const hcho::DataIntegrityError& e) {
    spdlog::error("{}", e.what());
    return hcho::kExitDataError;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return hcho::kExitCheckFailed;
  }
  return hcho::kExitOk;
}
