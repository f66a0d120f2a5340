#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "hcho/checkpoint.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "hcho_cli_test";

int run(const std::string& args) {
  const std::string cmd = std::string(HCHO_CLI) + " " + args + " > " + (kWork / "log.txt").string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path write_config(const std::string& name, const std::string& body) {
  fs::create_directories(kWork);
  const fs::path p = kWork / name;
  std::ofstream(p) << body;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const char* kBase = R"(grid.length = 6.283185307179586
grid.n = 8
forcing.kind = modes
forcing.modes = 1,0,0:0.5
initial.norm = 2
time.dt = 0.05
time.snapshot = 0.25
)";

}  // namespace

TEST_CASE("invalid configuration exits with 2") {
  const auto cfg = write_config("bad.cfg", std::string(kBase) + "time.T = 0\n");
  CHECK(run("run --config " + cfg.string() + " --out " + (kWork / "bad").string()) == 2);
  const auto unknown = write_config("unknown.cfg", std::string(kBase) + "time.TT = 1\n");
  CHECK(run("run --config " + unknown.string()) == 2);
  CHECK(run("run --dt-halve -1") == 2);
  CHECK(run("nosuchcommand") == 2);
}

TEST_CASE("runs are reproducible and write their outputs") {
  const auto cfg = write_config("ok.cfg", std::string(kBase) + "time.T = 1\n");
  REQUIRE(run("run --config " + cfg.string() + " --out " + (kWork / "a").string() + " --seed 3") == 0);
  REQUIRE(run("run --config " + cfg.string() + " --out " + (kWork / "b").string() + " --seed 3") == 0);
  for (const char* f : {"trajectory.csv", "diagnostics.csv", "final.chk"}) {
    CHECK(fs::exists(kWork / "a" / f));
    CHECK(slurp(kWork / "a" / f) == slurp(kWork / "b" / f));
  }
  const auto summary = nlohmann::json::parse(slurp(kWork / "a" / "summary.json"));
  CHECK(summary["status"] == "ok");
  CHECK(summary["seed"] == 3);
  REQUIRE(run("run --config " + cfg.string() + " --out " + (kWork / "c").string() + " --seed 4") == 0);
  CHECK(slurp(kWork / "a" / "final.chk") != slurp(kWork / "c" / "final.chk"));
  // every row carries the config hash
  const std::string hash = summary["config_hash"];
  CHECK(slurp(kWork / "a" / "trajectory.csv").find(hash) != std::string::npos);
}

TEST_CASE("resume continues bit-exactly and refuses other physics") {
  const auto one = write_config("one.cfg", std::string(kBase) + "time.T = 1\n");
  const auto two = write_config("two.cfg", std::string(kBase) + "time.T = 2\n");
  REQUIRE(run("run --config " + one.string() + " --out " + (kWork / "r1").string()) == 0);
  REQUIRE(run("run --config " + two.string() + " --out " + (kWork / "r2").string()) == 0);
  const auto ck = (kWork / "r1" / "final.chk").string();
  REQUIRE(run("run --config " + two.string() + " --out " + (kWork / "r12").string() + " --resume " + ck) == 0);
  const auto direct = hcho::checkpoint_read(kWork / "r2" / "final.chk");
  const auto resumed = hcho::checkpoint_read(kWork / "r12" / "final.chk");
  CHECK(direct.state.u == resumed.state.u);
  CHECK(direct.state.v == resumed.state.v);
  CHECK(resumed.state.time == Catch::Approx(2.0).epsilon(1e-14));
  // dt halved: different physics hash
  CHECK(run("run --config " + two.string() + " --out " + (kWork / "r3").string() + " --dt-halve 1 --resume " + ck) == 2);
  // corrupted checkpoint
  std::string bytes = slurp(ck);
  bytes[100] ^= 0x5a;
  const auto broken = kWork / "broken.chk";
  std::ofstream(broken, std::ios::binary) << bytes;
  CHECK(run("run --config " + two.string() + " --out " + (kWork / "r4").string() + " --resume " + broken.string()) == 4);
}

TEST_CASE("blow-up exits with 3 and leaves error.json") {
  std::string base = kBase;
  base.replace(base.find("initial.norm = 2"), 16, "initial.norm = 40");
  const auto cfg =
      write_config("blow.cfg", base + "time.T = 10\nnonlinearity.kind = polynomial\nnonlinearity.c3 = -1\n");
  CHECK(run("run --config " + cfg.string() + " --out " + (kWork / "blow").string()) == 3);
  REQUIRE(fs::exists(kWork / "blow" / "error.json"));
  const auto err = nlohmann::json::parse(slurp(kWork / "blow" / "error.json"));
  CHECK(err["status"] == "blow-up");
  CHECK(err["time"].is_number());
}

TEST_CASE("hexfloat output is exact") {
  const auto cfg = write_config("hex.cfg", std::string(kBase) + "time.T = 0.5\n");
  REQUIRE(run("run --config " + cfg.string() + " --out " + (kWork / "hex").string() + " --hexfloat") == 0);
  CHECK(slurp(kWork / "hex" / "trajectory.csv").find("0x") != std::string::npos);
}

TEST_CASE("verify exits 0") {
  CHECK(run("verify --out " + (kWork / "verify").string()) == 0);
  CHECK(fs::exists(kWork / "verify" / "verify.csv"));
}

TEST_CASE("strichartz, attractor and sweep subcommands") {
  const auto s = write_config("str.cfg", std::string(kBase) +
                                             "time.T = 1\n[strichartz]\nmembers = 5\nT = 0.5\nsamples_per_unit = 8\n");
  REQUIRE(run("strichartz --config " + s.string() + " --out " + (kWork / "s1").string()) == 0);
  REQUIRE(run("strichartz --config " + s.string() + " --out " + (kWork / "s2").string()) == 0);
  CHECK(slurp(kWork / "s1" / "strichartz.csv") == slurp(kWork / "s2" / "strichartz.csv"));
  CHECK(fs::exists(kWork / "s1" / "strichartz_bands.csv"));

  const auto a = write_config("attr.cfg", std::string(kBase) +
                                              "time.T = 1\n[attractor]\nburn_in = 12\nsamples = 2\nspacing = 0.5\n"
                                              "resolutions = 8,12\n");
  REQUIRE(run("attractor --config " + a.string() + " --out " + (kWork / "attr").string()) == 0);
  CHECK(fs::exists(kWork / "attr" / "attractor.csv"));
  CHECK(fs::exists(kWork / "attr" / "regularity.csv"));
  // burn-in far below 5/beta is refused
  const auto short_burn = write_config("attr2.cfg", std::string(kBase) + "time.T = 1\nattractor.burn_in = 1\nattractor.spacing = 0.5\n");
  CHECK(run("attractor --config " + short_burn.string() + " --out " + (kWork / "attr2").string()) == 2);

  const auto w = write_config("sweep.cfg", std::string(kBase) + "time.T = 2\nsweep.alpha = 0.5, 1\nsweep.g_amplitude = 1, 2\n");
  REQUIRE(run("sweep --config " + w.string() + " --out " + (kWork / "sweep").string()) == 0);
  const std::string table = slurp(kWork / "sweep" / "sweep.csv");
  CHECK(std::count(table.begin(), table.end(), '\n') == 5);
  const auto over = write_config("sweep2.cfg", std::string(kBase) + "time.T = 2\nsweep.alpha = 0.5, 1\nsweep.budget = 1\n");
  CHECK(run("sweep --config " + over.string() + " --out " + (kWork / "sweep2").string()) == 2);
}
