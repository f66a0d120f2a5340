#include <catch_amalgamated.hpp>

#include <chrono>

#include "hcho/verify.hpp"

using namespace hcho;

namespace {
bool passed(const VerifyReport& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return c.passed;
  FAIL("no check named " << name);
  return false;
}
}  // namespace

TEST_CASE("verify suite passes on the real operators, quickly") {
  const auto t0 = std::chrono::steady_clock::now();
  const VerifyReport rep = run_verify();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  INFO(rep.table());
  CHECK(rep.all_passed());
  CHECK(rep.checks.size() >= 18);
  CHECK(secs < 60.0);
}

TEST_CASE("a sign fault in the inverse Laplacian is caught") {
  VerifyHooks hooks;
  hooks.inverse_laplacian = [](const SpectralField& f) { return -1.0 * apply_inverse_laplacian(f); };
  const VerifyReport rep = run_verify(hooks);
  CHECK_FALSE(passed(rep, "inverse_laplacian_shift"));
  CHECK_FALSE(rep.all_passed());
}

TEST_CASE("a scale fault in the inverse Laplacian is caught") {
  VerifyHooks hooks;
  hooks.inverse_laplacian = [](const SpectralField& f) {
    SpectralField r = apply_inverse_laplacian(f);
    r *= 1.0 + 1e-9;
    return r;
  };
  CHECK_FALSE(passed(run_verify(hooks), "inverse_laplacian_shift"));
}

TEST_CASE("a throwing operator marks its check failed without aborting the suite") {
  VerifyHooks hooks;
  hooks.inverse_laplacian = [](const SpectralField&) -> SpectralField { throw std::runtime_error("boom"); };
  const VerifyReport rep = run_verify(hooks);
  CHECK_FALSE(passed(rep, "inverse_laplacian_shift"));
  CHECK(passed(rep, "parseval"));
}
