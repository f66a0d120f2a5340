#include <catch_amalgamated.hpp>

#include <numbers>

#include "hcho/grid.hpp"

using hcho::Grid;

TEST_CASE("grid rejects bad sizes") {
  CHECK_THROWS_AS(Grid(1.0, 7), hcho::ConfigError);
  CHECK_THROWS_AS(Grid(1.0, 6), hcho::ConfigError);
  CHECK_THROWS_AS(Grid(0.0, 8), hcho::ConfigError);
  CHECK_THROWS_AS(Grid(-1.0, 8), hcho::ConfigError);
  CHECK_NOTHROW(Grid(1.0, 8));
}

TEST_CASE("mode indexing round trips and mirrors") {
  const Grid g(2.0 * std::numbers::pi, 8);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto m = g.mode(i);
    CHECK(g.index(m[0], m[1], m[2]) == i);
    const auto mm = g.mode(g.mirror(i));
    CHECK(g.index(-m[0], -m[1], -m[2]) == g.mirror(i));
    CHECK(g.msq(i) == m[0] * m[0] + m[1] * m[1] + m[2] * m[2]);
    CHECK(g.mirror(g.mirror(i)) == i);
    (void)mm;
  }
  CHECK(g.max_msq() == 48);
}

TEST_CASE("wavenumbers scale with the box") {
  const Grid g(4.0 * std::numbers::pi, 8);
  CHECK(g.k2(g.index(1, 0, 0)) == Catch::Approx(0.25));
  CHECK(g.k2(g.index(2, 2, 0)) == Catch::Approx(2.0));
  CHECK(g.volume() == Catch::Approx(std::pow(4.0 * std::numbers::pi, 3)));
}

TEST_CASE("dealias mask keeps |m_i| <= n/3") {
  const Grid g(1.0, 12);
  CHECK(g.dealiased(g.index(4, -4, 0)));
  CHECK_FALSE(g.dealiased(g.index(5, 0, 0)));
  CHECK_FALSE(g.dealiased(g.index(0, 0, -6)));
}

TEST_CASE("grids with equal parameters compare equal and share plans") {
  const Grid a(3.0, 16), b(3.0, 16), c(3.0, 8);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(&a.plans() == &b.plans());
  CHECK_THROWS_AS(hcho::require_same_grid(a, c, "x"), hcho::ConfigError);
}
