#include <random>
#include <sstream>

#include "catch_amalgamated.hpp"
#include "support.hpp"

using namespace latpair;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

LongRangeParams rbk_tail() { return LongRangeParams::rbk_triplet(4.27e5, 4.9e7); }

// Short-range table that continues the tail exactly (plus a constant offset).
RadialTable tail_table(const LongRangeParams& lr, double offset) {
  RadialTable t;
  for (int i = 0; i <= 280; ++i) {
    const double r = 6.0 + 0.05 * i;
    t.r.push_back(r);
    t.v.push_back(lr.value(r) + 0.05 * std::exp(-2.0 * (r - 6.0)) + offset);
  }
  return t;
}

}  // namespace

TEST_CASE("Long-range tail arithmetic", "[potentials]") {
  const auto lr = rbk_tail();
  const double r = 40.0;
  const double expected = -4292.0 / std::pow(r, 6) - 4.27e5 / std::pow(r, 8) - 4.9e7 / std::pow(r, 10) -
                          0.00231382 * std::pow(r, 5.25603) * std::exp(-1.11892 * r);
  CHECK_THAT(lr.value(r), WithinRel(expected, 1e-14));
  const double h = 1e-4;
  CHECK_THAT(lr.derivative(r), WithinRel((lr.value(r + h) - lr.value(r - h)) / (2 * h), 1e-7));
}

TEST_CASE("Merge offset between the short- and long-range branches", "[potentials]") {
  const auto lr = rbk_tail();
  SECTION("continuous data needs no offset") {
    const auto c = build_interaction(tail_table(lr, 0.0), lr, 18.2, 18.6);
    CHECK_THAT(c.merge_offset(), WithinAbs(0.05 * std::exp(-2.0 * 12.2) + lr.value(18.2) - lr.value(18.6), 1e-13));
    CHECK_THAT(c(30.0), WithinRel(lr.value(30.0), 1e-15));
  }
  SECTION("an offset eps is split evenly") {
    const double eps = 1e-6;
    const auto c0 = build_interaction(tail_table(lr, 0.0), lr, 18.2, 18.6);
    const auto c1 = build_interaction(tail_table(lr, eps), lr, 18.2, 18.6);
    CHECK_THAT(c1.merge_offset() - c0.merge_offset(), WithinAbs(eps, 1e-15));
    // short-range side moves by eps - eps/2 relative to the unshifted table
    CHECK_THAT(c1(12.0) - c0(12.0), WithinAbs(0.5 * eps, 1e-15));
  }
  SECTION("a jump without a bridge is rejected") {
    CHECK_THROWS_AS(build_interaction(tail_table(lr, 1e-4), lr, 18.2, 18.2), domain_error);
    CHECK_THROWS_AS(build_interaction(tail_table(lr, 0.0), lr, 18.6, 18.2), domain_error);
  }
  SECTION("the merged curve is continuous across the bridge") {
    const auto c = build_interaction(tail_table(lr, 3e-6), lr, 18.2, 18.6);
    for (double r : {18.2, 18.6}) CHECK_THAT(c(r - 1e-9), WithinAbs(c(r + 1e-9), 1e-12));
  }
}

TEST_CASE("Curve tables round-trip and report bad lines", "[potentials]") {
  const auto t = tail_table(rbk_tail(), 0.0);
  std::stringstream ss;
  write_curve_table(ss, t, "test");
  const auto back = read_curve_table(ss);
  REQUIRE(back.size() == t.size());
  for (std::size_t i = 0; i < t.size(); ++i) CHECK_THAT(back.v[i], WithinRel(t.v[i], 1e-15));
  std::istringstream bad("# r V\n5.0 -1e-3\n5.1 oops\n");
  try {
    read_curve_table(bad, "bad.dat");
    FAIL("no error");
  } catch (const domain_error& e) {
    CHECK(std::string(e.what()).find("bad.dat:3") != std::string::npos);
  }
}

TEST_CASE("Synthetic short range has the requested well", "[potentials]") {
  const auto lr = rbk_tail();
  const SyntheticShortRange p;
  const auto tt = TangToennies::fit(p.well_depth, p.r_equilibrium, lr.c6, lr.c8, lr.c10);
  CHECK_THAT(tt(p.r_equilibrium), WithinRel(-p.well_depth, 1e-10));
  const double h = 1e-5;
  CHECK_THAT((tt(p.r_equilibrium + h) - tt(p.r_equilibrium - h)) / (2 * h), WithinAbs(0.0, 1e-10));
  const auto c = build_interaction(synthetic_short_range(p, lr), lr, 18.2, 18.6);
  CHECK_THAT(c.r_equilibrium(), WithinRel(p.r_equilibrium, 1e-3));
  CHECK_THAT(c.well_depth(), WithinRel(p.well_depth, 1e-2));
}

TEST_CASE("Inner-wall shift", "[potentials]") {
  const auto lr = rbk_tail();
  const auto c = build_interaction(synthetic_short_range({}, lr), lr, 18.2, 18.6);
  const auto w = c.window();
  SECTION("zero shift is the identity") {
    const auto s0 = shift_inner_wall(c, 0.0);
    for (double r = 5.0; r < 30.0; r += 0.37) CHECK(s0(r) == c(r));
  }
  SECTION("rigid displacement inside the window start, untouched beyond its end") {
    const double s = 0.3;
    const auto cs = shift_inner_wall(c, s);
    for (double r : {6.0, 7.5, 0.95 * w.start}) CHECK_THAT(cs(r), WithinRel(c(r - s), 1e-14));
    for (double r : {w.end, 12.0, 25.0}) CHECK(cs(r) == c(r));
    CHECK(cs.wall_radius(0.05) > c.wall_radius(0.05));
  }
  SECTION("window limits") {
    CHECK_THROWS_AS(shift_inner_wall(c, 0.6 * (w.end - w.start)), domain_error);
    CHECK_THROWS_AS(shift_inner_wall(c, 0.1, WallWindow{5.0, c.r_equilibrium() + 1.0}), domain_error);
  }
}

TEST_CASE("sin^2 Taylor coefficients", "[potentials]") {
  CHECK(sin2_taylor_fraction(1) == std::pair<long long, long long>{1, 1});
  CHECK(sin2_taylor_fraction(2) == std::pair<long long, long long>{-1, 3});
  CHECK(sin2_taylor_fraction(3) == std::pair<long long, long long>{2, 45});
  CHECK_THAT(sin2_truncated(0.3, 6), WithinAbs(std::pow(std::sin(0.3), 2), 3e-7));
  CHECK_NOTHROW(check_taylor_order(2));
  CHECK_NOTHROW(check_taylor_order(6));
  CHECK_THROWS_AS(check_taylor_order(4), unsupported_order_error);
  CHECK_THROWS_AS(check_taylor_order(8), unsupported_order_error);
}

TEST_CASE("Lattice polynomial separation", "[potentials]") {
  const auto rb = find_atom("Rb87"), k = find_atom("K40");
  const auto pair = derive_pair_parameters(rb, k, testing::rbk_trap(40.0, 2));
  const double kk = wave_number(1030.0);

  SECTION("harmonic coupling coefficient") {
    const auto t = testing::rbk_trap(40.0, 2);
    const auto poly = separate_lattice(t, pair);
    const double v1 = t.depth[0][0], v2 = t.depth[1][0];
    for (const auto& ax : poly.axes) {
      REQUIRE(ax.coupling.size() == 1);
      const auto [a, b, c] = ax.coupling.front();
      CHECK(a == 1);
      CHECK(b == 1);
      CHECK_THAT(c, WithinRel(2 * kk * kk * (v1 * pair.mu2 - v2 * pair.mu1), 1e-13));
    }
  }
  SECTION("homonuclear equal depths separate only in the harmonic order") {
    const auto t2 = TrapSpec::cubic(1030.0, 1e-10, 1e-10, 2);
    const auto pp = derive_pair_parameters(rb, rb, t2);
    CHECK(separate_lattice(t2, pp).separable());
    // (X + x/2)^4 + (X - x/2)^4 = 2 X^4 + 3 X^2 x^2 + x^4 / 8: odd powers cancel, even ones couple
    const auto t6 = TrapSpec::cubic(1030.0, 1e-10, 1e-10, 6);
    const auto poly = separate_lattice(t6, pp);
    CHECK_FALSE(poly.separable());
    for (const auto& ax : poly.axes)
      for (const auto& [a, b, c] : ax.coupling) {
        CHECK(a % 2 == 0);
        CHECK(b % 2 == 0);
      }
    const double kk4 = std::pow(kk, 4);
    bool found = false;
    for (const auto& [a, b, c] : poly.axes[0].coupling)
      if (a == 2 && b == 2) {
        found = true;
        CHECK_THAT(c, WithinRel(-1e-10 / 3.0 * kk4 * 3.0, 1e-12));
      }
    CHECK(found);
  }
  SECTION("sextic polynomial against direct evaluation") {
    const auto t = testing::rbk_trap(40.0, 6);
    const auto poly = separate_lattice(t, pair);
    CHECK(poly.max_coupling_power() == 5);
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> u(-0.5 / kk, 0.5 / kk);
    const double c[3] = {1.0, -1.0 / 3.0, 2.0 / 45.0};
    for (int n = 0; n < 50; ++n) {
      std::array<double, 3> R{u(rng), u(rng), u(rng)}, r{2 * u(rng), 2 * u(rng), 2 * u(rng)};
      double direct = 0.0, scale = 0.0;
      for (int ax = 0; ax < 3; ++ax) {
        const double x1 = R[ax] + pair.mu2 * r[ax], x2 = R[ax] - pair.mu1 * r[ax];
        for (int p = 1; p <= 3; ++p) {
          const double t1 = t.depth[0][ax] * c[p - 1] * std::pow(kk * x1, 2 * p);
          const double t2 = t.depth[1][ax] * c[p - 1] * std::pow(kk * x2, 2 * p);
          direct += t1 + t2;
          scale += std::abs(t1) + std::abs(t2);
        }
      }
      CHECK_THAT(poly.evaluate(R, r), WithinAbs(direct, 1e-12 * scale));
    }
    // the relative polynomial is bounded below: positive sextic leading term on every axis
    for (const auto& ax : poly.axes) {
      const auto lead = std::max_element(ax.rel.begin(), ax.rel.end());
      REQUIRE(lead != ax.rel.end());
      CHECK(lead->first == 6);
      CHECK(lead->second > 0.0);
    }
  }
  SECTION("unsupported orders") {
    auto t = testing::rbk_trap(40.0, 2);
    t.taylor_order = 4;
    CHECK_THROWS_AS(separate_lattice(t, pair), unsupported_order_error);
  }
}
