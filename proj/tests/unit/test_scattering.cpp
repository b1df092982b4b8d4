#include <numbers>

#include "catch_amalgamated.hpp"
#include "latpair/scattering.hpp"
#include "support.hpp"

using namespace latpair;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ScatteringResult square_well(double radius, double g, double mu) {
  const double depth = g * g / (2.0 * mu * radius * radius);
  ScatteringOptions so;
  so.r_start = 0.0;
  so.align = radius;
  so.r_end = 1e4;
  return extract_scattering_length([=](double r) { return r < radius ? -depth : 0.0; }, mu, so);
}

double rbk_mu() {
  const auto rb = find_atom("Rb87"), k = find_atom("K40");
  return rb.mass * k.mass / (rb.mass + k.mass);
}

PotentialCurve rbk_curve() {
  const auto lr = LongRangeParams::rbk_triplet(4.27e5, 4.9e7);
  return build_interaction(synthetic_short_range({}, lr), lr, 18.2, 18.6);
}

}  // namespace

TEST_CASE("Square wells match the closed form", "[scattering]") {
  const double R = 50.0, mu = 1000.0;
  const std::array<std::pair<double, int>, 5> cases{{{0.5, 0}, {1.2, 0}, {2.0, 1}, {4.0, 1}, {7.5, 2}}};
  for (const auto& [g, nodes] : cases) {
    const auto res = square_well(R, g, mu);
    CHECK_THAT(res.scattering_length, WithinRel(R * (1.0 - std::tan(g) / g), 1e-8));
    CHECK(res.nodes == nodes);
  }
}

TEST_CASE("Hard sphere and free particle", "[scattering]") {
  ScatteringOptions so;
  so.r_start = 37.0;
  so.r_end = 1e4;
  CHECK_THAT(extract_scattering_length([](double) { return 0.0; }, 500.0, so).scattering_length, WithinRel(37.0, 1e-8));
  so.r_start = 0.0;
  const auto free = extract_scattering_length([](double) { return 0.0; }, 500.0, so);
  CHECK_THAT(free.scattering_length, WithinAbs(0.0, 1e-8));
  CHECK(free.nodes == 0);
  CHECK_THROWS_AS(extract_scattering_length([](double) { return 0.0; }, -1.0, so), domain_error);
}

TEST_CASE("Crossing a bound-state threshold adds exactly one node", "[scattering]") {
  const double g0 = std::numbers::pi / 2;
  const auto below = square_well(50.0, g0 - 0.01, 1000.0);
  const auto above = square_well(50.0, g0 + 0.01, 1000.0);
  CHECK(above.nodes - below.nodes == 1);
  CHECK(below.scattering_length < -1000.0);
  CHECK(above.scattering_length > 1000.0);
}

TEST_CASE("Synthetic RbK curve", "[scattering]") {
  const double mu = rbk_mu();
  const auto c = rbk_curve();
  const auto base = extract_scattering_length(c, mu);
  CHECK(base.nodes == 31);

  SECTION("a(s) increases between poles and the pole removes one bound state") {
    double prev = -1e300;
    for (double s = 0.0; s <= 0.5 + 1e-12; s += 0.05) {
      const auto r = extract_scattering_length(c.shifted(s), mu);
      CHECK(r.nodes == base.nodes);
      CHECK(r.scattering_length > prev);
      prev = r.scattering_length;
    }
    // bisect on the node count to bracket the pole near s = 0.55
    double lo = 0.5, hi = 0.6;
    REQUIRE(extract_scattering_length(c.shifted(hi), mu).nodes == base.nodes - 1);
    for (int it = 0; it < 12; ++it) {
      const double mid = 0.5 * (lo + hi);
      (extract_scattering_length(c.shifted(mid), mu).nodes == base.nodes ? lo : hi) = mid;
    }
    const auto left = extract_scattering_length(c.shifted(lo), mu);
    const auto right = extract_scattering_length(c.shifted(hi), mu);
    CHECK(left.nodes - right.nodes == 1);
    CHECK(left.scattering_length > 1e4);
    CHECK(right.scattering_length < -1e4);
  }

  SECTION("tuning reaches the targets on the same branch") {
    for (double target : {-6600.0, -185.0, 6600.0}) {
      TuningOptions o;
      o.length_scale = 100.0;
      o.tolerance = 1e-8;
      const auto t = tune_to_scattering_length(c, mu, target, o);
      const auto check = extract_scattering_length(t.curve, mu);
      CHECK_THAT(check.scattering_length, WithinRel(target, 1e-6));
      CHECK(check.nodes == base.nodes);
      CHECK(t.curve.shift() == t.shift);
    }
  }

  SECTION("targets beyond the shift window raise branch_error") {
    TuningOptions o;
    o.window = WallWindow{0.8 * c.r_equilibrium(), 0.85 * c.r_equilibrium()};
    CHECK_THROWS_AS(tune_to_scattering_length(c, mu, 6600.0, o), branch_error);
  }
}
