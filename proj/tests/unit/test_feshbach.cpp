#include <numbers>
#include <sstream>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "catch_amalgamated.hpp"
#include "latpair/feshbach.hpp"
#include "support.hpp"

using namespace latpair;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const FeshbachParams truth{546.66, -3.0, -185.0};

// Smooth stand-in for solved lb/1ti energies: the 1ti energy rises with a,
// the lb energy drops towards a -> 0+.
CurveFamily toy_family() {
  const double L = 1000.0, pi = std::numbers::pi;
  std::vector<LevelSample> s;
  for (int i = 0; i <= 200; ++i) {
    const double t = -0.5 * pi + 0.005 + (pi - 0.01) * i / 200.0;
    const double a = L * std::tan(t);
    s.push_back({a, -4e-9 * (0.5 * pi - t) * (0.5 * pi - t), 1e-9 * (t + 0.3 * std::sin(t))});
  }
  return CurveFamily(s, L);
}

std::vector<ExperimentalPoint> synthetic_data(const CurveFamily& f, const FeshbachParams& p) {
  const std::vector<std::pair<double, Branch>> at{{545.5, Branch::RM},  {546.0, Branch::RM},  {546.4, Branch::RM},
                                                  {545.5, Branch::RIP}, {546.2, Branch::RIP}, {547.0, Branch::CIM},
                                                  {547.5, Branch::CIM}};
  std::vector<ExperimentalPoint> d;
  for (const auto& [B, br] : at) d.push_back({B, model_binding_khz(f, p, B, br), br, std::nullopt});
  return d;
}

}  // namespace

TEST_CASE("Two-channel field map", "[feshbach]") {
  const FeshbachParams p{546.8, -3.0, -185.0};
  CHECK_THAT(a_of_B(p, 546.0), WithinRel(508.75, 1e-12));
  CHECK(a_of_B(p, p.B0 + p.dB) == 0.0);
  CHECK_THAT(B_of_a(p, 1e12), WithinAbs(p.B0, 1e-6));
  CHECK_THAT(B_of_a(p, -1e12), WithinAbs(p.B0, 1e-6));
  for (double B : {540.0, 543.9, 545.2, 546.79, 546.81, 550.0, 600.0})
    CHECK_THAT(B_of_a(p, a_of_B(p, B)), WithinRel(B, 1e-12));
  // away from the resonance pole (|a| large means B close to B0), on the scale of a_bg
  for (double a : {-1e4, -3000.0, -186.0, -184.0, 0.5, 900.0, 1e4})
    CHECK_THAT(a_of_B(p, B_of_a(p, a)), WithinAbs(a, 1e-12 * std::max(std::abs(a), std::abs(p.abg))));
  CHECK_THROWS_AS(a_of_B(p, p.B0), pole_error);
  CHECK_THROWS_AS(B_of_a(p, p.abg), pole_error);
  CHECK_THROWS_AS(a_of_B(FeshbachParams{546.8, 0.0, -185.0}, 540.0), domain_error);
  CHECK_THROWS_AS(a_of_B(FeshbachParams{546.8, -3.0, 0.0}, 540.0), domain_error);
}

TEST_CASE("Energy-dependent scattering length", "[feshbach]") {
  const double a_ho = 1922.0;
  SECTION("Gamma ratio against a 50-digit oracle") {
    using boost::multiprecision::cpp_bin_float_50;
    const cpp_bin_float_50 ratio = boost::multiprecision::tgamma(cpp_bin_float_50(-0.25)) /
                                   boost::multiprecision::tgamma(cpp_bin_float_50(-0.75));
    const double expected = a_ho / (2.0 * static_cast<double>(ratio));
    CHECK_THAT(energy_dependent_asc(2.0, a_ho), WithinRel(expected, 1e-10));
  }
  SECTION("pole structure") {
    CHECK(energy_dependent_asc(1.5, a_ho) == 0.0);
    CHECK(energy_dependent_asc(3.5, a_ho) == 0.0);
    CHECK_THROWS_AS(energy_dependent_asc(2.5, a_ho), pole_error);
    CHECK_THROWS_AS(energy_dependent_asc(0.5, a_ho), pole_error);
  }
  SECTION("strictly increasing inside each window, invertible") {
    for (int level : {0, 1, 2}) {
      auto [lo, hi] = gamma_window(level);
      if (!std::isfinite(lo)) lo = hi - 6.0;
      double prev = -std::numeric_limits<double>::infinity();
      for (int i = 1; i < 200; ++i) {
        const double e = lo + (hi - lo) * i / 200.0;
        const double a = energy_dependent_asc(e, a_ho);
        CHECK(a > prev);
        prev = a;
        CHECK_THAT(energy_from_asc(a, a_ho, level), WithinAbs(e, 1e-9));
      }
    }
    CHECK_THROWS_AS(gamma_window(-1), domain_error);
  }
}

TEST_CASE("Curve family and binding energies", "[feshbach]") {
  const auto f = toy_family();
  CHECK_THROWS_AS(f.energy(Branch::CIM, 100.0), domain_error);
  CHECK_THROWS_AS(f.energy(Branch::RIP, -100.0), domain_error);
  CHECK_THROWS_AS(CurveFamily({{1.0, 0, 0}, {2.0, 0, 0}}, 1.0), domain_error);

  const auto& s = f.samples();
  CHECK_THROWS_AS(binding_energy_curve(s, std::nullopt, truth), anchor_error);
  const double anchor = f.ti_energy(truth.abg);
  const auto c = binding_energy_curve(s, anchor, truth);
  // branch labels follow the sign of a and the feeding state
  for (const auto& p : c.points) {
    if (p.branch == Branch::CIM) CHECK(p.a < 0);
    if (p.branch != Branch::CIM) CHECK(p.a >= 0);
    CHECK_THAT(p.B, WithinRel(B_of_a(truth, p.a), 1e-14));
  }
  // the 1ti curve passes through zero at a_bg
  CHECK_THAT(anchor - f.ti_energy(truth.abg), WithinAbs(0.0, 1e-25));
  // far above the resonance a -> a_bg and the binding energy goes to zero
  CHECK(std::abs(model_binding_khz(f, truth, 1e9, Branch::CIM)) < 1e-5);
  CHECK(std::abs(model_binding_khz(f, truth, 1e9, Branch::CIM)) < 1e-4 * std::abs(model_binding_khz(f, truth, 600.0, Branch::CIM)));

  SECTION("B0 shifts along B, a_bg along energy") {
    FeshbachParams moved = truth;
    moved.B0 += 0.3;
    for (double B : {545.0, 546.0, 546.5})
      CHECK_THAT(model_binding_khz(f, moved, B + 0.3, Branch::RIP),
                 WithinRel(model_binding_khz(f, truth, B, Branch::RIP), 1e-12));
    FeshbachParams other = truth;
    other.abg = -150.0;
    std::vector<double> shift;
    for (double a : {200.0, 800.0, 5000.0})
      shift.push_back(model_binding_khz(f, other, B_of_a(other, a), Branch::RIP) -
                      model_binding_khz(f, truth, B_of_a(truth, a), Branch::RIP));
    CHECK(std::abs(shift[0]) > 1e-3);
    CHECK_THAT(shift[1], WithinRel(shift[0], 1e-10));
    CHECK_THAT(shift[2], WithinRel(shift[0], 1e-10));
  }
}

TEST_CASE("Experimental CSV input", "[feshbach]") {
  std::istringstream good("B_gauss,E_b_kHz,branch,sigma\n# digitized\n546.1, 12.5, RM\n\n547.0,-3.1,CIM,0.2  # note\n");
  const auto d = read_experimental_csv(good, "mem");
  REQUIRE(d.size() == 2);
  CHECK(d[0].B == 546.1);
  CHECK(d[0].branch == Branch::RM);
  CHECK_FALSE(d[0].sigma);
  CHECK(d[1].sigma == 0.2);
  std::istringstream bad("546.1,12.5,RM\n546.2,11.0,RM\n546.3,abc,RM\n");
  CHECK_THROWS_WITH(read_experimental_csv(bad, "bad.csv"), ContainsSubstring("bad.csv:3"));
  std::istringstream label("546.1,12.5,XYZ\n546.2,11.0,RM\n");
  std::istringstream label2("546.2,11.0,RM\n546.1,12.5,XYZ\n");
  CHECK_NOTHROW(read_experimental_csv(label));  // first line treated as header
  CHECK_THROWS_AS(read_experimental_csv(label2), domain_error);
  CHECK_THROWS_AS(read_experimental_csv(std::string("/nonexistent/data.csv")), domain_error);
}

TEST_CASE("Resonance fit", "[feshbach]") {
  const auto f = toy_family();
  const auto data = synthetic_data(f, truth);
  FeshbachParams start = truth;
  start.B0 = 546.8;

  const auto r = fit_resonance(f, data, start);
  CHECK_THAT(r.params.B0, WithinAbs(truth.B0, 1e-4));
  CHECK(r.params.dB == truth.dB);
  REQUIRE(r.deltas.size() == data.size());
  for (double d : r.deltas) CHECK(d < 1e-4);
  CHECK(r.covariance.rows() == 1);

  SECTION("a perturbed parameter set fits worse") {
    const FeshbachParams off{truth.B0 + 0.009, -2.92, truth.abg};
    CHECK(fit_objective(f, off, data) > r.objective);
  }
  SECTION("two free parameters") {
    FitOptions o;
    o.free = {FitParameter::B0, FitParameter::dB};
    start.dB = -2.8;
    const auto r2 = fit_resonance(f, data, start, o);
    CHECK_THAT(r2.params.B0, WithinAbs(truth.B0, 1e-4));
    CHECK_THAT(r2.params.dB, WithinAbs(truth.dB, 1e-4));
    CHECK(r2.covariance.rows() == 2);
  }
  SECTION("failures") {
    FitOptions none;
    none.free = {};
    CHECK_THROWS_AS(fit_resonance(f, data, start, none), fit_error);
    CHECK_THROWS_AS(fit_resonance(f, {}, start), fit_error);
    FeshbachParams far = truth;
    far.B0 = 545.5;  // box 545..546 does not contain the optimum
    CHECK_THROWS_AS(fit_resonance(f, data, far), fit_error);
    CHECK_THROWS_AS(parse_fit_parameter("gamma"), domain_error);
  }
}
