#include "catch_amalgamated.hpp"
#include "support.hpp"

using namespace latpair;
using Catch::Matchers::WithinRel;

TEST_CASE("RbK mean trap frequencies at equal intensity", "[quantities]") {
  const auto rb = find_atom("Rb87"), k = find_atom("K40");
  const auto p40 = derive_pair_parameters(rb, k, testing::rbk_trap(40.0, 2));
  const auto p27 = derive_pair_parameters(rb, k, testing::rbk_trap(27.5, 2));
  CHECK_THAT(p40.omega_rel_khz(), WithinRel(35.7, 0.005));
  CHECK_THAT(1.5 * (p40.omega_rel_khz() + p40.omega_com_khz()), WithinRel(100.65, 0.001));
  // 27.5 / 40 of the depth scales the frequency by 0.829, i.e. 29.6 kHz
  CHECK_THAT(p27.omega_rel_khz() / p40.omega_rel_khz(), WithinRel(std::sqrt(27.5 / 40.0), 1e-12));
}

// The quoted 30 kHz is not consistent with 35.7 kHz at 40 E_r under sqrt(depth)
// scaling; this reports the 1.4 % gap instead of widening the tolerance.
TEST_CASE("RbK mean trap frequency at 27.5 E_r", "[quantities][!mayfail]") {
  const auto p27 = derive_pair_parameters(find_atom("Rb87"), find_atom("K40"), testing::rbk_trap(27.5, 2));
  CHECK_THAT(p27.omega_rel_khz(), WithinRel(30.0, 0.005));
}

TEST_CASE("Intensity model scales depths by polarizability", "[quantities]") {
  const auto rb = find_atom("Rb87"), k = find_atom("K40");
  const auto t = testing::rbk_trap(40.0, 6);
  const double er = recoil_energy(rb.mass, 1030.0);
  CHECK_THAT(t.depth[0][0] / er, WithinRel(40.0, 1e-14));
  CHECK_THAT(t.depth[1][2] / t.depth[0][2], WithinRel(k.polarizability / rb.polarizability, 1e-14));
  CHECK(t.taylor_order == 6);
  CHECK(t.isotropic());
}

TEST_CASE("Frequencies scale as the square root of the depth", "[quantities]") {
  const auto rb = find_atom("Rb87"), k = find_atom("K40");
  const auto a = derive_pair_parameters(rb, k, TrapSpec::cubic(1030.0, 1e-10, 2e-10, 2));
  const auto b = derive_pair_parameters(rb, k, TrapSpec::cubic(1030.0, 4e-10, 8e-10, 2));
  CHECK_THAT(*b.omega_rel / *a.omega_rel, WithinRel(2.0, 1e-13));
  CHECK_THAT(*b.omega_com / *a.omega_com, WithinRel(2.0, 1e-13));
}

TEST_CASE("Homonuclear equal depths give equal COM and REL frequencies", "[quantities]") {
  const auto rb = find_atom("Rb87");
  const auto p = derive_pair_parameters(rb, rb, TrapSpec::cubic(1064.0, 3e-10, 3e-10, 2));
  CHECK_THAT(*p.omega_rel, WithinRel(*p.omega_com, 1e-14));
  // single-atom harmonic frequency k sqrt(2 V / m)
  CHECK_THAT(*p.omega_rel, WithinRel(wave_number(1064.0) * std::sqrt(2.0 * 3e-10 / rb.mass), 1e-14));
}

TEST_CASE("Mass fractions and reduced mass", "[quantities]") {
  const auto rb = find_atom("Rb87"), k = find_atom("K40");
  const auto p = derive_pair_parameters(rb, k, testing::rbk_trap(40.0, 2));
  CHECK_THAT(p.mu1 + p.mu2, WithinRel(1.0, 1e-15));
  CHECK_THAT(p.reduced_mass, WithinRel(rb.mass * k.mass / (rb.mass + k.mass), 1e-15));
  CHECK_THAT(p.mu1, WithinRel(rb.mass / p.total_mass, 1e-15));
}

TEST_CASE("Unit conversions", "[quantities]") {
  CHECK_THAT(hartree_to_khz(1.0), WithinRel(6.579683920502e12, 1e-12));
  CHECK_THAT(khz_to_hartree(hartree_to_khz(0.37)), WithinRel(0.37, 1e-15));
  CHECK_THAT(nm_to_bohr(1030.0), WithinRel(1030.0 / 0.0529177210903, 1e-13));
  const auto rb = find_atom("Rb87");
  const double er = recoil_energy(rb.mass, 1030.0);
  // E_r(Rb, 1030 nm)/h is about 2.16 kHz
  CHECK_THAT(hartree_to_khz(er), WithinRel(2.16, 0.01));
  CHECK_THAT(convert(40.0, Unit::recoil, Unit::hartree, er), WithinRel(40.0 * er, 1e-15));
  CHECK_THAT(convert(1.0, Unit::tesla, Unit::gauss), WithinRel(1e4, 1e-14));
  CHECK_THROWS_AS(convert(1.0, Unit::recoil, Unit::hartree), domain_error);
  CHECK_THROWS_AS(convert(1.0, Unit::bohr, Unit::hartree), domain_error);
  CHECK_THROWS_AS(parse_unit("furlong"), domain_error);
}

TEST_CASE("Interaction strength for the intermediate-depth setup", "[quantities]") {
  const auto cfg = testing::rbk_table2();
  const auto p = derive_pair_parameters(cfg.atom1, cfg.atom2, cfg.trap(2), 6500.0);
  CHECK_THAT(p.xi().value(), WithinRel(3.34, 0.01));
}

TEST_CASE("Invalid species and traps are rejected", "[quantities]") {
  const auto rb = find_atom("Rb87");
  AtomSpecies bad = rb;
  bad.mass = 0.0;
  CHECK_THROWS_AS(derive_pair_parameters(bad, rb, TrapSpec::cubic(1030.0, 1e-10, 1e-10, 2)), domain_error);
  bad.mass = -1.0;
  CHECK_THROWS_AS(bad.validate(), domain_error);
  CHECK_THROWS_AS(find_atom("Xx1"), domain_error);
  CHECK_THROWS_AS(derive_pair_parameters(rb, rb, TrapSpec::cubic(1030.0, 1e-10, 1e-10, 3)), domain_error);
  const auto p = derive_pair_parameters(rb, rb, TrapSpec::cubic(1030.0, 1e-10, 1e-10, 2));
  CHECK_FALSE(p.xi().has_value());
}
