#include <numbers>

#include "catch_amalgamated.hpp"
#include "latpair/observables.hpp"
#include "support.hpp"

using namespace latpair;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

using Orbitals = std::shared_ptr<const std::vector<Orbital>>;

struct Level {
  SeparatedLatticePolynomial poly;
  Orbitals com, rel;
  std::vector<Configuration> configs;
  std::vector<CIState> states;
};

struct Setup {
  PairParameters pair;
  TrapSpec trap;
  std::shared_ptr<const BSplineBasis> bc, br;
};

Setup rbk_setup(int intervals) {
  const auto rb = find_atom("Rb87"), k = find_atom("K40");
  Setup s;
  s.trap = testing::rbk_trap(40.0, 2);
  s.pair = derive_pair_parameters(rb, k, s.trap);
  const double half = nm_to_bohr(1030.0) / 2;
  s.bc = std::make_shared<const BSplineBasis>(KnotSequence::linear(0.0, half, intervals, 8));
  s.br = std::make_shared<const BSplineBasis>(KnotSequence::linear(0.0, 1.2 * half, intervals, 8));
  return s;
}

Level solve_level(const Setup& s, int order, int orbitals, int l_max) {
  Level L;
  auto trap = s.trap;
  trap.taylor_order = order;
  L.poly = separate_lattice(trap, s.pair);
  const auto com = solve_sectors(com_spec(L.poly, s.pair.total_mass, s.bc, l_max), all_sectors(), {.count = 40});
  const auto rel = solve_sectors(rel_spec(L.poly, s.pair.reduced_mass, s.br, {}, l_max), all_sectors(), {.count = 40});
  L.com = std::make_shared<const std::vector<Orbital>>(select_orbitals(com, orbitals));
  L.rel = std::make_shared<const std::vector<Orbital>>(select_orbitals(rel, orbitals));
  L.configs = build_configurations(*L.com, *L.rel);
  L.states = diagonalize_ci(ci_hamiltonian(L.configs, *L.com, *L.rel, L.poly), L.configs,
                            TagTargets::from_orbitals(*L.com, *L.rel), order);
  return L;
}

double gaussian(double m_omega, double x) {
  return std::pow(m_omega / std::numbers::pi, 0.75) * std::exp(-0.5 * m_omega * x * x);
}

}  // namespace

TEST_CASE("Radial pair densities", "[observables]") {
  const auto s = rbk_setup(20);
  const auto L = solve_level(s, 6, 20, 3);
  const auto psi = PairWavefunction::from_ci(L.states.front(), L.configs, L.com, L.rel, s.pair.mu1, s.pair.mu2);
  const auto grid = density_grid(*s.br, 4001);
  const auto rho = radial_pair_density(psi, grid);
  CHECK_THAT(rho.norm, WithinRel(1.0, 1e-12));
  CHECK_THAT(rho.trapezoid_norm(), WithinRel(1.0, 1e-5));
  // the ground state sits inside the site
  double tail = 0.0, top = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    top = std::max(top, rho.rho[i]);
    if (grid[i] > 0.9 * nm_to_bohr(1030.0) / 2) tail = std::max(tail, rho.rho[i]);
  }
  CHECK(tail < 1e-3 * top);

  SECTION("a single configuration does not depend on the COM orbital") {
    const auto a = radial_pair_density(PairWavefunction::product(L.com, L.rel, 0, 2, s.pair.mu1, s.pair.mu2), grid);
    const auto b = radial_pair_density(PairWavefunction::product(L.com, L.rel, 3, 2, s.pair.mu1, s.pair.mu2), grid);
    for (std::size_t i = 0; i < grid.size(); i += 50) CHECK_THAT(a.rho[i], WithinAbs(b.rho[i], 1e-15 * top));
  }
  SECTION("grids outside the basis are rejected") {
    CHECK_THROWS_AS(radial_pair_density(psi, {-1.0, 10.0}), domain_error);
    CHECK_THROWS_AS(radial_pair_density(psi, {s.br->rmax() * 1.01}), domain_error);
  }
}

TEST_CASE("Difference fields", "[observables]") {
  const auto s = rbk_setup(20);
  const auto L2 = solve_level(s, 2, 20, 3), L6 = solve_level(s, 6, 20, 3);
  const double mu1 = s.pair.mu1, mu2 = s.pair.mu2;
  const auto g = symmetric_grid(4000.0, 31);
  LevelCuts c;
  c.phi2 = evaluate_cut(PairWavefunction::product(L2.com, L2.rel, 0, 0, mu1, mu2), g, g);
  c.phi6 = evaluate_cut(PairWavefunction::product(L6.com, L6.rel, 0, 0, mu1, mu2), g, g);
  c.psi2 = evaluate_cut(PairWavefunction::from_ci(L2.states.front(), L2.configs, L2.com, L2.rel, mu1, mu2), g, g);
  c.psi6 = evaluate_cut(PairWavefunction::from_ci(L6.states.front(), L6.configs, L6.com, L6.rel, mu1, mu2), g, g);

  CHECK(difference(c.psi6, c.psi6, "zero").values.cwiseAbs().maxCoeff() == 0.0);
  const Eigen::MatrixXd sum = absolute_cut(c, DifferenceKind::geom).values + absolute_cut(c, DifferenceKind::coup6).values;
  const Eigen::MatrixXd tot = absolute_cut(c, DifferenceKind::tot).values;
  CHECK((sum - tot).cwiseAbs().maxCoeff() <= 1e-15 * c.phi2.values.cwiseAbs().maxCoeff());
  CHECK(absolute_cut(c, DifferenceKind::coup2).label == "coup2");

  const auto other = evaluate_cut(PairWavefunction::product(L2.com, L2.rel, 0, 0, mu1, mu2), g, symmetric_grid(3000.0, 31));
  CHECK_THROWS_AS(difference(c.phi2, other, "bad"), incompatibility_error);
  CHECK_NOTHROW(require_compatible(PairWavefunction::product(L2.com, L2.rel, 0, 0, mu1, mu2),
                                   PairWavefunction::product(L6.com, L6.rel, 0, 0, mu1, mu2)));
  const auto s2 = rbk_setup(12);
  const auto L12 = solve_level(s2, 2, 4, 1);
  CHECK_THROWS_AS(require_compatible(PairWavefunction::product(L2.com, L2.rel, 0, 0, mu1, mu2),
                                     PairWavefunction::product(L12.com, L12.rel, 0, 0, mu1, mu2)),
                  incompatibility_error);
}

TEST_CASE("Harmonic coupling difference against the two-oscillator solution", "[observables]") {
  // With n = 2 the atoms move independently: the exact ground state is a product
  // of single-atom Gaussians, the uncoupled one a product of COM and REL Gaussians.
  const auto s = rbk_setup(40);
  const auto L = solve_level(s, 2, 84, 6);  // complete shells N <= 6
  const auto rb = find_atom("Rb87"), k = find_atom("K40");
  const double kk = wave_number(1030.0);
  const double w1 = kk * std::sqrt(2 * s.trap.depth[0][0] / rb.mass), w2 = kk * std::sqrt(2 * s.trap.depth[1][0] / k.mass);
  CHECK_THAT(L.states.front().energy, WithinRel(1.5 * (w1 + w2), 1e-9));

  const auto g = symmetric_grid(5000.0, 41);
  const auto phi = evaluate_cut(PairWavefunction::product(L.com, L.rel, 0, 0, s.pair.mu1, s.pair.mu2), g, g);
  const auto psi = evaluate_cut(PairWavefunction::from_ci(L.states.front(), L.configs, L.com, L.rel, s.pair.mu1, s.pair.mu2), g, g);
  const auto d = difference(phi, psi, "coup2");
  const double MW = s.pair.total_mass * *s.pair.omega_com, mw = s.pair.reduced_mass * *s.pair.omega_rel;
  double top = 0.0, err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double x1 = g[i], x2 = g[j];
      const double X = s.pair.mu1 * x1 + s.pair.mu2 * x2, x = x1 - x2;
      const double exact_phi = gaussian(MW, X) * gaussian(mw, x);
      const double exact_psi = gaussian(rb.mass * w1, x1) * gaussian(k.mass * w2, x2);
      top = std::max(top, exact_psi);
      err = std::max(err, std::abs(d.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - (exact_phi - exact_psi)));
    }
  CHECK(err <= 1e-6 * top);
}
