#pragma once

// Shared fixtures for the unit and acceptance suites.

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "latpair/ci.hpp"
#include "latpair/config.hpp"
#include "latpair/quantities.hpp"
#include "latpair/solver.hpp"

namespace latpair::testing {

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::abs(b); }

/// RbK lattice at equal laser intensity: V_K = V_Rb * alpha_K / alpha_Rb.
inline TrapSpec rbk_trap(double rb_depth_er, int order, double wavelength_nm = 1030.0) {
  const auto rb = find_atom("Rb87"), k = find_atom("K40");
  const double intensity = rb_depth_er * recoil_energy(rb.mass, wavelength_nm) / rb.polarizability;
  return TrapSpec::from_intensity(wavelength_nm, intensity, rb, k, order);
}

/// Full RbK benchmark: synthetic short range tuned to a_sc, production basis sizes.
inline RunConfig rbk_benchmark(double rb_depth_er, double a_sc = 6500.0) {
  RunConfig c;
  c.atom1 = find_atom("Rb87");
  c.atom2 = find_atom("K40");
  c.wavelength_nm = 1030.0;
  const auto t = rbk_trap(rb_depth_er, 2, c.wavelength_nm);
  c.depth = {t.depth[0][0], t.depth[1][0]};
  c.interaction = InteractionKind::synthetic;
  c.target_scattering_length = a_sc;
  return c;
}

/// Equal-depth RbK reference setup: lambda = 1000 nm, V1 = V2 = 10 k^2/(2 mu).
inline RunConfig rbk_table2() {
  RunConfig c = rbk_benchmark(40.0);
  c.wavelength_nm = 1000.0;
  const double mu = c.atom1.mass * c.atom2.mass / (c.atom1.mass + c.atom2.mass);
  const double k = wave_number(c.wavelength_nm);
  c.depth = {10.0 * k * k / (2.0 * mu), 10.0 * k * k / (2.0 * mu)};
  return c;
}

/// Lowest eigenvalues of -1/(2m) d^2/dx^2 + V sum_p t_p (k x)^(2p) on (-L, L) with
/// hard walls: dense finite differences, eighth-order central stencil, N interior points.
inline std::vector<double> fd_lattice_1d(double mass, double depth, double k, double half_width, int order, int n,
                                         int count) {
  const double h = 2.0 * half_width / (n + 1);
  const double c[5] = {-205.0 / 72, 8.0 / 5, -1.0 / 5, 8.0 / 315, -1.0 / 560};
  // Taylor coefficients of sin^2 written out: 1, -1/3, 2/45
  const double t[3] = {1.0, -1.0 / 3.0, 2.0 / 45.0};
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double u = k * (-half_width + (i + 1) * h);
    double v = 0.0;
    for (int p = 1; 2 * p <= order; ++p) v += t[p - 1] * std::pow(u, 2 * p);
    H(i, i) = -c[0] / (2 * mass * h * h) + depth * v;
    for (int d = 1; d <= 4 && i + d < n; ++d) H(i, i + d) = H(i + d, i) = -c[d] / (2 * mass * h * h);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().data(), es.eigenvalues().data() + count};
}

/// Single atom of the given mass in a cubic lattice of Taylor order n, as solver input.
inline HamiltonianSpec single_atom_lattice(double mass, double depth, double k, int order,
                                           std::shared_ptr<const BSplineBasis> basis, int l_max) {
  HamiltonianSpec s;
  s.kind = MotionKind::com;
  s.mass = mass;
  s.basis = std::move(basis);
  s.l_max = l_max;
  for (int c = 0; c < 3; ++c)
    for (int p = 1; 2 * p <= order; ++p) s.lattice[c].push_back({2 * p, depth * sin2_taylor(p) * std::pow(k, 2 * p)});
  return s;
}

/// psi(x, y, z) = sum_ch u_ch(r)/r Y_ch(r^) of one orbital.
inline double orbital_value(const Orbital& o, double x, double y, double z) {
  const double r = std::sqrt(x * x + y * y + z * z);
  if (r <= o.basis->rmin() || r >= o.basis->rmax()) return 0.0;
  double s = 0.0;
  for (int ch = 0; ch < static_cast<int>(o.channels.size()); ++ch)
    s += o.radial(ch, r) / r * real_ylm(o.channels[ch], x, y, z);
  return s;
}

inline constexpr int toy_com_intervals = 12, toy_rel_intervals = 14;

// Small heteronuclear sextic problem with a handful of orbitals per motion.
struct ToyProblem {
  PairParameters pair;
  SeparatedLatticePolynomial poly;
  std::vector<Orbital> com, rel;
};

inline ToyProblem make_toy(int order, int l_max = 2) {
  const auto rb = find_atom("Rb87"), k = find_atom("K40");
  const auto trap = rbk_trap(40.0, order);
  ToyProblem t;
  t.pair = derive_pair_parameters(rb, k, trap);
  t.poly = separate_lattice(trap, t.pair);
  const double half = nm_to_bohr(1030.0) / 2.0;
  auto bc = std::make_shared<const BSplineBasis>(KnotSequence::linear(0.0, half, toy_com_intervals, 6));
  auto br = std::make_shared<const BSplineBasis>(KnotSequence::linear(0.0, 1.2 * half, toy_rel_intervals, 6));
  const auto com = solve_sectors(com_spec(t.poly, t.pair.total_mass, bc, l_max), all_sectors(), {.count = 2});
  const auto rel = solve_sectors(rel_spec(t.poly, t.pair.reduced_mass, br, {}, l_max), all_sectors(), {.count = 2});
  t.com = select_orbitals(com, 4);
  t.rel = select_orbitals(rel, 5);
  return t;
}

// Direct 3D quadrature grid: Gauss-Legendre panels aligned with the (uniform)
// knot intervals times a Gauss-Legendre x uniform-phi sphere grid.
struct QuadratureGrid {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;

  QuadratureGrid(const BSplineBasis& B, int intervals) {
    const auto gr = gauss_legendre(12), gt = gauss_legendre(12);
    const int nphi = 24;
    for (int p = 0; p < intervals; ++p) {
      const double r0 = B.rmin() + (B.rmax() - B.rmin()) * p / intervals;
      const double r1 = B.rmin() + (B.rmax() - B.rmin()) * (p + 1) / intervals;
      for (int i = 0; i < gr.points(); ++i) {
        const double r = 0.5 * (r0 + r1) + 0.5 * (r1 - r0) * gr.nodes[i];
        const double wr = 0.5 * (r1 - r0) * gr.weights[i] * r * r;
        for (int j = 0; j < gt.points(); ++j) {
          const double ct = gt.nodes[j], st = std::sqrt(1 - ct * ct);
          for (int m = 0; m < nphi; ++m) {
            const double phi = 2 * std::numbers::pi * (m + 0.25) / nphi;
            points.push_back({r * st * std::cos(phi), r * st * std::sin(phi), r * ct});
            weights.push_back(wr * gt.weights[j] * 2 * std::numbers::pi / nphi);
          }
        }
      }
    }
  }

  std::vector<double> sample(const Orbital& o) const {
    std::vector<double> v(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
      v[i] = orbital_value(o, points[i][0], points[i][1], points[i][2]);
    return v;
  }

  /// table[axis][q](i, j) = <i| c^q |j> over the sampled orbitals, q = 1..5.
  std::array<std::array<Eigen::MatrixXd, 6>, 3> moments(const std::vector<Orbital>& orbs) const {
    std::vector<std::vector<double>> f;
    for (const auto& o : orbs) f.push_back(sample(o));
    const auto n = static_cast<Eigen::Index>(orbs.size());
    std::array<std::array<Eigen::MatrixXd, 6>, 3> t;
    for (int axis = 0; axis < 3; ++axis)
      for (int q = 1; q <= 5; ++q) {
        t[axis][q] = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
          for (Eigen::Index j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < points.size(); ++k)
              s += weights[k] * f[i][k] * std::pow(points[k][axis], q) * f[j][k];
            t[axis][q](i, j) = s;
          }
      }
    return t;
  }
};


/// W between configurations from one-body moments computed by quadrature:
/// W_kk' = sum_c sum_(a,b) w <i|X_c^a|i'> <j|x_c^b|j'>.
inline Eigen::MatrixXd coupling_oracle(const ToyProblem& t, const std::vector<Configuration>& configs) {
  const QuadratureGrid gc(*t.com.front().basis, toy_com_intervals), gr(*t.rel.front().basis, toy_rel_intervals);
  const auto Xm = gc.moments(t.com), xm = gr.moments(t.rel);
  const auto n = static_cast<Eigen::Index>(configs.size());
  Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(n, n);
  for (int c = 0; c < 3; ++c)
    for (const auto& [a, b, w] : t.poly.axes[c].coupling)
      for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index kp = 0; kp < n; ++kp)
          oracle(k, kp) += w * Xm[c][a](configs[k].com, configs[kp].com) * xm[c][b](configs[k].rel, configs[kp].rel);
  return oracle;
}

}  // namespace latpair::testing
