#pragma once

// Galerkin solution of the uncoupled COM and REL problems on a basis of
// B splines (reduced radial functions u = r R) times real spherical harmonics,
// one per-axis parity sector at a time.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "latpair/angular.hpp"
#include "latpair/basis.hpp"
#include "latpair/errors.hpp"
#include "latpair/potentials.hpp"

namespace latpair {

enum class MotionKind { com, rel };

inline const char* to_string(MotionKind k) { return k == MotionKind::com ? "COM" : "REL"; }

/// Single-coordinate polynomial per axis: sum of coefficient * c^power.
using AxisTerms = std::array<std::vector<std::pair<int, double>>, 3>;

struct HamiltonianSpec {
  MotionKind kind = MotionKind::rel;
  double mass = 0.0;  // M for COM, mu for REL
  std::shared_ptr<const BSplineBasis> basis;
  AxisTerms lattice;
  std::function<double(double)> interaction;  // REL only; empty means non-interacting
  int l_max = 3;
  bool angular_coupling = true;  // off: keep only the l-diagonal blocks of the lattice

  void validate() const {
    if (!(mass > 0.0)) throw domain_error("Hamiltonian: mass must be positive");
    if (!basis) throw domain_error("Hamiltonian: no radial basis");
    if (l_max < 0) throw domain_error("Hamiltonian: l_max must be non-negative");
    if (kind == MotionKind::com && interaction)
      throw domain_error("Hamiltonian: the COM problem carries no interaction potential");
    for (const auto& ax : lattice)
      for (const auto& [q, c] : ax)
        if (q < 0 || q > max_monomial_power)
          throw domain_error("Hamiltonian: lattice power " + std::to_string(q) + " outside the angular tables");
  }
};

inline HamiltonianSpec com_spec(const SeparatedLatticePolynomial& poly, double total_mass,
                                std::shared_ptr<const BSplineBasis> basis, int l_max = 3) {
  HamiltonianSpec s;
  s.kind = MotionKind::com;
  s.mass = total_mass;
  s.basis = std::move(basis);
  s.l_max = l_max;
  for (int c = 0; c < 3; ++c) s.lattice[c] = poly.axes[c].com;
  return s;
}

inline HamiltonianSpec rel_spec(const SeparatedLatticePolynomial& poly, double reduced_mass,
                                std::shared_ptr<const BSplineBasis> basis,
                                std::function<double(double)> interaction, int l_max = 3) {
  HamiltonianSpec s;
  s.kind = MotionKind::rel;
  s.mass = reduced_mass;
  s.basis = std::move(basis);
  s.l_max = l_max;
  s.interaction = std::move(interaction);
  for (int c = 0; c < 3; ++c) s.lattice[c] = poly.axes[c].rel;
  return s;
}

/// Channels (l <= l_max) of one per-axis parity sector.
inline std::vector<AngularChannel> sector_channels(int l_max, const ParityLabel& sector) {
  std::vector<AngularChannel> out;
  for (const auto& ch : channels_up_to(l_max))
    if (parity_of(ch) == sector) out.push_back(ch);
  return out;
}

struct AssembledProblem {
  Eigen::MatrixXd H, S;
  std::vector<AngularChannel> channels;
  ParityLabel sector;
  int nspline = 0;
};

/// Galerkin matrices of one parity sector. Blocks are ordered channel-major.
inline AssembledProblem assemble(const HamiltonianSpec& spec, const ParityLabel& sector) {
  spec.validate();
  const auto& B = *spec.basis;
  AssembledProblem p;
  p.sector = sector;
  p.channels = sector_channels(spec.l_max, sector);
  p.nspline = B.size();
  const int n = B.size();
  const int nch = static_cast<int>(p.channels.size());
  p.H = Eigen::MatrixXd::Zero(n * nch, n * nch);
  p.S = Eigen::MatrixXd::Zero(n * nch, n * nch);
  if (nch == 0) return p;

  const Eigen::MatrixXd S = B.overlap();
  const Eigen::MatrixXd K = B.stiffness() / (2.0 * spec.mass);
  const Eigen::MatrixXd C = B.radial_matrix([](double r) { return 1.0 / (r * r); }) / (2.0 * spec.mass);
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(n, n);
  if (spec.interaction) V = B.radial_matrix(spec.interaction);

  // lattice: per power q, radial r^q times the axis-summed angular matrix
  std::map<int, Eigen::MatrixXd> angular;
  for (int c = 0; c < 3; ++c)
    for (const auto& [q, coef] : spec.lattice[c]) {
      Eigen::MatrixXd a = coef * angular_matrix(static_cast<Axis>(c), q, p.channels, p.channels);
      auto it = angular.find(q);
      if (it == angular.end())
        angular.emplace(q, std::move(a));
      else
        it->second += a;
    }
  std::map<int, Eigen::MatrixXd> radial;
  for (const auto& [q, a] : angular) {
    const int qq = q;
    radial.emplace(q, B.radial_matrix([qq](double r) { return std::pow(r, qq); }));
  }

  for (int a = 0; a < nch; ++a) {
    const int l = p.channels[a].l;
    p.S.block(a * n, a * n, n, n) = S;
    p.H.block(a * n, a * n, n, n) = K + (l * (l + 1.0)) * C + V;
    for (int b = 0; b < nch; ++b) {
      if (!spec.angular_coupling && p.channels[a].l != p.channels[b].l) continue;
      for (const auto& [q, ang] : angular) {
        const double w = ang(a, b);
        if (w != 0.0) p.H.block(a * n, b * n, n, n) += w * radial.at(q);
      }
    }
  }
  p.H = 0.5 * (p.H + p.H.transpose()).eval();
  return p;
}

struct Orbital {
  double energy = 0.0;
  MotionKind kind = MotionKind::rel;
  ParityLabel parity;
  std::vector<AngularChannel> channels;
  Eigen::VectorXd coefficients;  // channel-major blocks of basis->size()
  std::shared_ptr<const BSplineBasis> basis;
  int dominant_channel = 0;       // index into channels
  double dominant_weight = 0.0;   // overlap-weighted share of that channel
  int nodes = 0;                  // radial nodes of the dominant channel
  double norm = 1.0;              // c^T S c
  double residual = 0.0;          // ||H c - e S c|| / ||c||
  std::string tag;                // "lb", "1ti" or empty

  int nspline() const { return basis->size(); }
  Eigen::VectorXd channel_coefficients(int ch) const {
    return coefficients.segment(static_cast<Eigen::Index>(ch) * nspline(), nspline());
  }
  /// Reduced radial function u_ch(r) of channel index ch.
  double radial(int ch, double r, int d = 0) const {
    return basis->expand(coefficients.data() + static_cast<std::ptrdiff_t>(ch) * nspline(), r, d);
  }
  const AngularChannel& dominant() const { return channels.at(dominant_channel); }
};

struct EigensolveOptions {
  int count = -1;                  // number of lowest pairs kept (-1: all)
  double residual_tolerance = 1e-9;  // relative to ||H||
  double node_hysteresis = 1e-8;   // relative to max |u| of the dominant channel
};

/// Sign changes of u over the samples, ignoring |u| <= threshold.
inline int count_nodes(const std::vector<double>& u, double relative_threshold) {
  double umax = 0.0;
  for (double x : u) umax = std::max(umax, std::abs(x));
  const double thr = relative_threshold * umax;
  int nodes = 0, last = 0;
  for (double x : u) {
    if (std::abs(x) <= thr) continue;
    const int s = x > 0 ? 1 : -1;
    if (last != 0 && s != last) ++nodes;
    last = s;
  }
  return nodes;
}

inline int radial_nodes(const Orbital& o, int ch, double relative_threshold) {
  const auto& B = *o.basis;
  std::vector<double> u;
  u.reserve(B.nodes().size());
  const double* c = o.coefficients.data() + static_cast<std::ptrdiff_t>(ch) * o.nspline();
  const int n = B.size();
  for (const auto& node : B.nodes()) {
    double s = 0.0;
    for (int a = 0; a < B.order(); ++a) {
      const int i = node.first + a - 1;
      if (i >= 0 && i < n) s += c[i] * node.value[a];
    }
    u.push_back(s);
  }
  return count_nodes(u, relative_threshold);
}

/// Generalized symmetric-definite eigenpairs of an assembled sector, ascending.
inline std::vector<Orbital> eigensolve(const AssembledProblem& p, const HamiltonianSpec& spec,
                                       const EigensolveOptions& opt = {}) {
  const Eigen::Index dim = p.H.rows();
  if (p.S.rows() != dim || p.H.cols() != dim) throw domain_error("eigensolve: matrix dimensions disagree");
  if (dim == 0) return {};
  const int count = opt.count < 0 ? static_cast<int>(dim) : std::min<int>(opt.count, static_cast<int>(dim));
  // Jacobi scaling keeps the Cholesky factor of the B-spline Gram matrix well conditioned
  const Eigen::VectorXd d = p.S.diagonal().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd Hs = d.asDiagonal() * p.H * d.asDiagonal();
  const Eigen::MatrixXd Ss = d.asDiagonal() * p.S * d.asDiagonal();
  Eigen::LLT<Eigen::MatrixXd> llt(Ss);
  if (llt.info() != Eigen::Success) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Ss);
    std::ostringstream os;
    os << "overlap matrix is not positive definite (smallest pivot " << ldlt.vectorD().minCoeff() << ")";
    throw conditioning_error(os.str());
  }
  const Eigen::MatrixXd L = llt.matrixL();
  Eigen::MatrixXd A = llt.matrixL().solve(Hs);
  A = llt.matrixL().solve(A.transpose()).transpose();
  A = 0.5 * (A + A.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) throw conditioning_error("symmetric eigensolver did not converge");
  const double hnorm = p.H.cwiseAbs().rowwise().sum().maxCoeff();
  const int nch = static_cast<int>(p.channels.size());
  const int n = p.nspline;
  const Eigen::MatrixXd Sblock = spec.basis->overlap();
  std::vector<Orbital> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    Eigen::VectorXd y = es.eigenvectors().col(k);
    Eigen::VectorXd c = d.asDiagonal() * Eigen::VectorXd(L.transpose().triangularView<Eigen::Upper>().solve(y));
    Orbital o;
    o.energy = es.eigenvalues()(k);
    o.kind = spec.kind;
    o.parity = p.sector;
    o.channels = p.channels;
    o.basis = spec.basis;
    o.norm = c.dot(p.S * c);
    c /= std::sqrt(o.norm);
    o.norm = 1.0;
    o.residual = (p.H * c - o.energy * (p.S * c)).norm() / c.norm();
    if (!(o.residual <= opt.residual_tolerance * hnorm)) {
      std::ostringstream os;
      os << "eigenpair " << k << " residual " << o.residual << " exceeds " << opt.residual_tolerance << " * ||H||";
      throw conditioning_error(os.str());
    }
    double best = -1.0;
    for (int a = 0; a < nch; ++a) {
      const Eigen::VectorXd ca = c.segment(static_cast<Eigen::Index>(a) * n, n);
      const double w = ca.dot(Sblock * ca);
      if (w > best) best = w, o.dominant_channel = a;
    }
    o.dominant_weight = best;
    // put the largest lobe of the dominant channel positive (deterministic phase)
    {
      const Eigen::VectorXd ca = c.segment(static_cast<Eigen::Index>(o.dominant_channel) * n, n);
      Eigen::Index imax;
      ca.cwiseAbs().maxCoeff(&imax);
      if (ca(imax) < 0) c = -c;
    }
    o.coefficients = std::move(c);
    o.nodes = radial_nodes(o, o.dominant_channel, opt.node_hysteresis);
    out.push_back(std::move(o));
  }
  return out;
}

/// Solves the given parity sectors and returns all orbitals sorted by energy.
inline std::vector<Orbital> solve_sectors(const HamiltonianSpec& spec, const std::vector<ParityLabel>& sectors,
                                          const EigensolveOptions& opt = {}) {
  std::vector<Orbital> all;
  for (const auto& s : sectors) {
    const auto p = assemble(spec, s);
    if (p.channels.empty()) continue;
    auto orbs = eigensolve(p, spec, opt);
    for (auto& o : orbs) all.push_back(std::move(o));
  }
  std::stable_sort(all.begin(), all.end(), [](const Orbital& a, const Orbital& b) { return a.energy < b.energy; });
  return all;
}

inline std::vector<ParityLabel> all_sectors() {
  std::vector<ParityLabel> s;
  for (int i = 0; i < 8; ++i) s.push_back(ParityLabel::from_index(i));
  return s;
}

struct Classification {
  int bound_count = 0;  // trap-free s-wave bound states
  int lb = -1;          // indices into the orbital list
  int ti = -1;
};

/// Tags the least-bound (N_b - 1 nodes) and first trap-induced (N_b nodes)
/// s-dominant states of the totally symmetric sector.
inline Classification classify(std::vector<Orbital>& orbitals, int trap_free_bound_count) {
  if (trap_free_bound_count < 1) throw classification_error("classification needs at least one bound state");
  Classification c;
  c.bound_count = trap_free_bound_count;
  for (auto& o : orbitals)
    if (o.tag == "lb" || o.tag == "1ti") o.tag.clear();
  std::vector<int> candidates;
  for (int i = 0; i < static_cast<int>(orbitals.size()); ++i) {
    const auto& o = orbitals[i];
    if (o.kind == MotionKind::rel && o.parity.even() && o.dominant().l == 0) candidates.push_back(i);
  }
  for (int i : candidates) {
    const auto& o = orbitals[i];
    if (o.nodes == trap_free_bound_count - 1 && (c.lb < 0 || o.energy > orbitals[c.lb].energy)) c.lb = i;
  }
  for (int i : candidates) {
    const auto& o = orbitals[i];
    if (o.nodes == trap_free_bound_count && (c.lb < 0 || o.energy > orbitals[c.lb].energy) &&
        (c.ti < 0 || o.energy < orbitals[c.ti].energy))
      c.ti = i;
  }
  if (c.lb < 0 || c.ti < 0) {
    std::ostringstream os;
    os << "cannot identify lb/1ti with N_b = " << trap_free_bound_count << "; s-dominant (+++) states:\n";
    for (int i : candidates)
      os << "  E = " << orbitals[i].energy << " hartree, nodes = " << orbitals[i].nodes
         << ", weight = " << orbitals[i].dominant_weight << '\n';
    throw classification_error(os.str());
  }
  orbitals[c.lb].tag = "lb";
  orbitals[c.ti].tag = "1ti";
  return c;
}

}  // namespace latpair
