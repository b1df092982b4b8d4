#pragma once

// Radial pair densities and wavefunction cuts in the absolute coordinates of
// the two atoms (y = z = 0 for both), plus the difference fields between
// approximation levels.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "latpair/ci.hpp"
#include "latpair/errors.hpp"
#include "latpair/solver.hpp"

namespace latpair {

/// A two-body state as a short list of (COM orbital, REL orbital, coefficient).
struct PairWavefunction {
  std::shared_ptr<const std::vector<Orbital>> com, rel;
  std::vector<std::tuple<int, int, double>> terms;
  double mu1 = 0.5, mu2 = 0.5;  // m1/M and m2/M
  std::string tag, level;       // e.g. "1ti", "E2"

  /// Uncoupled product state (one configuration).
  static PairWavefunction product(std::shared_ptr<const std::vector<Orbital>> com,
                                  std::shared_ptr<const std::vector<Orbital>> rel, int i, int j, double mu1,
                                  double mu2) {
    PairWavefunction w{std::move(com), std::move(rel), {{i, j, 1.0}}, mu1, mu2, {}, {}};
    return w;
  }

  static PairWavefunction from_ci(const CIState& s, const std::vector<Configuration>& configs,
                                  std::shared_ptr<const std::vector<Orbital>> com,
                                  std::shared_ptr<const std::vector<Orbital>> rel, double mu1, double mu2) {
    if (static_cast<std::size_t>(s.coefficients.size()) != configs.size())
      throw incompatibility_error("CI state and configuration list differ in length");
    PairWavefunction w{std::move(com), std::move(rel), {}, mu1, mu2, s.tag, {}};
    for (std::size_t k = 0; k < configs.size(); ++k)
      if (s.coefficients(static_cast<Eigen::Index>(k)) != 0.0)
        w.terms.emplace_back(configs[k].com, configs[k].rel, s.coefficients(static_cast<Eigen::Index>(k)));
    return w;
  }

  const BSplineBasis& rel_basis() const { return *rel->front().basis; }
  const BSplineBasis& com_basis() const { return *com->front().basis; }
};

namespace detail {

/// Per-COM-orbital REL coefficient blocks: A_i[ch] = sum_{k: i_k = i} C_k u_{j_k, ch}.
struct ContractedRel {
  std::vector<AngularChannel> channels;
  std::vector<int> com_index;
  std::vector<Eigen::MatrixXd> blocks;  // nspline x nchannels per COM orbital
};

inline ContractedRel contract(const PairWavefunction& w) {
  ContractedRel out;
  int lmax = 0;
  for (const auto& o : *w.rel)
    for (const auto& ch : o.channels) lmax = std::max(lmax, ch.l);
  out.channels = channels_up_to(lmax);
  const int n = w.rel_basis().size();
  std::map<int, Eigen::MatrixXd> acc;
  for (const auto& [i, j, c] : w.terms) {
    auto it = acc.find(i);
    if (it == acc.end()) it = acc.emplace(i, Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(out.channels.size()))).first;
    const auto& o = (*w.rel)[j];
    for (int a = 0; a < static_cast<int>(o.channels.size()); ++a) {
      const auto pos = std::find(out.channels.begin(), out.channels.end(), o.channels[a]) - out.channels.begin();
      it->second.col(pos) += c * o.channel_coefficients(a);
    }
  }
  for (auto& [i, m] : acc) {
    out.com_index.push_back(i);
    out.blocks.push_back(std::move(m));
  }
  return out;
}

}  // namespace detail

struct RadialDensity {
  std::vector<double> r, rho;
  double norm = 0.0;  // exact integral over the basis domain
  std::string tag, level;

  double trapezoid_norm() const {
    double s = 0.0;
    for (std::size_t i = 1; i < r.size(); ++i) s += 0.5 * (r[i] - r[i - 1]) * (rho[i] + rho[i - 1]);
    return s;
  }
  /// Position of the outermost local maximum above `fraction` of the global maximum.
  double outermost_lobe(double fraction = 0.05) const {
    const double top = *std::max_element(rho.begin(), rho.end());
    for (std::size_t i = rho.size() - 2; i >= 1; --i)
      if (rho[i] >= rho[i - 1] && rho[i] >= rho[i + 1] && rho[i] > fraction * top) return r[i];
    return r[std::max_element(rho.begin(), rho.end()) - rho.begin()];
  }
};

/// Uniform grid over the REL basis domain.
inline std::vector<double> density_grid(const BSplineBasis& b, int points) {
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[i] = b.rmin() + (b.rmax() - b.rmin()) * i / (points - 1.0);
  return g;
}

/// rho(r) = integral over R and the REL angles of |Psi|^2 r^2.
inline RadialDensity radial_pair_density(const PairWavefunction& w, const std::vector<double>& grid) {
  const auto& B = w.rel_basis();
  for (double r : grid)
    if (r < B.rmin() || r > B.rmax()) throw domain_error("radial_pair_density: grid point outside the REL basis domain");
  const auto c = detail::contract(w);
  RadialDensity d;
  d.tag = w.tag;
  d.level = w.level;
  d.r = grid;
  d.rho.assign(grid.size(), 0.0);
  std::vector<double> vals;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const int first = B.nonzero(grid[g], 0, vals);
    double s = 0.0;
    for (const auto& blk : c.blocks)
      for (Eigen::Index ch = 0; ch < blk.cols(); ++ch) {
        double u = 0.0;
        for (int a = 0; a < static_cast<int>(vals.size()); ++a) {
          const int i = first + a;
          if (i >= 0 && i < B.size()) u += blk(i, ch) * vals[a];
        }
        s += u * u;
      }
    d.rho[g] = s;
  }
  // exact norm from the Gram matrix
  const Eigen::MatrixXd S = B.overlap();
  for (const auto& blk : c.blocks) d.norm += (blk.transpose() * S * blk).trace();
  return d;
}

enum class DifferenceKind { geom, coup2, coup6, tot };

inline const char* to_string(DifferenceKind k) {
  switch (k) {
    case DifferenceKind::geom: return "geom";
    case DifferenceKind::coup2: return "coup2";
    case DifferenceKind::coup6: return "coup6";
    case DifferenceKind::tot: return "tot";
  }
  return "?";
}

struct AbsoluteCut {
  std::vector<double> x1, x2;  // axis grids of atom 1 and atom 2 (bohr)
  Eigen::MatrixXd values;      // values(i, j) at (x1[i], x2[j])
  std::string label;
};

inline std::vector<double> symmetric_grid(double half_width, int points) {
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[i] = -half_width + 2.0 * half_width * i / (points - 1.0);
  return g;
}

namespace detail {

/// sum_ch u_ch(|s|)/|s| * Y_ch(sign s, 0, 0) for a channel-major block.
inline double axis_value(const BSplineBasis& B, const Eigen::Ref<const Eigen::MatrixXd>& blk,
                         const std::vector<AngularChannel>& channels, double s, std::vector<double>& vals) {
  double r = std::abs(s);
  if (r > B.rmax() || r < B.rmin()) return 0.0;
  const double tiny = 1e-9 * std::max(1.0, B.rmax());
  if (r < tiny) r = tiny;  // regular limit at the origin
  const int first = B.nonzero(r, 0, vals);
  const double dir = s < 0 ? -1.0 : 1.0;
  double out = 0.0;
  for (Eigen::Index ch = 0; ch < blk.cols(); ++ch) {
    const double y = real_ylm(channels[ch], dir, 0.0, 0.0);
    if (y == 0.0) continue;
    double u = 0.0;
    for (int a = 0; a < static_cast<int>(vals.size()); ++a) {
      const int i = first + a;
      if (i >= 0 && i < B.size()) u += blk(i, ch) * vals[a];
    }
    out += y * u / r;
  }
  return out;
}

inline Eigen::MatrixXd orbital_block(const Orbital& o, const std::vector<AngularChannel>& channels) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(o.nspline(), static_cast<Eigen::Index>(channels.size()));
  for (int a = 0; a < static_cast<int>(o.channels.size()); ++a) {
    const auto pos = std::find(channels.begin(), channels.end(), o.channels[a]) - channels.begin();
    m.col(pos) = o.channel_coefficients(a);
  }
  return m;
}

}  // namespace detail

/// Psi(x1, x2) with y = z = 0 for both atoms, X = mu1 x1 + mu2 x2, x = x1 - x2.
/// The global sign makes the largest-|value| grid point positive.
inline AbsoluteCut evaluate_cut(const PairWavefunction& w, const std::vector<double>& x1, const std::vector<double>& x2) {
  const auto c = detail::contract(w);
  const auto& Bc = w.com_basis();
  const auto& Br = w.rel_basis();
  int lcom = 0;
  for (const auto& o : *w.com)
    for (const auto& ch : o.channels) lcom = std::max(lcom, ch.l);
  const auto com_channels = channels_up_to(lcom);
  std::vector<Eigen::MatrixXd> com_blocks;
  for (int i : c.com_index) com_blocks.push_back(detail::orbital_block((*w.com)[i], com_channels));

  AbsoluteCut cut;
  cut.x1 = x1;
  cut.x2 = x2;
  cut.label = w.tag + (w.level.empty() ? "" : "_" + w.level);
  cut.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(x1.size()), static_cast<Eigen::Index>(x2.size()));
  std::vector<double> vals;
  for (std::size_t a = 0; a < x1.size(); ++a)
    for (std::size_t b = 0; b < x2.size(); ++b) {
      const double X = w.mu1 * x1[a] + w.mu2 * x2[b];
      const double x = x1[a] - x2[b];
      double v = 0.0;
      for (std::size_t k = 0; k < com_blocks.size(); ++k) {
        const double fr = detail::axis_value(Br, c.blocks[k], c.channels, x, vals);
        if (fr == 0.0) continue;
        v += detail::axis_value(Bc, com_blocks[k], com_channels, X, vals) * fr;
      }
      cut.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
    }
  Eigen::Index ia, ib;
  cut.values.cwiseAbs().maxCoeff(&ia, &ib);
  if (cut.values(ia, ib) < 0) cut.values = -cut.values;
  return cut;
}

/// lower-order minus higher-order field on a shared grid.
inline AbsoluteCut difference(const AbsoluteCut& lower, const AbsoluteCut& higher, const std::string& label) {
  if (lower.x1 != higher.x1 || lower.x2 != higher.x2)
    throw incompatibility_error("difference: cuts were evaluated on different grids");
  AbsoluteCut d;
  d.x1 = lower.x1;
  d.x2 = lower.x2;
  d.values = lower.values - higher.values;
  d.label = label;
  return d;
}

/// The four wavefunctions of one tagged state.
struct LevelCuts {
  AbsoluteCut phi2, phi6, psi2, psi6;  // uncoupled (Phi) and CI (Psi) at n = 2, 6
};

inline AbsoluteCut absolute_cut(const LevelCuts& c, DifferenceKind kind) {
  switch (kind) {
    case DifferenceKind::geom: return difference(c.phi2, c.phi6, "geom");
    case DifferenceKind::coup2: return difference(c.phi2, c.psi2, "coup2");
    case DifferenceKind::coup6: return difference(c.phi6, c.psi6, "coup6");
    case DifferenceKind::tot: return difference(c.phi2, c.psi6, "tot");
  }
  throw domain_error("absolute_cut: unknown kind");
}

/// Checks that two wavefunctions live on equivalent radial bases.
inline void require_compatible(const PairWavefunction& a, const PairWavefunction& b) {
  auto same = [](const BSplineBasis& x, const BSplineBasis& y) {
    return x.size() == y.size() && x.order() == y.order() && x.rmin() == y.rmin() && x.rmax() == y.rmax();
  };
  if (!same(a.com_basis(), b.com_basis()) || !same(a.rel_basis(), b.rel_basis()))
    throw incompatibility_error("states are expanded in different radial bases");
}

}  // namespace latpair
