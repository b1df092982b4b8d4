#pragma once

// Configuration interaction over products of COM and REL orbitals, with the
// coupling term assembled from per-axis one-dimensional moment tables, and
// the four-energy ledger of a tagged state.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "latpair/angular.hpp"
#include "latpair/errors.hpp"
#include "latpair/potentials.hpp"
#include "latpair/quantities.hpp"
#include "latpair/solver.hpp"

namespace latpair {

struct Configuration {
  int com = 0;  // index into the COM orbital list
  int rel = 0;  // index into the REL orbital list
  ParityLabel parity;
};

/// Cartesian product of the two orbital lists, COM-major. With a sector,
/// only products of that overall per-axis parity are kept.
inline std::vector<Configuration> build_configurations(const std::vector<Orbital>& com,
                                                       const std::vector<Orbital>& rel,
                                                       std::optional<ParityLabel> sector = ParityLabel{}) {
  if (com.empty() || rel.empty()) throw domain_error("build_configurations: empty orbital list");
  std::vector<Configuration> out;
  for (int i = 0; i < static_cast<int>(com.size()); ++i)
    for (int j = 0; j < static_cast<int>(rel.size()); ++j) {
      const ParityLabel p = com[i].parity * rel[j].parity;
      if (!sector || p == *sector) out.push_back({i, j, p});
    }
  if (out.empty()) throw symmetry_error("build_configurations: no configuration falls into the requested sector");
  return out;
}

/// Keeps the `count` lowest orbitals with energy >= floor (sorted input).
inline std::vector<Orbital> select_orbitals(const std::vector<Orbital>& sorted, int count,
                                            double floor = -std::numeric_limits<double>::infinity()) {
  std::vector<Orbital> out;
  for (const auto& o : sorted) {
    if (static_cast<int>(out.size()) >= count) break;
    if (o.energy >= floor) out.push_back(o);
  }
  return out;
}

/// <o_i | c^q | o_j> for every orbital pair of one list, per axis and power.
class MomentTable {
 public:
  explicit MomentTable(const std::vector<Orbital>& orbitals) : orbitals_(&orbitals) {
    if (orbitals.empty()) return;
    basis_ = orbitals.front().basis;
    int lmax = 0;
    for (const auto& o : orbitals) {
      if (o.basis != basis_) throw incompatibility_error("MomentTable: orbitals do not share one radial basis");
      for (const auto& ch : o.channels) lmax = std::max(lmax, ch.l);
    }
    channels_ = channels_up_to(lmax);
    const int n = basis_->size();
    Eigen::Index ncols = 0;
    for (const auto& o : orbitals) ncols += static_cast<Eigen::Index>(o.channels.size());
    U_.resize(n, ncols);
    Eigen::Index col = 0;
    for (int i = 0; i < static_cast<int>(orbitals.size()); ++i) {
      const auto& o = orbitals[i];
      for (int a = 0; a < static_cast<int>(o.channels.size()); ++a, ++col) {
        U_.col(col) = o.channel_coefficients(a);
        owner_.push_back(i);
        const auto it = std::find(channels_.begin(), channels_.end(), o.channels[a]);
        channel_id_.push_back(static_cast<int>(it - channels_.begin()));
      }
    }
  }

  std::size_t size() const { return orbitals_->size(); }

  const Eigen::MatrixXd& operator()(Axis axis, int q) const {
    const auto key = std::make_pair(static_cast<int>(axis), q);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(key, compute(axis, q)).first->second;
  }

 private:
  Eigen::MatrixXd compute(Axis axis, int q) const {
    const Eigen::Index norb = static_cast<Eigen::Index>(size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(norb, norb);
    if (norb == 0) return m;
    const Eigen::MatrixXd ang = angular_matrix(axis, q, channels_, channels_);
    const Eigen::MatrixXd R = basis_->radial_matrix([q](double r) { return std::pow(r, q); });
    const Eigen::MatrixXd G = U_.transpose() * R * U_;
    const auto& orbs = *orbitals_;
    for (Eigen::Index a = 0; a < G.rows(); ++a) {
      const int i = owner_[a];
      for (Eigen::Index b = 0; b < G.cols(); ++b) {
        const int j = owner_[b];
        // parity selection: the product must be odd along `axis` iff q is odd
        const ParityLabel p = orbs[i].parity * orbs[j].parity;
        const int want = (q % 2) ? -1 : 1;
        bool allowed = true;
        for (int c = 0; c < 3; ++c) allowed = allowed && p.p[c] == (c == static_cast<int>(axis) ? want : 1);
        if (!allowed) continue;
        const double w = ang(channel_id_[a], channel_id_[b]);
        if (w != 0.0) m(i, j) += w * G(a, b);
      }
    }
    return 0.5 * (m + m.transpose());
  }

  const std::vector<Orbital>* orbitals_;
  std::shared_ptr<const BSplineBasis> basis_;
  std::vector<AngularChannel> channels_;
  Eigen::MatrixXd U_;
  std::vector<int> owner_, channel_id_;
  mutable std::map<std::pair<int, int>, Eigen::MatrixXd> cache_;
};

/// Coupling matrix W over the configuration list.
inline Eigen::MatrixXd assemble_w(const std::vector<Configuration>& configs, const SeparatedLatticePolynomial& poly,
                                  const MomentTable& com, const MomentTable& rel) {
  const Eigen::Index n = static_cast<Eigen::Index>(configs.size());
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
  for (int c = 0; c < 3; ++c)
    for (const auto& [a, b, w] : poly.axes[c].coupling) {
      if (a < 1 || b < 1 || a > max_monomial_power || b > max_monomial_power)
        throw domain_error("assemble_w: coupling monomial degree outside the angular tables");
      const Eigen::MatrixXd& X = com(static_cast<Axis>(c), a);
      const Eigen::MatrixXd& x = rel(static_cast<Axis>(c), b);
      for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index kp = k; kp < n; ++kp) {
          const double v = X(configs[k].com, configs[kp].com);
          if (v == 0.0) continue;
          W(k, kp) += w * v * x(configs[k].rel, configs[kp].rel);
        }
    }
  return Eigen::MatrixXd(W.selfadjointView<Eigen::Upper>());
}

/// Uncoupled energies on the diagonal plus W.
inline Eigen::MatrixXd ci_hamiltonian(const std::vector<Configuration>& configs, const std::vector<Orbital>& com,
                                      const std::vector<Orbital>& rel, const SeparatedLatticePolynomial& poly) {
  MomentTable mc(com), mr(rel);
  Eigen::MatrixXd H = assemble_w(configs, poly, mc, mr);
  for (std::size_t k = 0; k < configs.size(); ++k)
    H(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) += com[configs[k].com].energy + rel[configs[k].rel].energy;
  return H;
}

struct CIState {
  double energy = 0.0;
  Eigen::VectorXd coefficients;
  int dominant = 0;              // configuration index
  double dominant_weight = 0.0;  // |C|^2 of that configuration
  std::string tag = "other";     // lb, 1ti or other
  int order = 2;
  std::string warning;           // non-empty when the tag is ambiguous
};

/// Indices of the tagged REL orbitals and of the COM ground orbital.
struct TagTargets {
  int com_ground = 0;
  std::optional<int> lb, ti;

  static TagTargets from_orbitals(const std::vector<Orbital>& com, const std::vector<Orbital>& rel) {
    TagTargets t;
    t.com_ground = static_cast<int>(std::min_element(com.begin(), com.end(), [](const Orbital& a, const Orbital& b) {
                                      return a.energy < b.energy;
                                    }) - com.begin());
    for (int j = 0; j < static_cast<int>(rel.size()); ++j) {
      if (rel[j].tag == "lb") t.lb = j;
      if (rel[j].tag == "1ti") t.ti = j;
    }
    return t;
  }
};

inline constexpr double dominance_threshold = 0.5;
inline constexpr double ambiguity_gap = 0.05;

/// Diagonalizes H_CI (all eigenpairs, ascending) and tags the lb / 1ti states.
inline std::vector<CIState> diagonalize_ci(const Eigen::MatrixXd& H, const std::vector<Configuration>& configs,
                                           const TagTargets& targets, int order) {
  if (H.rows() != H.cols() || H.rows() != static_cast<Eigen::Index>(configs.size()))
    throw domain_error("diagonalize_ci: matrix size does not match the configuration list");
  const double asym = (H - H.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(1.0, H.cwiseAbs().maxCoeff())) throw domain_error("diagonalize_ci: matrix not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  if (es.info() != Eigen::Success) throw conditioning_error("CI eigensolver did not converge");
  std::vector<CIState> out(static_cast<std::size_t>(H.rows()));
  for (Eigen::Index s = 0; s < H.rows(); ++s) {
    auto& st = out[s];
    st.energy = es.eigenvalues()(s);
    st.coefficients = es.eigenvectors().col(s);
    st.order = order;
    Eigen::Index k;
    st.dominant_weight = st.coefficients.cwiseAbs2().maxCoeff(&k);
    st.dominant = static_cast<int>(k);
    if (st.coefficients(k) < 0) st.coefficients = -st.coefficients;
  }
  auto tag = [&](std::optional<int> rel_index, const char* name) {
    if (!rel_index) return;
    const int target = [&] {
      for (int k = 0; k < static_cast<int>(configs.size()); ++k)
        if (configs[k].com == targets.com_ground && configs[k].rel == *rel_index) return k;
      return -1;
    }();
    if (target < 0) return;
    // lowest state whose dominant configuration carries the tagged REL orbital
    int chosen = -1;
    for (int s = 0; s < static_cast<int>(out.size()) && chosen < 0; ++s)
      if (configs[out[s].dominant].rel == *rel_index) chosen = s;
    std::string note;
    if (chosen < 0) {
      double best = -1.0;
      for (int s = 0; s < static_cast<int>(out.size()); ++s) {
        const double w = out[s].coefficients(target) * out[s].coefficients(target);
        if (w > best) best = w, chosen = s;
      }
      note = std::string("no state is dominated by the ") + name + " orbital; picked the largest overlap";
    }
    auto& st = out[chosen];
    st.tag = name;
    Eigen::VectorXd w2 = st.coefficients.cwiseAbs2();
    std::sort(w2.data(), w2.data() + w2.size(), std::greater<>());
    std::ostringstream os;
    if (!note.empty()) os << note << "; ";
    if (st.dominant_weight < dominance_threshold) os << "dominant weight " << st.dominant_weight << " below 0.5; ";
    if (w2.size() > 1 && w2(0) - w2(1) < ambiguity_gap) os << "weight gap " << w2(0) - w2(1) << " below 0.05; ";
    st.warning = os.str();
  };
  tag(targets.lb, "lb");
  tag(targets.ti, "1ti");
  return out;
}

inline const CIState& find_tag(const std::vector<CIState>& states, const std::string& tag) {
  for (const auto& s : states)
    if (s.tag == tag) return s;
  throw incomplete_ledger_error("no CI state tagged " + tag);
}

/// Energies of one tagged state at n = 2 and n = 6, uncoupled (E) and CI (calE).
struct EnergyLedger {
  std::string tag;
  double E2 = 0, E6 = 0, CE2 = 0, CE6 = 0;  // hartree
  double geom = 0, coup2 = 0, coup6 = 0, tot = 0;

  static EnergyLedger make(std::string tag, std::optional<double> E2, std::optional<double> E6,
                           std::optional<double> CE2, std::optional<double> CE6) {
    if (!E2 || !E6 || !CE2 || !CE6) {
      std::string missing;
      if (!E2) missing += " E2";
      if (!E6) missing += " E6";
      if (!CE2) missing += " CI-E2";
      if (!CE6) missing += " CI-E6";
      throw incomplete_ledger_error("ledger for " + tag + " is missing" + missing);
    }
    EnergyLedger l;
    l.tag = std::move(tag);
    l.E2 = *E2, l.E6 = *E6, l.CE2 = *CE2, l.CE6 = *CE6;
    l.geom = l.E2 - l.E6;
    l.coup2 = l.E2 - l.CE2;
    l.coup6 = l.E6 - l.CE6;
    l.tot = l.geom + l.coup6;
    return l;
  }

  double geom_khz() const { return hartree_to_khz(geom); }
  double coup2_khz() const { return hartree_to_khz(coup2); }
  double coup6_khz() const { return hartree_to_khz(coup6); }
  double tot_khz() const { return hartree_to_khz(tot); }
};

}  // namespace latpair
