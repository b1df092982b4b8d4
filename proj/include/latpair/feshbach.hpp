#pragma once

// Magnetic-field dependence of the scattering length near a resonance,
// binding-energy branches, the harmonic pseudopotential (Gamma-ratio)
// relation and a least-squares fit of the resonance parameters.

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "latpair/errors.hpp"
#include "latpair/potentials.hpp"
#include "latpair/quantities.hpp"

namespace latpair {

struct FeshbachParams {
  double B0 = 0.0;   // gauss
  double dB = 0.0;   // gauss
  double abg = 0.0;  // bohr

  void validate() const {
    if (dB == 0.0) throw domain_error("Feshbach width must be non-zero");
    if (abg == 0.0) throw domain_error("background scattering length must be non-zero");
  }
};

inline double a_of_B(const FeshbachParams& p, double B) {
  p.validate();
  if (B == p.B0) throw pole_error("a_of_B: field sits on the resonance", p.B0);
  return p.abg * (1.0 - p.dB / (B - p.B0));
}

inline double B_of_a(const FeshbachParams& p, double a) {
  p.validate();
  if (a == p.abg) throw pole_error("B_of_a: a equals the background value (B -> infinity)", p.abg);
  return p.dB / (1.0 - a / p.abg) + p.B0;
}

// ---------------------------------------------------------------------------
// Harmonic pseudopotential relation between the REL energy e (units of omega)
// and the scattering length: G(-e/2 + 3/4) / G(-e/2 + 1/4) = a_ho / (2 a),
// with a_ho = 1/sqrt(mu omega). To first order this gives the mean-field shift
// e - 3/2 = (2/sqrt(pi)) a / a_ho.

inline constexpr double gamma_pole_tolerance = 1e-8;

namespace detail {
inline double distance_to_pole(double x) {
  if (x > 0.5) return std::numeric_limits<double>::infinity();
  return std::abs(x - std::round(x));
}
}  // namespace detail

/// a_sc^E for a REL energy `e` given in units of omega.
inline double energy_dependent_asc(double e, double a_ho) {
  const double num = -0.5 * e + 0.75;
  const double den = -0.5 * e + 0.25;
  const bool num_pole = detail::distance_to_pole(num) < gamma_pole_tolerance;
  const bool den_pole = detail::distance_to_pole(den) < gamma_pole_tolerance;
  if (den_pole) throw pole_error("Gamma relation: energy at a unitarity pole", 2.0 * (0.25 - std::round(den)));
  if (num_pole) return 0.0;
  return a_ho / (2.0 * std::tgamma(num) / std::tgamma(den));
}

/// Energy window (units of omega) of harmonic level k: k = 0 is the bound
/// branch below 1/2, k >= 1 spans (2k - 3/2, 2k + 1/2).
inline std::pair<double, double> gamma_window(int level) {
  if (level < 0) throw domain_error("gamma_window: negative level");
  if (level == 0) return {-std::numeric_limits<double>::infinity(), 0.5};
  return {2.0 * level - 1.5, 2.0 * level + 0.5};
}

/// Inverse of energy_dependent_asc inside one level window.
inline double energy_from_asc(double a, double a_ho, int level) {
  auto [lo, hi] = gamma_window(level);
  const double eps = 10.0 * gamma_pole_tolerance;  // keep the bracket clear of the pole guard
  hi -= eps;
  if (level == 0) {
    if (!(a > 0.0)) throw domain_error("energy_from_asc: the bound branch needs a > 0");
    lo = hi - 1.0;
    while (energy_dependent_asc(lo, a_ho) > a) lo -= 2.0 * (hi - lo);
  } else {
    lo += eps;
  }
  auto f = [&](double e) { return energy_dependent_asc(e, a_ho) - a; };
  double flo = f(lo), fhi = f(hi);
  if (flo * fhi > 0) throw domain_error("energy_from_asc: scattering length outside the reach of this level");
  boost::uintmax_t it = 200;
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                                   boost::math::tools::eps_tolerance<double>(52), it);
  return 0.5 * (r.first + r.second);
}

// ---------------------------------------------------------------------------
// Binding-energy branches.

enum class Branch { RM, CIM, RIP };

inline const char* to_string(Branch b) {
  switch (b) {
    case Branch::RM: return "RM";
    case Branch::CIM: return "CIM";
    case Branch::RIP: return "RIP";
  }
  return "?";
}

inline Branch parse_branch(const std::string& s) {
  if (s == "RM") return Branch::RM;
  if (s == "CIM") return Branch::CIM;
  if (s == "RIP") return Branch::RIP;
  throw domain_error("unknown branch label '" + s + "'");
}

/// Energies (hartree) of the lb and 1ti states at one scattering length.
struct LevelSample {
  double a = 0.0;
  double lb = 0.0;
  double ti = 0.0;
};

/// Continuous interpolation of the lb and 1ti energies in t = atan(a / L).
class CurveFamily {
 public:
  CurveFamily() = default;
  CurveFamily(std::vector<LevelSample> samples, double length_scale) : L_(length_scale) {
    if (samples.size() < 3) throw domain_error("CurveFamily: need at least three samples");
    std::sort(samples.begin(), samples.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
    std::vector<double> t, ti, tl, lb;
    for (const auto& s : samples) {
      t.push_back(std::atan(s.a / L_));
      ti.push_back(s.ti);
      if (s.a > 0) tl.push_back(t.back()), lb.push_back(s.lb);
    }
    tmin_ = t.front(), tmax_ = t.back();
    ti_ = CubicSpline(t, ti);
    if (tl.size() >= 2) lb_ = CubicSpline(tl, lb), lb_min_ = tl.front();
    samples_ = std::move(samples);
  }

  double length_scale() const { return L_; }
  const std::vector<LevelSample>& samples() const { return samples_; }

  /// Energy of the state feeding `branch` at scattering length a.
  double energy(Branch b, double a) const {
    const double t = std::atan(a / L_);
    if (b == Branch::RM) {
      if (!lb_ || t < *lb_min_ || t > tmax_) throw domain_error("CurveFamily: a outside the sampled RM range");
      return (*lb_)(t);
    }
    if ((b == Branch::CIM) != (a < 0)) throw domain_error("CurveFamily: branch and sign of a disagree");
    if (t < tmin_ || t > tmax_) throw domain_error("CurveFamily: a outside the sampled 1ti range");
    return ti_(t);
  }
  double ti_energy(double a) const { return energy(a < 0 ? Branch::CIM : Branch::RIP, a); }

 private:
  double L_ = 1.0;
  double tmin_ = 0, tmax_ = 0;
  CubicSpline ti_;
  std::optional<CubicSpline> lb_;
  std::optional<double> lb_min_;
  std::vector<LevelSample> samples_;
};

struct BindingPoint {
  double a = 0.0;
  double B = 0.0;
  double energy = 0.0;  // hartree; zero is the 1ti energy at a_bg
  Branch branch = Branch::RIP;
};

struct BindingEnergyCurve {
  std::vector<BindingPoint> points;
  std::string level;
  double anchor = 0.0;  // 1ti energy at a_bg (hartree)
};

/// E_b(a; i) = E_1ti(a_bg) - E_i(a) on every sample, labelled by branch.
inline BindingEnergyCurve binding_energy_curve(const std::vector<LevelSample>& samples,
                                               std::optional<double> anchor_1ti, const FeshbachParams& p,
                                               std::string level = "E6") {
  if (!anchor_1ti) throw anchor_error("binding_energy_curve: no 1ti solve at the background scattering length");
  BindingEnergyCurve c;
  c.level = std::move(level);
  c.anchor = *anchor_1ti;
  for (const auto& s : samples) {
    if (s.a == p.abg) continue;
    const double B = B_of_a(p, s.a);
    if (s.a > 0) c.points.push_back({s.a, B, c.anchor - s.lb, Branch::RM});
    c.points.push_back({s.a, B, c.anchor - s.ti, s.a < 0 ? Branch::CIM : Branch::RIP});
  }
  std::stable_sort(c.points.begin(), c.points.end(), [](const auto& x, const auto& y) {
    return x.branch != y.branch ? x.branch < y.branch : x.a < y.a;
  });
  return c;
}

/// Replaces each sample's scattering length by the energy-dependent one of
/// the harmonic uncoupled REL 1ti energy (units of omega) at that sample.
inline std::vector<LevelSample> remap_energy_dependent(std::vector<LevelSample> samples,
                                                       const std::vector<double>& harmonic_rel_1ti, double a_ho) {
  if (harmonic_rel_1ti.size() != samples.size()) throw domain_error("remap: one harmonic energy per sample needed");
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i].a = energy_dependent_asc(harmonic_rel_1ti[i], a_ho);
  return samples;
}

// ---------------------------------------------------------------------------
// Experimental data and fitting.

struct ExperimentalPoint {
  double B = 0.0;       // gauss
  double energy = 0.0;  // binding energy, kHz
  Branch branch = Branch::RIP;
  std::optional<double> sigma;
};

/// CSV with columns B_gauss, E_b_kHz, branch[, sigma]; '#' comments and a
/// non-numeric header line are skipped.
inline std::vector<ExperimentalPoint> read_experimental_csv(std::istream& in, const std::string& origin = "input") {
  std::vector<ExperimentalPoint> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) {
      const auto b = cell.find_first_not_of(" \t\r"), e = cell.find_last_not_of(" \t\r");
      f.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    try {
      if (f.size() < 3 || f.size() > 4) throw std::invalid_argument("expected 3 or 4 columns");
      ExperimentalPoint p;
      p.B = std::stod(f[0]);
      p.energy = std::stod(f[1]);
      p.branch = parse_branch(f[2]);
      if (f.size() == 4 && !f[3].empty()) p.sigma = std::stod(f[3]);
      out.push_back(p);
    } catch (const std::exception& e) {
      if (out.empty() && lineno == 1) continue;  // header
      throw domain_error(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<ExperimentalPoint> read_experimental_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw domain_error("cannot open experimental data file " + path);
  return read_experimental_csv(in, path);
}

/// Model binding energy (kHz) at field B for parameters p.
inline double model_binding_khz(const CurveFamily& family, const FeshbachParams& p, double B, Branch branch) {
  const double a = a_of_B(p, B);
  if (branch != Branch::RM && ((branch == Branch::CIM) != (a < 0)))
    throw domain_error("model: field lies on the other side of the resonance for this branch");
  return hartree_to_khz(family.ti_energy(p.abg) - family.energy(branch, a));
}

/// Relative error delta(B) = |(E_exp - E_model) / E_exp| per point.
inline std::vector<double> relative_errors(const CurveFamily& family, const FeshbachParams& p,
                                           const std::vector<ExperimentalPoint>& data) {
  std::vector<double> d;
  d.reserve(data.size());
  for (const auto& x : data) {
    if (x.energy == 0.0) throw domain_error("relative error undefined for a zero measured energy");
    d.push_back(std::abs((x.energy - model_binding_khz(family, p, x.B, x.branch)) / x.energy));
  }
  return d;
}

inline double fit_objective(const CurveFamily& family, const FeshbachParams& p,
                            const std::vector<ExperimentalPoint>& data) {
  double s = 0.0;
  for (double d : relative_errors(family, p, data)) s += d * d;
  return s;
}

enum class FitParameter { B0, dB, abg };

inline FitParameter parse_fit_parameter(const std::string& s) {
  if (s == "B0") return FitParameter::B0;
  if (s == "dB" || s == "DeltaB") return FitParameter::dB;
  if (s == "abg" || s == "a_bg") return FitParameter::abg;
  throw domain_error("unknown fit parameter '" + s + "'");
}

inline const char* to_string(FitParameter p) {
  switch (p) {
    case FitParameter::B0: return "B0";
    case FitParameter::dB: return "dB";
    case FitParameter::abg: return "abg";
  }
  return "?";
}

struct FitOptions {
  std::vector<FitParameter> free{FitParameter::B0};
  std::map<FitParameter, double> half_width{{FitParameter::B0, 0.5}, {FitParameter::dB, 1.0}, {FitParameter::abg, 50.0}};
  int grid_points = 21;              // per free parameter, coarse scan
  int max_iterations = 100;
  double step_tolerance = 1e-10;     // relative to the half width
  double curvature_tolerance = 1e-14;
};

struct FitResult {
  FeshbachParams params;
  double objective = 0.0;
  std::vector<double> deltas;
  Eigen::MatrixXd covariance;  // free parameters, in fit order
  std::vector<FitParameter> free;
  int iterations = 0;
};

namespace detail {
inline double& param_ref(FeshbachParams& p, FitParameter f) {
  switch (f) {
    case FitParameter::B0: return p.B0;
    case FitParameter::dB: return p.dB;
    case FitParameter::abg: return p.abg;
  }
  return p.B0;
}
}  // namespace detail

/// Coarse grid scan over start +- half widths, then Newton steps on a local
/// quadratic model of the objective with a backtracking safeguard.
inline FitResult fit_resonance(const CurveFamily& family, const std::vector<ExperimentalPoint>& data,
                               const FeshbachParams& start, const FitOptions& opt = {}) {
  const int d = static_cast<int>(opt.free.size());
  if (d == 0) throw fit_error("fit_resonance: no free parameters");
  if (data.size() < static_cast<std::size_t>(d)) throw fit_error("fit_resonance: fewer data points than parameters");
  Eigen::VectorXd width(d);
  for (int i = 0; i < d; ++i) width(i) = opt.half_width.at(opt.free[i]);
  auto make = [&](const Eigen::VectorXd& x) {
    FeshbachParams p = start;
    for (int i = 0; i < d; ++i) detail::param_ref(p, opt.free[i]) = x(i);
    return p;
  };
  const double inf = std::numeric_limits<double>::infinity();
  auto objective = [&](const Eigen::VectorXd& x) {
    try {
      return fit_objective(family, make(x), data);
    } catch (const std::exception&) {
      return inf;  // outside the evaluable region
    }
  };
  Eigen::VectorXd x0(d);
  FeshbachParams s0 = start;
  for (int i = 0; i < d; ++i) x0(i) = detail::param_ref(s0, opt.free[i]);

  // coarse scan
  Eigen::VectorXd best = x0;
  double fbest = objective(x0);
  const int g = std::max(3, opt.grid_points);
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  for (;;) {
    Eigen::VectorXd x(d);
    for (int i = 0; i < d; ++i) x(i) = x0(i) - width(i) + 2.0 * width(i) * idx[i] / (g - 1.0);
    const double f = objective(x);
    if (f < fbest) fbest = f, best = x;
    int k = 0;
    while (k < d && ++idx[k] == g) idx[k++] = 0;
    if (k == d) break;
  }
  if (!std::isfinite(fbest)) throw fit_error("fit_resonance: objective not evaluable anywhere in the search box");

  // local refinement
  Eigen::VectorXd h = width / (g - 1.0);
  auto hessian = [&](const Eigen::VectorXd& x, double fx, Eigen::VectorXd& grad, Eigen::MatrixXd& H) {
    grad.resize(d);
    H.resize(d, d);
    for (int i = 0; i < d; ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
      e(i) = h(i);
      const double fp = objective(x + e), fm = objective(x - e);
      grad(i) = (fp - fm) / (2 * h(i));
      H(i, i) = (fp - 2 * fx + fm) / (h(i) * h(i));
      for (int j = 0; j < i; ++j) {
        Eigen::VectorXd f = Eigen::VectorXd::Zero(d);
        f(j) = h(j);
        const double v = (objective(x + e + f) - objective(x + e - f) - objective(x - e + f) + objective(x - e - f)) /
                         (4 * h(i) * h(j));
        H(i, j) = H(j, i) = v;
      }
    }
    return grad.allFinite() && H.allFinite();
  };
  FitResult res;
  Eigen::VectorXd x = best;
  double fx = fbest;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    Eigen::VectorXd grad;
    Eigen::MatrixXd H;
    if (!hessian(x, fx, grad, H)) {
      h *= 0.5;
      continue;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    Eigen::VectorXd step;
    if (es.eigenvalues().minCoeff() > 0)
      step = -H.ldlt().solve(grad);
    else
      step = -grad.cwiseProduct(h.cwiseAbs2());  // fall back to a scaled gradient step
    double lambda = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls, lambda *= 0.5) {
      const Eigen::VectorXd xn = x + lambda * step;
      const double fn = objective(xn);
      if (fn <= fx) {
        x = xn, fx = fn, moved = true;
        break;
      }
    }
    const double rel = (lambda * step).cwiseQuotient(width).cwiseAbs().maxCoeff();
    // keep the finite-difference stencil on the scale of the remaining uncertainty
    h = (h * 0.5).cwiseMax(width * 1e-7);
    if (!moved || rel < opt.step_tolerance) break;
  }
  res.iterations = it;
  for (int i = 0; i < d; ++i)
    if (std::abs(x(i) - x0(i)) > width(i) * (1.0 - 1e-9))
      throw fit_error(std::string("fit_resonance: minimum not bracketed in ") + to_string(opt.free[i]));
  // curvature at the optimum on the scale of the coarse grid
  h = width / (g - 1.0) * 1e-2;
  Eigen::VectorXd grad;
  Eigen::MatrixXd H;
  if (!hessian(x, fx, grad, H)) throw fit_error("fit_resonance: objective not evaluable around the optimum");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  if (!(es.eigenvalues().minCoeff() > opt.curvature_tolerance))
    throw fit_error("fit_resonance: objective is flat around the optimum (inconclusive fit)");
  const int dof = std::max(1, static_cast<int>(data.size()) - d);
  res.covariance = 2.0 * (fx / dof) * H.inverse();
  res.params = make(x);
  res.objective = fx;
  res.deltas = relative_errors(family, res.params, data);
  res.free = opt.free;
  return res;
}

}  // namespace latpair
