#pragma once

// Interatomic potential curves (tabulated short range merged onto an analytic
// dispersion + exchange tail, with an optional inner-wall shift) and the
// Taylor-expanded lattice polynomial separated into COM, REL and coupling parts.

#include <algorithm>
#include <array>
// Boost 1.74 pchip calls isnan unqualified; <math.h> puts it in the global namespace.
#include <math.h>
#include <boost/math/interpolators/pchip.hpp>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "latpair/errors.hpp"
#include "latpair/quantities.hpp"

namespace latpair {

// ---------------------------------------------------------------------------
// Radial tables and interpolation

struct RadialTable {
  std::vector<double> r;
  std::vector<double> v;

  std::size_t size() const { return r.size(); }

  void validate() const {
    if (r.size() != v.size()) throw domain_error("radial table: column lengths differ");
    if (r.size() < 4) throw domain_error("radial table: need at least four points");
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (!std::isfinite(r[i]) || !std::isfinite(v[i]))
        throw domain_error("radial table: non-finite entry at row " + std::to_string(i));
      if (i > 0 && !(r[i] > r[i - 1])) {
        std::ostringstream os;
        os << "radial table: radii must be strictly increasing (row " << i << ", r = " << r[i] << ")";
        throw domain_error(os.str());
      }
    }
  }
};

/// Reads the two-column curve format: '#' comments, whitespace separated r [a0], V [hartree].
inline RadialTable read_curve_table(std::istream& in, const std::string& origin = "<stream>") {
  RadialTable t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double r, v;
    if (!(ls >> r)) continue;
    if (!(ls >> v)) throw domain_error(origin + ":" + std::to_string(lineno) + ": expected two columns");
    std::string extra;
    if (ls >> extra) throw domain_error(origin + ":" + std::to_string(lineno) + ": trailing data '" + extra + "'");
    t.r.push_back(r);
    t.v.push_back(v);
  }
  t.validate();
  return t;
}

inline RadialTable read_curve_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw domain_error("cannot open potential curve file '" + path + "'");
  return read_curve_table(in, path);
}

inline void write_curve_table(std::ostream& out, const RadialTable& t, const std::string& comment = {}) {
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "# r [a0]    V [hartree]\n";
  char buf[64];
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", t.r[i], t.v[i]);
    out << buf;
  }
}

/// C2 cubic spline on a non-uniform grid. The left end is clamped to a given
/// slope (or natural when none is given), the right end is natural.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> x, std::vector<double> y, std::optional<double> left_slope = std::nullopt)
      : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw domain_error("cubic spline: need matching arrays of >= 2 points");
    m_.assign(n, 0.0);  // second derivatives
    if (n == 2) return;
    std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), d(n, 0.0);
    if (left_slope) {
      const double h0 = x_[1] - x_[0];
      b[0] = h0 / 3.0;
      c[0] = h0 / 6.0;
      d[0] = (y_[1] - y_[0]) / h0 - *left_slope;
    } else {
      b[0] = 1.0;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
      a[i] = h0 / 6.0;
      b[i] = (h0 + h1) / 3.0;
      c[i] = h1 / 6.0;
      d[i] = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
    }
    b[n - 1] = 1.0;
    for (std::size_t i = 1; i < n; ++i) {  // Thomas algorithm
      const double w = a[i] / b[i - 1];
      b[i] -= w * c[i - 1];
      d[i] -= w * d[i - 1];
    }
    m_[n - 1] = d[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) m_[i] = (d[i] - c[i] * m_[i + 1]) / b[i];
  }

  double operator()(double x) const { return eval(x, 0); }
  double prime(double x) const { return eval(x, 1); }
  double front() const { return x_.front(); }
  double back() const { return x_.back(); }

 private:
  double eval(double x, int d) const {
    const std::size_t n = x_.size();
    std::size_t i = std::upper_bound(x_.begin(), x_.end(), x) - x_.begin();
    i = std::clamp<std::size_t>(i, 1, n - 1) - 1;
    const double h = x_[i + 1] - x_[i];
    const double A = (x_[i + 1] - x) / h, B = (x - x_[i]) / h;
    if (d == 0)
      return A * y_[i] + B * y_[i + 1] + ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
    return (y_[i + 1] - y_[i]) / h - (3 * A * A - 1) * h / 6.0 * m_[i] + (3 * B * B - 1) * h / 6.0 * m_[i + 1];
  }

  std::vector<double> x_, y_, m_;
};

/// Short-range interpolant: monotone (PCHIP) on the repulsive wall up to the
/// tabulated minimum, C2 spline beyond it (clamped to the PCHIP slope at the
/// junction), exponential extrapolation below the first point.
class ShortRangeInterpolant {
 public:
  explicit ShortRangeInterpolant(const RadialTable& t) {
    t.validate();
    r0_ = t.r.front();
    r1_ = t.r.back();
    const auto imin = static_cast<std::size_t>(std::min_element(t.v.begin(), t.v.end()) - t.v.begin());
    std::optional<double> join_slope;
    std::size_t start = 0;
    if (imin >= 3) {
      std::vector<double> xw(t.r.begin(), t.r.begin() + imin + 1), yw(t.v.begin(), t.v.begin() + imin + 1);
      wall_ = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(std::move(xw), std::move(yw));
      r_join_ = t.r[imin];
      join_slope = wall_->prime(r_join_);
      start = imin;
    } else {
      r_join_ = r0_;
    }
    if (t.size() - start >= 2)
      body_ = CubicSpline(std::vector<double>(t.r.begin() + static_cast<std::ptrdiff_t>(start), t.r.end()),
                          std::vector<double>(t.v.begin() + static_cast<std::ptrdiff_t>(start), t.v.end()),
                          join_slope);
    // exponential wall continuation through the first two samples
    const double v0 = t.v[0], v1 = t.v[1];
    if (v0 > 0.0 && v1 > 0.0 && v0 > v1) {
      gamma_ = std::log(v0 / v1) / (t.r[1] - t.r[0]);
      v0_ = v0;
    } else {
      gamma_ = 0.0;
      v0_ = v0;
      slope0_ = (v1 - v0) / (t.r[1] - t.r[0]);
    }
  }

  double operator()(double r) const {
    if (r < r0_) return gamma_ > 0.0 ? v0_ * std::exp(-gamma_ * (r - r0_)) : v0_ + slope0_ * (r - r0_);
    if (wall_ && r <= r_join_) return (*wall_)(r);
    return body_(std::min(r, r1_));
  }

  double prime(double r) const {
    if (r < r0_) return gamma_ > 0.0 ? -gamma_ * v0_ * std::exp(-gamma_ * (r - r0_)) : slope0_;
    if (wall_ && r <= r_join_) return wall_->prime(r);
    return body_.prime(std::min(r, r1_));
  }

  double front() const { return r0_; }
  double back() const { return r1_; }

 private:
  std::shared_ptr<boost::math::interpolators::pchip<std::vector<double>>> wall_;
  CubicSpline body_;
  double r0_ = 0, r1_ = 0, r_join_ = 0;
  double gamma_ = 0, v0_ = 0, slope0_ = 0;
};

// ---------------------------------------------------------------------------
// Long-range tail

/// V_LR(r) = D_e - C6/r^6 - C8/r^8 - C10/r^10 - C r^alpha exp(-beta r).
struct LongRangeParams {
  double dissociation = 0.0;  // D_e, hartree (asymptote of the curve)
  double c6 = 0.0, c8 = 0.0, c10 = 0.0;
  double exchange_c = 0.0, exchange_alpha = 0.0, exchange_beta = 1.0;

  double dispersion(double r) const {
    const double r2 = r * r, r6 = r2 * r2 * r2;
    return -c6 / r6 - c8 / (r6 * r2) - c10 / (r6 * r2 * r2);
  }
  double exchange(double r) const {
    if (exchange_c == 0.0) return 0.0;
    return -exchange_c * std::pow(r, exchange_alpha) * std::exp(-exchange_beta * r);
  }
  double value(double r) const { return dissociation + dispersion(r) + exchange(r); }
  double derivative(double r) const {
    const double r2 = r * r, r7 = r2 * r2 * r2 * r;
    double d = 6 * c6 / r7 + 8 * c8 / (r7 * r2) + 10 * c10 / (r7 * r2 * r2);
    if (exchange_c != 0.0) d += exchange(r) * (exchange_alpha / r - exchange_beta);
    return d;
  }

  /// RbK a3Sigma+ tail constants (C6 and exchange); C8, C10, D_e must still be supplied.
  static LongRangeParams rbk_triplet(double c8, double c10, double dissociation = 0.0) {
    LongRangeParams p;
    p.dissociation = dissociation;
    p.c6 = 4292.0;
    p.c8 = c8;
    p.c10 = c10;
    p.exchange_c = 0.00231382;
    p.exchange_alpha = 5.25603;
    p.exchange_beta = 1.11892;
    return p;
  }
};

/// Radial displacement window for the inner-wall shift: full displacement for
/// r <= start, none for r >= end, C2 taper in between.
struct WallWindow {
  double start = 0.0;
  double end = 0.0;

  double weight(double r) const {
    if (r <= start) return 1.0;
    if (r >= end) return 0.0;
    const double t = (r - start) / (end - start);
    return 1.0 - (t - std::sin(2.0 * constants::pi * t) / (2.0 * constants::pi));
  }
  double weight_prime(double r) const {
    if (r <= start || r >= end) return 0.0;
    const double t = (r - start) / (end - start);
    return -(1.0 - std::cos(2.0 * constants::pi * t)) / (end - start);
  }
  /// Largest |s| for which r -> r - s w(r) stays monotone.
  double max_shift() const { return 0.5 * (end - start); }
};

// ---------------------------------------------------------------------------
// Potential curve

/// Merged interaction potential, measured from its dissociation threshold
/// (value(r) -> 0 as r -> infinity).
class PotentialCurve {
 public:
  struct Joins {
    double sr_end = 0.0;
    double lr_start = 0.0;
  };

  const LongRangeParams& long_range() const { return lr_; }
  const Joins& joins() const { return joins_; }
  double merge_offset() const { return delta_merge_; }
  double shift() const { return shift_; }
  const WallWindow& window() const { return window_; }
  double r_min() const { return sr_->front(); }
  /// Radius of the potential minimum (unshifted curve).
  double r_equilibrium() const { return r_e_; }
  double well_depth() const { return -unshifted(r_e_); }

  /// V(r) - D_e in hartree.
  double operator()(double r) const {
    if (shift_ == 0.0 || r >= window_.end) return unshifted(r);
    return unshifted(r - shift_ * window_.weight(r));
  }

  /// Smallest radius at which the (shifted) wall has dropped to `level`.
  double wall_radius(double level) const {
    double lo = r_min() - 10.0 * std::abs(shift_) - 5.0, hi = r_e_;
    if (!((*this)(lo) > level)) throw domain_error("wall_radius: level above the extrapolated wall");
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      ((*this)(mid) > level ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  /// Copy with the inner wall displaced by s (s > 0 pushes the wall outward).
  PotentialCurve shifted(double s, std::optional<WallWindow> window = std::nullopt) const {
    PotentialCurve c = *this;
    if (window) {
      if (!(window->end > window->start)) throw domain_error("wall window: end must exceed start");
      if (window->end >= r_e_) throw domain_error("wall window must end before the potential minimum");
      c.window_ = *window;
    }
    if (std::abs(s) >= c.window_.max_shift()) {
      std::ostringstream os;
      os << "inner-wall shift " << s << " a0 exceeds the smooth-window limit " << c.window_.max_shift()
         << " a0 (mapping r -> r - s w(r) would fold)";
      throw domain_error(os.str());
    }
    c.shift_ = s;
    return c;
  }

  /// Default window: full displacement inside 0.8 r_e, taper over [0.8 r_e, 0.98 r_e].
  /// The taper has to reach into the classically allowed zone: a window that ends
  /// inside the zero-energy forbidden region leaves the scattering length unchanged.
  WallWindow default_window() const { return {0.8 * r_e_, 0.98 * r_e_}; }

  static PotentialCurve build(const RadialTable& sr, const LongRangeParams& lr, Joins joins,
                              double join_tolerance = 1e-9) {
    sr.validate();
    if (!(joins.lr_start >= joins.sr_end)) throw domain_error("long-range start must not precede short-range end");
    if (joins.sr_end > sr.r.back() + 1e-12 || joins.sr_end <= sr.r.front())
      throw domain_error("short-range join radius must lie inside the tabulated range");
    if (!(lr.c6 >= 0.0)) throw domain_error("C6 must be non-negative");
    PotentialCurve c;
    c.sr_ = std::make_shared<ShortRangeInterpolant>(sr);
    c.lr_ = lr;
    c.joins_ = joins;
    c.delta_merge_ = (*c.sr_)(joins.sr_end) - lr.value(joins.lr_start);
    if (joins.lr_start > joins.sr_end) {
      const double x0 = joins.sr_end, x1 = joins.lr_start;
      c.bridge_ = {x0, x1, (*c.sr_)(x0) - 0.5 * c.delta_merge_, lr.value(x1), c.sr_->prime(x0), lr.derivative(x1)};
    } else if (std::abs(0.5 * c.delta_merge_) > join_tolerance) {
      std::ostringstream os;
      os << "merged curve has a jump of " << 0.5 * c.delta_merge_ << " hartree at r = " << joins.sr_end
         << " (tolerance " << join_tolerance << ")";
      throw domain_error(os.str());
    }
    c.locate_minimum();
    c.window_ = c.default_window();
    return c;
  }

 private:
  struct Bridge {
    double x0 = 0, x1 = 0, y0 = 0, y1 = 0, d0 = 0, d1 = 0;
    double operator()(double x) const {
      const double h = x1 - x0, t = (x - x0) / h;
      const double t2 = t * t, t3 = t2 * t;
      return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 +
             (t3 - t2) * h * d1;
    }
  };

  double unshifted(double r) const {
    double v;
    if (r <= joins_.sr_end)
      v = (*sr_)(r)-0.5 * delta_merge_;
    else if (r >= joins_.lr_start)
      v = lr_.value(r);
    else
      v = bridge_(r);
    return v - lr_.dissociation;
  }

  void locate_minimum() {
    double best = r_min(), vbest = unshifted(best);
    const int n = 4000;
    const double hi = joins_.lr_start + 20.0;
    for (int i = 0; i <= n; ++i) {
      const double r = r_min() + (hi - r_min()) * i / n;
      const double v = unshifted(r);
      if (v < vbest) vbest = v, best = r;
    }
    const double step = (hi - r_min()) / n;
    double a = best - step, b = best + step;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 200; ++it) {
      const double c1 = b - g * (b - a), c2 = a + g * (b - a);
      if (unshifted(c1) < unshifted(c2))
        b = c2;
      else
        a = c1;
    }
    r_e_ = 0.5 * (a + b);
    if (!(unshifted(r_e_) < 0.0)) throw domain_error("potential curve has no attractive well");
  }

  std::shared_ptr<const ShortRangeInterpolant> sr_;
  LongRangeParams lr_;
  Joins joins_;
  double delta_merge_ = 0.0;
  Bridge bridge_;
  double r_e_ = 0.0;
  double shift_ = 0.0;
  WallWindow window_;
};

inline PotentialCurve build_interaction(const RadialTable& sr, const LongRangeParams& lr, double sr_end,
                                        double lr_start, double join_tolerance = 1e-9) {
  return PotentialCurve::build(sr, lr, {sr_end, lr_start}, join_tolerance);
}

inline PotentialCurve shift_inner_wall(const PotentialCurve& curve, double s,
                                       std::optional<WallWindow> window = std::nullopt) {
  return curve.shifted(s, window);
}

// ---------------------------------------------------------------------------
// Synthetic short range (Tang-Toennies form)

/// V(r) = A exp(-gamma r) - sum_n f_n(gamma r) C_n / r^n, f_n the incomplete-gamma damping.
struct TangToennies {
  double a = 0.0;
  double gamma = 0.0;
  double c6 = 0.0, c8 = 0.0, c10 = 0.0;

  static double damping(int n, double x) {
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= n; ++k) {
      term *= x / k;
      sum += term;
    }
    return 1.0 - std::exp(-x) * sum;
  }
  static double damping_prime(int n, double x) {
    double term = 1.0;
    for (int k = 1; k <= n; ++k) term *= x / k;
    return std::exp(-x) * term;
  }
  double dispersion(double r) const {
    const double x = gamma * r;
    return damping(6, x) * c6 / std::pow(r, 6) + damping(8, x) * c8 / std::pow(r, 8) +
           damping(10, x) * c10 / std::pow(r, 10);
  }
  double dispersion_prime(double r) const {
    const double x = gamma * r;
    double d = 0.0;
    const std::array<std::pair<int, double>, 3> cs{{{6, c6}, {8, c8}, {10, c10}}};
    for (const auto& [n, cn] : cs)
      d += cn * (gamma * damping_prime(n, x) / std::pow(r, n) - n * damping(n, x) / std::pow(r, n + 1));
    return d;
  }
  double operator()(double r) const { return a * std::exp(-gamma * r) - dispersion(r); }

  /// A and gamma such that the well has depth `depth` at radius `r_e`.
  static TangToennies fit(double depth, double r_e, double c6, double c8, double c10) {
    if (!(depth > 0.0) || !(r_e > 0.0)) throw domain_error("Tang-Toennies fit: depth and r_e must be positive");
    TangToennies t{0.0, 0.0, c6, c8, c10};
    // stationarity fixes A(gamma); the well depth condition is then one equation in gamma
    auto residual = [&](double g) {
      t.gamma = g;
      t.a = -t.dispersion_prime(r_e) * std::exp(g * r_e) / g;
      return t(r_e) + depth;
    };
    double lo = 0.2, hi = 4.0;
    double flo = residual(lo), fhi = residual(hi);
    if (flo * fhi > 0.0) throw domain_error("Tang-Toennies fit: no repulsion exponent reproduces the well");
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = residual(mid);
      if ((fm < 0.0) == (flo < 0.0))
        lo = mid, flo = fm;
      else
        hi = mid;
    }
    residual(0.5 * (lo + hi));
    return t;
  }
};

struct SyntheticShortRange {
  double well_depth = 1.0e-3;  // hartree
  double r_equilibrium = 11.0; // a0
  double r_start = 4.0;
  double r_end = 18.2;
  double step = 0.01;
};

/// Tabulates a Tang-Toennies model consistent with the dispersion constants of
/// `lr`, offset by D_e so that it shares the long-range energy reference.
inline RadialTable synthetic_short_range(const SyntheticShortRange& p, const LongRangeParams& lr) {
  const auto tt = TangToennies::fit(p.well_depth, p.r_equilibrium, lr.c6, lr.c8, lr.c10);
  RadialTable t;
  const int n = static_cast<int>(std::ceil((p.r_end - p.r_start) / p.step));
  for (int i = 0; i <= n; ++i) {
    const double r = p.r_start + (p.r_end - p.r_start) * i / n;
    t.r.push_back(r);
    t.v.push_back(tt(r) + lr.dissociation);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Lattice polynomial

/// sin^2(u) Taylor coefficient of u^(2p): (-1)^(p+1) 2^(2p-1) / (2p)!, as a reduced fraction.
inline std::pair<long long, long long> sin2_taylor_fraction(int p) {
  if (p < 1 || p > 8) throw domain_error("sin^2 Taylor coefficient index out of range");
  long long num = 1LL << (2 * p - 1);
  long long den = 1;
  for (int k = 2; k <= 2 * p; ++k) den *= k;
  const long long g = std::gcd(num, den);
  num /= g;
  den /= g;
  return {(p % 2) ? num : -num, den};
}

inline double sin2_taylor(int p) {
  const auto [n, d] = sin2_taylor_fraction(p);
  return static_cast<double>(n) / static_cast<double>(d);
}

/// sum_{p=1}^{n/2} t_p u^(2p).
inline double sin2_truncated(double u, int order) {
  double s = 0.0, u2 = u * u, up = 1.0;
  for (int p = 1; 2 * p <= order; ++p) {
    up *= u2;
    s += sin2_taylor(p) * up;
  }
  return s;
}

inline void check_taylor_order(int n) {
  if (n == 2 || n == 6) return;
  if (n == 4)
    throw unsupported_order_error(
        "Taylor order 4 is not supported: the quartic truncation of sin^2 is unbounded below and produces "
        "unphysical negative-energy continua");
  throw unsupported_order_error("Taylor order " + std::to_string(n) + " is not supported (use 2 or 6)");
}

struct AxisPolynomial {
  std::vector<std::pair<int, double>> com;  // X^a, b = 0
  std::vector<std::pair<int, double>> rel;  // x^b, a = 0
  std::vector<std::tuple<int, int, double>> coupling;  // X^a x^b, a, b >= 1

  double com_value(double X) const {
    double s = 0.0;
    for (const auto& [a, c] : com) s += c * std::pow(X, a);
    return s;
  }
  double rel_value(double x) const {
    double s = 0.0;
    for (const auto& [b, c] : rel) s += c * std::pow(x, b);
    return s;
  }
  double coupling_value(double X, double x) const {
    double s = 0.0;
    for (const auto& [a, b, c] : coupling) s += c * std::pow(X, a) * std::pow(x, b);
    return s;
  }
};

struct SeparatedLatticePolynomial {
  int order = 2;
  std::array<double, 3> k{};
  std::array<std::array<double, 3>, 2> depth{};
  double mu1 = 0.5, mu2 = 0.5;
  std::array<AxisPolynomial, 3> axes;

  bool separable() const {
    for (const auto& a : axes)
      if (!a.coupling.empty()) return false;
    return true;
  }
  int max_coupling_power() const {
    int m = 0;
    for (const auto& ax : axes)
      for (const auto& [a, b, c] : ax.coupling) m = std::max({m, a, b});
    return m;
  }
  double com(const std::array<double, 3>& R) const {
    double s = 0.0;
    for (int c = 0; c < 3; ++c) s += axes[c].com_value(R[c]);
    return s;
  }
  double rel(const std::array<double, 3>& r) const {
    double s = 0.0;
    for (int c = 0; c < 3; ++c) s += axes[c].rel_value(r[c]);
    return s;
  }
  double coupling(const std::array<double, 3>& R, const std::array<double, 3>& r) const {
    double s = 0.0;
    for (int c = 0; c < 3; ++c) s += axes[c].coupling_value(R[c], r[c]);
    return s;
  }
  double evaluate(const std::array<double, 3>& R, const std::array<double, 3>& r) const {
    return com(R) + rel(r) + coupling(R, r);
  }
};

inline double binomial(int n, int k) {
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

/// Taylor-expands sum_j sum_c V_c^j sin^2(k_c c_j) to degree n and sorts the
/// monomials X^a x^b of c1 = X + mu2 x, c2 = X - mu1 x into COM, REL and coupling parts.
inline SeparatedLatticePolynomial separate_lattice(const TrapSpec& trap, const PairParameters& pair) {
  check_taylor_order(trap.taylor_order);
  trap.validate();
  SeparatedLatticePolynomial out;
  out.order = trap.taylor_order;
  out.depth = trap.depth;
  out.mu1 = pair.mu1;
  out.mu2 = pair.mu2;
  for (int c = 0; c < 3; ++c) {
    const double k = trap.k(c);
    out.k[c] = k;
    const double v1 = trap.depth[0][c], v2 = trap.depth[1][c];
    std::vector<std::vector<double>> coef(out.order + 1, std::vector<double>(out.order + 1, 0.0));
    std::vector<std::vector<double>> scale(out.order + 1, std::vector<double>(out.order + 1, 0.0));
    for (int p = 1; 2 * p <= out.order; ++p) {
      const double tp = sin2_taylor(p) * std::pow(k, 2 * p);
      for (int a = 0; a <= 2 * p; ++a) {
        const int b = 2 * p - a;
        const double bin = binomial(2 * p, a);
        const double t1 = v1 * tp * bin * std::pow(pair.mu2, b);
        const double t2 = v2 * tp * bin * std::pow(-pair.mu1, b);
        coef[a][b] += t1 + t2;
        scale[a][b] += std::abs(t1) + std::abs(t2);
      }
    }
    auto& ax = out.axes[c];
    for (int a = 0; a <= out.order; ++a)
      for (int b = 0; a + b <= out.order; ++b) {
        if (a + b == 0) continue;
        const double v = coef[a][b];
        if (std::abs(v) <= 1e-14 * scale[a][b]) continue;  // exact cancellation up to rounding
        if (b == 0)
          ax.com.push_back({a, v});
        else if (a == 0)
          ax.rel.push_back({b, v});
        else
          ax.coupling.emplace_back(a, b, v);
      }
  }
  return out;
}

}  // namespace latpair
