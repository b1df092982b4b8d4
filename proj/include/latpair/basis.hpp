#pragma once

// B-spline radial bases on configurable knot sequences, with per-interval
// Gauss-Legendre quadrature for every radial integral.
//
// Radial functions are expanded in the reduced form u(r) = r R(r) =
// sum_i c_i B_i(r), so all matrix elements are plain integrals
// int B_i(r) w(r) B_j(r) dr (the r^2 of the volume element is absorbed).

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "latpair/errors.hpp"

namespace latpair {

struct QuadratureRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;

  int points() const { return static_cast<int>(nodes.size()); }
};

/// Gauss-Legendre rule with n points (Newton iteration on P_n).
inline QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw domain_error("gauss_legendre: need at least one point");
  QuadratureRule q;
  q.nodes.resize(n);
  q.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0, p1 = x;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    q.nodes[i] = -x;
    q.nodes[n - 1 - i] = x;
    q.weights[i] = w;
    q.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) q.nodes[n / 2] = 0.0;
  return q;
}

enum class KnotKind { linear, geometric, composite };

/// Distinct breakpoints plus the spline order; end knots carry multiplicity = order.
class KnotSequence {
 public:
  KnotSequence(std::vector<double> breakpoints, int order, KnotKind kind = KnotKind::linear,
               double split = 0.0)
      : breakpoints_(std::move(breakpoints)), order_(order), kind_(kind), split_(split) {
    if (order_ < 2) throw domain_error("spline order must be >= 2");
    if (breakpoints_.size() < 2) throw domain_error("knot sequence needs at least two breakpoints");
    for (std::size_t i = 1; i < breakpoints_.size(); ++i)
      if (!(breakpoints_[i] > breakpoints_[i - 1]))
        throw domain_error("knot breakpoints must be strictly increasing");
    if (kind_ == KnotKind::composite && !(split_ > front() && split_ < back()))
      throw domain_error("composite split radius must lie strictly inside the domain");
  }

  static KnotSequence linear(double r0, double r1, int intervals, int order) {
    if (intervals < 1 || !(r1 > r0)) throw domain_error("linear knots: bad interval");
    std::vector<double> b(intervals + 1);
    for (int i = 0; i <= intervals; ++i) b[i] = r0 + (r1 - r0) * i / intervals;
    b.back() = r1;
    return KnotSequence(std::move(b), order, KnotKind::linear);
  }

  /// Steps grow by a constant ratio starting from first_step.
  static KnotSequence geometric(double r0, double r1, int intervals, double first_step, int order) {
    return KnotSequence(geometric_points(r0, r1, intervals, first_step), order, KnotKind::geometric);
  }

  /// Linear on [r0, split] and geometric on [split, r1], the geometric part
  /// continuing smoothly from the last linear step.
  static KnotSequence composite(double r0, double split, double r1, int linear_intervals,
                                int geometric_intervals, int order) {
    if (!(split > r0 && split < r1)) throw domain_error("composite split radius must lie strictly inside the domain");
    std::vector<double> b(linear_intervals + 1);
    for (int i = 0; i <= linear_intervals; ++i) b[i] = r0 + (split - r0) * i / linear_intervals;
    b.back() = split;
    const double h = (split - r0) / linear_intervals;
    auto g = geometric_points(split, r1, geometric_intervals, h);
    b.insert(b.end(), g.begin() + 1, g.end());
    return KnotSequence(std::move(b), order, KnotKind::composite, split);
  }

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  int order() const { return order_; }
  KnotKind kind() const { return kind_; }
  double split() const { return split_; }
  double front() const { return breakpoints_.front(); }
  double back() const { return breakpoints_.back(); }
  int intervals() const { return static_cast<int>(breakpoints_.size()) - 1; }

  /// Full knot vector with endpoint multiplicity equal to the order.
  std::vector<double> knots() const {
    std::vector<double> t;
    t.reserve(breakpoints_.size() + 2 * (order_ - 1));
    for (int i = 0; i < order_ - 1; ++i) t.push_back(front());
    t.insert(t.end(), breakpoints_.begin(), breakpoints_.end());
    for (int i = 0; i < order_ - 1; ++i) t.push_back(back());
    return t;
  }

 private:
  static std::vector<double> geometric_points(double r0, double r1, int n, double h0) {
    if (n < 1 || !(r1 > r0) || !(h0 > 0.0)) throw domain_error("geometric knots: bad parameters");
    const double len = r1 - r0;
    auto total = [&](double q) {
      return std::abs(q - 1.0) < 1e-12 ? h0 * n : h0 * (std::pow(q, n) - 1.0) / (q - 1.0);
    };
    double lo = 1e-6, hi = 1.0;
    while (total(hi) < len) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (total(mid) < len ? lo : hi) = mid;
    }
    const double q = 0.5 * (lo + hi);
    std::vector<double> b(n + 1);
    b[0] = r0;
    double h = h0;
    for (int i = 1; i <= n; ++i, h *= q) b[i] = b[i - 1] + h;
    b.back() = r1;
    return b;
  }

  std::vector<double> breakpoints_;
  int order_;
  KnotKind kind_;
  double split_;
};

/// B splines of a knot sequence with the first and last spline dropped, so
/// every retained function vanishes at both domain ends.
class BSplineBasis {
 public:
  struct Node {
    double r;
    double weight;
    int first;  // full index of the first non-zero spline
    std::vector<double> value, d1, d2;
  };

  explicit BSplineBasis(KnotSequence knots, int quadrature_points = -1)
      : knots_(std::move(knots)), t_(knots_.knots()) {
    order_ = knots_.order();
    full_count_ = static_cast<int>(t_.size()) - order_;
    if (full_count_ < 3) throw domain_error("basis too small: fewer than three splines");
    const int nq = quadrature_points > 0 ? quadrature_points : order_ + 4;
    rule_ = gauss_legendre(nq);
    const auto& b = knots_.breakpoints();
    for (std::size_t iv = 0; iv + 1 < b.size(); ++iv) {
      const double a = b[iv], c = b[iv + 1];
      const double half = 0.5 * (c - a), mid = 0.5 * (c + a);
      for (int q = 0; q < nq; ++q) {
        Node n;
        n.r = mid + half * rule_.nodes[q];
        n.weight = half * rule_.weights[q];
        const int span = static_cast<int>(iv) + order_ - 1;
        n.first = span - (order_ - 1);
        derivatives(span, n.r, 2, n.value, n.d1, n.d2);
        nodes_.push_back(std::move(n));
      }
    }
  }

  const KnotSequence& knots() const { return knots_; }
  int order() const { return order_; }
  /// Number of retained splines.
  int size() const { return full_count_ - 2; }
  int full_size() const { return full_count_; }
  double rmin() const { return knots_.front(); }
  double rmax() const { return knots_.back(); }
  const QuadratureRule& rule() const { return rule_; }
  const std::vector<Node>& nodes() const { return nodes_; }

  /// Value of the d-th derivative (d <= 2) of retained spline `index` at r.
  double evaluate(int index, double r, int d = 0) const {
    if (index < 0 || index >= size()) throw domain_error("spline index out of range");
    return evaluate_full(index + 1, r, d);
  }

  /// Same for the full set including the two boundary splines.
  double evaluate_full(int full_index, double r, int d = 0) const {
    if (d < 0 || d > 2) throw domain_error("derivative order must be 0, 1 or 2");
    check_domain(r);
    const int span = find_span(r);
    std::vector<double> v, d1, d2;
    derivatives(span, r, 2, v, d1, d2);
    const int first = span - (order_ - 1);
    const int k = full_index - first;
    if (k < 0 || k >= order_) return 0.0;
    return d == 0 ? v[k] : d == 1 ? d1[k] : d2[k];
  }

  /// Non-zero retained splines at r: writes values (derivative d) and returns
  /// the retained index of the first entry (may be -1 for the dropped spline).
  int nonzero(double r, int d, std::vector<double>& out) const {
    check_domain(r);
    const int span = find_span(r);
    std::vector<double> v, d1, d2;
    derivatives(span, r, 2, v, d1, d2);
    out = d == 0 ? v : d == 1 ? d1 : d2;
    return span - (order_ - 1) - 1;
  }

  /// Symmetric matrix of int B_i^(dl)(r) w(r) B_j^(dr)(r) dr over retained
  /// splines; exact for polynomial w up to the quadrature degree.
  Eigen::MatrixXd radial_matrix(const std::function<double(double)>& w, int dl = 0, int dr = 0) const {
    const int n = size();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (const auto& node : nodes_) {
      const double wv = w(node.r);
      if (!std::isfinite(wv)) {
        std::ostringstream os;
        os << "radial_matrix: weight function is not finite at r = " << node.r;
        throw domain_error(os.str());
      }
      const double f = node.weight * wv;
      const auto& left = dl == 0 ? node.value : dl == 1 ? node.d1 : node.d2;
      const auto& right = dr == 0 ? node.value : dr == 1 ? node.d1 : node.d2;
      for (int a = 0; a < order_; ++a) {
        const int i = node.first + a - 1;
        if (i < 0 || i >= n) continue;
        const double fa = f * left[a];
        for (int b = 0; b < order_; ++b) {
          const int j = node.first + b - 1;
          if (j < 0 || j >= n) continue;
          m(i, j) += fa * right[b];
        }
      }
    }
    if (dl != dr) m = 0.5 * (m + m.transpose()).eval();
    return m;
  }

  Eigen::MatrixXd overlap() const {
    return radial_matrix([](double) { return 1.0; });
  }
  /// int B_i' B_j' dr
  Eigen::MatrixXd stiffness() const {
    return radial_matrix([](double) { return 1.0; }, 1, 1);
  }

  /// Reduced radial function u(r) = sum_i c_i B_i(r) at r.
  double expand(const double* coefficients, double r, int d = 0) const {
    if (r <= rmin() || r >= rmax()) return 0.0;
    std::vector<double> v;
    const int first = nonzero(r, d, v);
    double s = 0.0;
    for (int a = 0; a < order_; ++a) {
      const int i = first + a;
      if (i >= 0 && i < size()) s += coefficients[i] * v[a];
    }
    return s;
  }

 private:
  void check_domain(double r) const {
    if (!(r >= rmin() && r <= rmax())) {
      std::ostringstream os;
      os << "radius " << r << " outside basis domain [" << rmin() << ", " << rmax() << "]";
      throw domain_error(os.str());
    }
  }

  int find_span(double r) const {
    const int p = order_ - 1;
    const int n = full_count_ - 1;
    if (r >= t_[n + 1]) return n;
    auto it = std::upper_bound(t_.begin() + p, t_.begin() + n + 1, r);
    return static_cast<int>(it - t_.begin()) - 1;
  }

  // All non-zero basis functions of degree p and their first two derivatives
  // at r inside knot span `span` (de Boor / Cox recursion with derivative table).
  void derivatives(int span, double r, int nd, std::vector<double>& v, std::vector<double>& d1,
                   std::vector<double>& d2) const {
    const int p = order_ - 1;
    const int nd_requested = nd;
    nd = std::min(nd, p);
    std::vector<std::vector<double>> ndu(p + 1, std::vector<double>(p + 1));
    std::vector<double> left(p + 1), right(p + 1);
    ndu[0][0] = 1.0;
    for (int j = 1; j <= p; ++j) {
      left[j] = r - t_[span + 1 - j];
      right[j] = t_[span + j] - r;
      double saved = 0.0;
      for (int k = 0; k < j; ++k) {
        ndu[j][k] = right[k + 1] + left[j - k];
        const double tmp = ndu[k][j - 1] / ndu[j][k];
        ndu[k][j] = saved + right[k + 1] * tmp;
        saved = left[j - k] * tmp;
      }
      ndu[j][j] = saved;
    }
    std::vector<std::vector<double>> ders(nd + 1, std::vector<double>(p + 1, 0.0));
    for (int j = 0; j <= p; ++j) ders[0][j] = ndu[j][p];
    std::vector<std::vector<double>> a(2, std::vector<double>(p + 1));
    for (int k = 0; k <= p; ++k) {
      int s1 = 0, s2 = 1;
      a[0][0] = 1.0;
      for (int m = 1; m <= nd; ++m) {
        double d = 0.0;
        const int rk = k - m, pk = p - m;
        if (k >= m) {
          a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
          d = a[s2][0] * ndu[rk][pk];
        }
        const int j1 = rk >= -1 ? 1 : -rk;
        const int j2 = (k - 1 <= pk) ? m - 1 : p - k;
        for (int j = j1; j <= j2; ++j) {
          a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
          d += a[s2][j] * ndu[rk + j][pk];
        }
        if (k <= pk) {
          a[s2][m] = -a[s1][m - 1] / ndu[pk + 1][k];
          d += a[s2][m] * ndu[k][pk];
        }
        ders[m][k] = d;
        std::swap(s1, s2);
      }
    }
    double f = p;
    for (int m = 1; m <= nd; ++m) {
      for (int j = 0; j <= p; ++j) ders[m][j] *= f;
      f *= (p - m);
    }
    v = ders[0];
    d1 = (nd >= 1 && nd_requested >= 1) ? ders[1] : std::vector<double>(p + 1, 0.0);
    d2 = (nd >= 2 && nd_requested >= 2) ? ders[2] : std::vector<double>(p + 1, 0.0);
  }

  KnotSequence knots_;
  std::vector<double> t_;
  int order_ = 0;
  int full_count_ = 0;
  QuadratureRule rule_;
  std::vector<Node> nodes_;
};

}  // namespace latpair
