#pragma once

// Spherical-harmonic algebra for the lattice matrix elements: Wigner 3j /
// Gaunt coefficients, real spherical harmonics, and the expansion of the
// directional monomials (c/r)^q, c in {x, y, z}, into real harmonics.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

#include "latpair/basis.hpp"
#include "latpair/errors.hpp"

namespace latpair {

enum class Axis { x = 0, y = 1, z = 2 };

/// Largest monomial power the angular tables support (sextic lattice).
inline constexpr int max_monomial_power = 6;

/// Real spherical harmonic label. m > 0 ~ cos(m phi), m < 0 ~ sin(|m| phi).
struct AngularChannel {
  int l = 0;
  int m = 0;

  friend bool operator==(const AngularChannel&, const AngularChannel&) = default;
  friend auto operator<=>(const AngularChannel&, const AngularChannel&) = default;

  /// Eigenvalue (+1/-1) of the reflection c -> -c.
  int parity(Axis axis) const {
    const int am = std::abs(m);
    switch (axis) {
      case Axis::x: return m >= 0 ? ((am % 2) ? -1 : 1) : ((am % 2) ? 1 : -1);
      case Axis::y: return m >= 0 ? 1 : -1;
      case Axis::z: return ((l + am) % 2) ? -1 : 1;
    }
    return 1;
  }
};

/// Per-axis reflection parities; (+,+,+) is the totally symmetric sector.
struct ParityLabel {
  std::array<int, 3> p{1, 1, 1};

  friend bool operator==(const ParityLabel&, const ParityLabel&) = default;
  friend auto operator<=>(const ParityLabel&, const ParityLabel&) = default;

  ParityLabel operator*(const ParityLabel& o) const {
    return {{p[0] * o.p[0], p[1] * o.p[1], p[2] * o.p[2]}};
  }
  bool even() const { return p[0] == 1 && p[1] == 1 && p[2] == 1; }
  int index() const { return (p[0] < 0 ? 1 : 0) + (p[1] < 0 ? 2 : 0) + (p[2] < 0 ? 4 : 0); }
  static ParityLabel from_index(int i) {
    return {{(i & 1) ? -1 : 1, (i & 2) ? -1 : 1, (i & 4) ? -1 : 1}};
  }
};

inline ParityLabel parity_of(const AngularChannel& ch) {
  return {{ch.parity(Axis::x), ch.parity(Axis::y), ch.parity(Axis::z)}};
}

/// All real channels with l <= l_max, ordered by (l, m).
inline std::vector<AngularChannel> channels_up_to(int l_max) {
  std::vector<AngularChannel> out;
  for (int l = 0; l <= l_max; ++l)
    for (int m = -l; m <= l; ++m) out.push_back({l, m});
  return out;
}

namespace detail {
inline double factorial(int n) {
  static const auto table = [] {
    std::array<double, 171> t{};
    t[0] = 1.0;
    for (int i = 1; i < 171; ++i) t[i] = t[i - 1] * i;
    return t;
  }();
  if (n < 0 || n > 170) throw domain_error("factorial argument out of range");
  return table[n];
}
}  // namespace detail

/// Wigner 3j symbol (Racah formula).
inline double wigner3j(int j1, int j2, int j3, int m1, int m2, int m3) {
  using detail::factorial;
  if (m1 + m2 + m3 != 0) return 0.0;
  if (std::abs(m1) > j1 || std::abs(m2) > j2 || std::abs(m3) > j3) return 0.0;
  if (j3 < std::abs(j1 - j2) || j3 > j1 + j2) return 0.0;
  const double tri = factorial(j1 + j2 - j3) * factorial(j1 - j2 + j3) * factorial(-j1 + j2 + j3) /
                     factorial(j1 + j2 + j3 + 1);
  const double pre = std::sqrt(tri * factorial(j1 + m1) * factorial(j1 - m1) * factorial(j2 + m2) *
                               factorial(j2 - m2) * factorial(j3 + m3) * factorial(j3 - m3));
  const int kmin = std::max({0, j2 - j3 - m1, j1 - j3 + m2});
  const int kmax = std::min({j1 + j2 - j3, j1 - m1, j2 + m2});
  double sum = 0.0;
  for (int k = kmin; k <= kmax; ++k) {
    const double d = factorial(k) * factorial(j1 + j2 - j3 - k) * factorial(j1 - m1 - k) *
                     factorial(j2 + m2 - k) * factorial(j3 - j2 + m1 + k) * factorial(j3 - j1 - m2 + k);
    sum += ((k % 2) ? -1.0 : 1.0) / d;
  }
  const int phase = j1 - j2 - m3;
  return ((phase % 2 + 2) % 2 ? -1.0 : 1.0) * pre * sum;
}

/// Gaunt coefficient int Y*_{l1 m1} Y_{l2 m2} Y_{l3 m3} dOmega (complex harmonics, Condon-Shortley phase).
inline double gaunt(int l1, int m1, int l2, int m2, int l3, int m3) {
  if (std::abs(m1) > l1 || std::abs(m2) > l2 || std::abs(m3) > l3)
    throw domain_error("gaunt: |m| must not exceed l");
  if (m1 != m2 + m3) return 0.0;
  if ((l1 + l2 + l3) % 2) return 0.0;
  if (l1 < std::abs(l2 - l3) || l1 > l2 + l3) return 0.0;
  const double norm = std::sqrt((2 * l1 + 1) * (2 * l2 + 1) * (2 * l3 + 1) / (4.0 * std::numbers::pi));
  const double sign = (m1 % 2) ? -1.0 : 1.0;
  return sign * norm * wigner3j(l1, l2, l3, 0, 0, 0) * wigner3j(l1, l2, l3, -m1, m2, m3);
}

namespace detail {
// Coefficients of a real harmonic in terms of complex ones: Y^R_{l mu} = sum_m U(mu, m) Y_l^m.
inline std::vector<std::pair<int, std::complex<double>>> real_to_complex(int l, int mu) {
  (void)l;
  const double s = 1.0 / std::sqrt(2.0);
  if (mu == 0) return {{0, 1.0}};
  const int am = std::abs(mu);
  const double ph = (am % 2) ? -1.0 : 1.0;
  if (mu > 0) return {{am, ph * s}, {-am, s}};
  const std::complex<double> i(0.0, 1.0);
  return {{am, ph * s / i}, {-am, -s / i}};
}
}  // namespace detail

/// int Y^R_a Y^R_b Y^R_c dOmega for real harmonics.
inline double real_gaunt(const AngularChannel& a, const AngularChannel& b, const AngularChannel& c) {
  if ((a.l + b.l + c.l) % 2) return 0.0;
  if (a.l < std::abs(b.l - c.l) || a.l > b.l + c.l) return 0.0;
  const double norm = std::sqrt((2 * a.l + 1) * (2 * b.l + 1) * (2 * c.l + 1) / (4.0 * std::numbers::pi)) *
                      wigner3j(a.l, b.l, c.l, 0, 0, 0);
  if (norm == 0.0) return 0.0;
  std::complex<double> sum = 0.0;
  for (const auto& [ma, ua] : detail::real_to_complex(a.l, a.m))
    for (const auto& [mb, ub] : detail::real_to_complex(b.l, b.m))
      for (const auto& [mc, uc] : detail::real_to_complex(c.l, c.m)) {
        if (ma + mb + mc != 0) continue;
        sum += ua * ub * uc * wigner3j(a.l, b.l, c.l, ma, mb, mc);
      }
  return norm * sum.real();
}

/// Real spherical harmonic Y^R_{lm} at the direction of (x, y, z) (need not be normalized).
inline double real_ylm(int l, int m, double x, double y, double z) {
  const double r = std::sqrt(x * x + y * y + z * z);
  if (r == 0.0) throw domain_error("real_ylm: zero direction vector");
  const double ct = z / r;
  const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
  const int am = std::abs(m);
  // normalized associated Legendre without Condon-Shortley phase:
  // Pbar_l^m = sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!) P_l^m
  double pmm = std::sqrt(1.0 / (4.0 * std::numbers::pi));
  for (int k = 1; k <= am; ++k) pmm *= std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * st;
  double plm;
  if (l == am) {
    plm = pmm;
  } else {
    double pm1 = std::sqrt(2.0 * am + 3.0) * ct * pmm;
    double pm0 = pmm;
    for (int ll = am + 2; ll <= l; ++ll) {
      const double a = std::sqrt((4.0 * ll * ll - 1.0) / (double(ll) * ll - double(am) * am));
      const double b = std::sqrt(((ll - 1.0) * (ll - 1.0) - double(am) * am) / (4.0 * (ll - 1.0) * (ll - 1.0) - 1.0));
      const double pn = a * (ct * pm1 - b * pm0);
      pm0 = pm1;
      pm1 = pn;
    }
    plm = (l == am + 1) ? std::sqrt(2.0 * am + 3.0) * ct * pmm : pm1;
  }
  if (m == 0) return plm;
  const double phi = std::atan2(y, x);
  return std::sqrt(2.0) * plm * (m > 0 ? std::cos(am * phi) : std::sin(am * phi));
}

inline double real_ylm(const AngularChannel& ch, double x, double y, double z) {
  return real_ylm(ch.l, ch.m, x, y, z);
}

/// (c/r)^q = sum terms.coefficient * Y^R_{lm}.
struct MonomialExpansion {
  Axis axis = Axis::z;
  int power = 0;
  std::vector<std::pair<AngularChannel, double>> terms;

  double evaluate(double x, double y, double z) const {
    double s = 0.0;
    for (const auto& [ch, c] : terms) s += c * real_ylm(ch, x, y, z);
    return s;
  }
};

/// Product rule on the sphere: Gauss-Legendre in cos(theta) times a uniform phi grid.
struct SphereRule {
  std::vector<std::array<double, 3>> directions;
  std::vector<double> weights;

  static SphereRule product(int n_theta, int n_phi) {
    SphereRule s;
    const auto gl = gauss_legendre(n_theta);
    for (int i = 0; i < n_theta; ++i) {
      const double ct = gl.nodes[i];
      const double st = std::sqrt(1.0 - ct * ct);
      for (int j = 0; j < n_phi; ++j) {
        const double phi = 2.0 * std::numbers::pi * (j + 0.5) / n_phi;
        s.directions.push_back({st * std::cos(phi), st * std::sin(phi), ct});
        s.weights.push_back(gl.weights[i] * 2.0 * std::numbers::pi / n_phi);
      }
    }
    return s;
  }
};

/// Projection of (c/r)^q onto real harmonics; coefficients cached per (axis, q).
inline const MonomialExpansion& expand_monomial(Axis axis, int q) {
  if (q < 0 || q > max_monomial_power)
    throw domain_error("expand_monomial: power " + std::to_string(q) + " outside [0, " +
                       std::to_string(max_monomial_power) + "]");
  static std::mutex mtx;
  static std::map<std::pair<int, int>, MonomialExpansion> cache;
  std::lock_guard lock(mtx);
  const auto key = std::make_pair(static_cast<int>(axis), q);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  MonomialExpansion e;
  e.axis = axis;
  e.power = q;
  const auto rule = SphereRule::product(16, 32);
  for (int l = q % 2; l <= q; l += 2) {
    for (int m = -l; m <= l; ++m) {
      double c = 0.0;
      for (std::size_t k = 0; k < rule.weights.size(); ++k) {
        const auto& d = rule.directions[k];
        c += rule.weights[k] * std::pow(d[static_cast<int>(axis)], q) * real_ylm(l, m, d[0], d[1], d[2]);
      }
      if (std::abs(c) > 1e-14) e.terms.push_back({{l, m}, c});
    }
  }
  return cache.emplace(key, std::move(e)).first->second;
}

/// Matrix <Y_a | (c/r)^q | Y_b> over two channel lists.
inline Eigen::MatrixXd angular_matrix(Axis axis, int q, const std::vector<AngularChannel>& rows,
                                      const std::vector<AngularChannel>& cols) {
  const auto& e = expand_monomial(axis, q);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()),
                                            static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) {
      double s = 0.0;
      for (const auto& [ch, c] : e.terms) s += c * real_gaunt(rows[i], ch, cols[j]);
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::abs(s) < 1e-15 ? 0.0 : s;
    }
  return a;
}

}  // namespace latpair
