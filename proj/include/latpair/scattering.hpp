#pragma once

// Zero-energy s-wave scattering: Numerov integration of u'' = 2 mu V u,
// scattering length from the asymptotic line u ~ A (r - a), bound-state count
// from the nodes, and inner-wall tuning of a potential curve to a target a.

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "latpair/errors.hpp"
#include "latpair/potentials.hpp"

namespace latpair {

struct ScatteringOptions {
  double r_end = 1.0e6;            // outer radius of the integration (a0)
  double fit_fraction = 0.1;       // line fit over [fit_fraction * r_end, r_end]
  double step = 4.0e-3;            // coarsest inner step (a0)
  double octave_radius = 30.0;     // beyond this radius the step grows with r
  double outer_relative_step = 2e-3;  // h / r reached in the outer region (coarsest level)
  double wall_penetration = 35.0;  // start where int kappa dr through the wall reaches this
  std::optional<double> r_start;   // hard-wall start (u = 0 there); otherwise found from the wall
  std::optional<double> align;     // radius forced onto the grid (potential discontinuity)
  int max_halvings = 5;
  double tolerance = 1e-9;         // relative change between step halvings
  double length_scale = 100.0;     // floor for relative comparisons (a0)
};

struct ScatteringResult {
  double scattering_length = 0.0;
  int nodes = 0;             // zero-energy nodes on (r_start, inf), outer node extrapolated
  double matching_radius = 0.0;
  double fit_residual = 0.0;  // rms deviation from the fitted line, relative to |A| r_end
  double r_start = 0.0;
  int halvings = 0;
  double last_change = 0.0;

  int bound_states() const { return nodes; }
};

namespace detail {

struct NumerovRun {
  double a = 0.0;
  int nodes = 0;
  double residual = 0.0;
};

inline double find_start(const std::function<double(double)>& v, double mu, const ScatteringOptions& o) {
  if (o.r_start) return *o.r_start;
  // innermost radius of the classically allowed zero-energy region, scanning outward
  const double r_probe_max = std::min(o.octave_radius, o.r_end);
  double r_turn = -1.0;
  const int n = 20000;
  for (int i = n; i >= 1; --i) {
    const double r = r_probe_max * i / n;
    if (v(r) > 0.0) {
      r_turn = r;
      break;
    }
  }
  if (r_turn < 0.0) return 0.0;  // no repulsive wall: regular at the origin
  // walk inward accumulating the WKB exponent
  double integral = 0.0, r = r_turn;
  const double dr = 1e-3;
  while (r > dr && integral < o.wall_penetration) {
    const double vv = v(r - 0.5 * dr);
    if (!std::isfinite(vv)) break;
    integral += std::sqrt(2.0 * mu * std::max(0.0, vv)) * dr;
    r -= dr;
  }
  return std::max(r, 0.0);
}

inline NumerovRun numerov_once(const std::function<double(double)>& v, double mu, double r0, double h0,
                               const ScatteringOptions& o) {
  double h = h0;
  // the outer relative step is refined together with the inner step
  const double rel_step = o.outer_relative_step * h0 / o.step;
  const double fit_lo = o.fit_fraction * o.r_end;
  auto f = [&](double r) {
    if (r <= 0.0) return 0.0;
    return 2.0 * mu * v(r);
  };
  auto fv = [&](double r) {
    if (o.align && std::abs(r - *o.align) < 1e-6 * h0) {
      // discontinuity on a grid node: use the mean of both sides
      const double eps = 1e-9 * std::max(1.0, *o.align);
      return 0.5 * (f(r - eps) + f(r + eps));
    }
    return f(r);
  };
  // Summed (difference) form of Numerov: w = (1 - h^2 f / 12) u and
  // dw_{n+1} = dw_n + h^2 f_n u_n, which keeps rounding errors from piling up
  // over the long, nearly linear tail.
  double u_prev2 = 0.0;  // u at r_cur - 2h, needed when the step doubles
  double u_prev = 0.0, f_prev = fv(r0);
  // radii are generated as r_base + n h so that an aligned radius lands on a node exactly
  double r_base = r0;
  long steps = 1;
  double r_cur = r0 + h, u_cur = 1e-30, f_cur = fv(r_cur);
  double w_cur = (1.0 - h * h / 12.0 * f_cur) * u_cur;
  double dw = w_cur - (1.0 - h * h / 12.0 * f_prev) * u_prev;
  int nodes = 0;
  auto sign_of = [](double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); };
  int last_sign = sign_of(u_cur);
  int since_doubling = 0;
  // least-squares accumulators for u = alpha t + beta, t = (r - mid) / r_end
  const double mid = 0.5 * (fit_lo + o.r_end);
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  long count = 0;
  while (r_cur < o.r_end - 1e-9 * o.r_end) {
    if (r_cur >= o.octave_radius && since_doubling >= 2 && 2.0 * h <= rel_step * r_cur) {
      // double the step: restart from the points r_cur - 2h and r_cur
      since_doubling = 0;
      h *= 2.0;
      f_prev = fv(r_cur - h);
      r_base = r_cur;
      steps = 0;
      u_prev = u_prev2;
      w_cur = (1.0 - h * h / 12.0 * f_cur) * u_cur;
      dw = w_cur - (1.0 - h * h / 12.0 * f_prev) * u_prev;
    }
    const double r_next = r_base + static_cast<double>(++steps) * h;
    const double f_next = fv(r_next);
    dw += h * h * f_cur * u_cur;
    w_cur += dw;
    const double u_next = w_cur / (1.0 - h * h / 12.0 * f_next);
    u_prev2 = u_prev;
    ++since_doubling;
    u_prev = u_cur, f_prev = f_cur;
    r_cur = r_next, u_cur = u_next, f_cur = f_next;
    if (std::abs(u_cur) > 1e200) {
      for (double* x : {&u_cur, &u_prev, &u_prev2, &w_cur, &dw}) *x *= 1e-200;
      sx = sy = sxx = sxy = syy = 0.0, count = 0;
    }
    const int s = sign_of(u_cur);
    if (s != 0 && last_sign != 0 && s != last_sign) ++nodes;
    if (s != 0) last_sign = s;
    if (r_cur >= fit_lo) {
      const double t = (r_cur - mid) / o.r_end;
      sx += t, sy += u_cur, sxx += t * t, sxy += t * u_cur, syy += u_cur * u_cur;
      ++count;
    }
  }
  if (count < 3) throw domain_error("scattering: fit window holds fewer than three grid points");
  const double nn = static_cast<double>(count);
  const double det = nn * sxx - sx * sx;
  const double alpha = (nn * sxy - sx * sy) / det;
  const double beta = (sy - alpha * sx) / nn;
  // u = alpha (r - mid) / r_end + beta vanishes at r = mid - beta r_end / alpha
  NumerovRun run;
  run.a = mid - beta * o.r_end / alpha;
  const double sse = syy - 2 * alpha * sxy - 2 * beta * sy + alpha * alpha * sxx + 2 * alpha * beta * sx + nn * beta * beta;
  run.residual = std::sqrt(std::max(0.0, sse) / nn) / std::abs(alpha);
  run.nodes = nodes + (run.a > r_cur ? 1 : 0);
  return run;
}

}  // namespace detail

/// Scattering length and node count of the zero-energy solution for V(r) (hartree, V -> 0).
inline ScatteringResult extract_scattering_length(const std::function<double(double)>& v, double mu,
                                                  ScatteringOptions o = {}) {
  if (!(mu > 0.0)) throw domain_error("scattering: reduced mass must be positive");
  const double fit_lo = o.fit_fraction * o.r_end;
  // the tail must be negligible over the fit window: |2 mu V| r^2 << 1
  const double tail = std::abs(2.0 * mu * v(fit_lo)) * fit_lo * fit_lo;
  if (!(tail < 1e-3)) {
    std::ostringstream os;
    os << "scattering: potential not negligible at the fit radius " << fit_lo << " a0 (|2 mu V| r^2 = " << tail
       << "); increase r_end";
    throw domain_error(os.str());
  }
  // the step may only start growing once the aligned radius has been passed
  if (o.align) o.octave_radius = std::max(o.octave_radius, *o.align + 4.0 * o.step);
  double r0 = detail::find_start(v, mu, o);
  double h = o.step;
  if (o.align) {
    if (!(*o.align > r0)) throw domain_error("scattering: aligned radius lies inside the start radius");
    const double steps = std::ceil((*o.align - r0) / h - 1e-12);
    h = (*o.align - r0) / steps;
    if (h > o.step * (1.0 + 1e-12)) h = o.step;
  }
  ScatteringResult res;
  res.r_start = r0;
  res.matching_radius = fit_lo;
  auto prev = detail::numerov_once(v, mu, r0, h, o);
  double prev_extrap = prev.a;
  for (int k = 1; k <= o.max_halvings; ++k) {
    h *= 0.5;
    const auto cur = detail::numerov_once(v, mu, r0, h, o);
    // Richardson: Numerov is fourth order, but a jump of V on a node drops it to second
    const double extrap = cur.a + (cur.a - prev.a) / (o.align ? 3.0 : 15.0);
    const double change = std::abs(extrap - prev_extrap);
    res.scattering_length = extrap;
    res.nodes = cur.nodes;
    res.fit_residual = cur.residual;
    res.halvings = k;
    res.last_change = change / std::max(std::abs(extrap), o.length_scale);
    if (k >= 2 && res.last_change < o.tolerance) break;
    prev = cur;
    prev_extrap = extrap;
  }
  return res;
}

inline ScatteringResult extract_scattering_length(const PotentialCurve& curve, double mu, ScatteringOptions o = {}) {
  return extract_scattering_length([&curve](double r) { return curve(r); }, mu, o);
}

struct TuningOptions {
  ScatteringOptions scattering;
  double length_scale = 1000.0;  // L in the monotone phase atan(a/L) - pi N
  double tolerance = 1e-6;       // on |a - target| / max(|target|, length_scale)
  double initial_step = 0.01;    // a0
  std::optional<int> target_nodes;  // allow a branch change to this node count
  std::optional<WallWindow> window;
};

struct TuningResult {
  double shift = 0.0;
  PotentialCurve curve;
  ScatteringResult scattering;
  int evaluations = 0;
};

/// Inner-wall shift s such that the shifted curve has scattering length `target`.
/// The search runs on the continuous, increasing phase atan(a/L) - pi N(s), so
/// the poles of a(s) never enter the root bracket.
inline TuningResult tune_to_scattering_length(const PotentialCurve& curve, double mu, double target,
                                              TuningOptions o = {}) {
  const WallWindow window = o.window.value_or(curve.window());
  const double s_limit = 0.999 * window.max_shift();
  const double L = o.length_scale;
  int evaluations = 0;
  auto solve = [&](double s) {
    ++evaluations;
    return extract_scattering_length(curve.shifted(s, window), mu, o.scattering);
  };
  auto phase = [&](const ScatteringResult& r) {
    return std::atan(r.scattering_length / L) - constants::pi * r.nodes;
  };
  const auto at0 = solve(0.0);
  const int branch = o.target_nodes.value_or(at0.nodes);
  const double goal = std::atan(target / L) - constants::pi * branch;
  auto g = [&](double s) { return phase(solve(s)) - goal; };
  const double g0 = phase(at0) - goal;
  TuningResult out{0.0, curve.shifted(0.0, window), at0, 0};
  auto done = [&](const ScatteringResult& r) {
    return r.nodes == branch &&
           std::abs(r.scattering_length - target) / std::max(std::abs(target), L) <= o.tolerance;
  };
  if (done(at0)) {
    out.evaluations = evaluations;
    return out;
  }
  // phase increases with s: step toward the goal, doubling, until the sign flips
  const double dir = g0 < 0.0 ? 1.0 : -1.0;
  double a = 0.0, ga = g0, step = o.initial_step;
  double b = 0.0, gb = g0;
  std::optional<double> pole;
  int last_nodes = at0.nodes;
  while (true) {
    b = a + dir * step;
    if (std::abs(b) > s_limit) b = dir * s_limit;
    const auto rb = solve(b);
    gb = phase(rb) - goal;
    if (rb.nodes != last_nodes && !pole) pole = 0.5 * (a + b);
    last_nodes = rb.nodes;
    if ((gb > 0.0) != (ga > 0.0)) break;
    if (std::abs(b) >= s_limit) {
      std::ostringstream os;
      os << "cannot reach a_sc = " << target << " a0 within the shift window |s| < " << s_limit << " a0";
      if (pole) os << " (a pole of a(s) lies near s = " << *pole << " a0; allow a branch change)";
      throw branch_error(os.str(), pole.value_or(std::numeric_limits<double>::quiet_NaN()));
    }
    a = b, ga = gb;
    step *= 2.0;
  }
  double lo = std::min(a, b), hi = std::max(a, b);
  boost::uintmax_t iters = 200;
  auto tol = [](double x, double y) { return std::abs(x - y) <= 1e-15 * std::max({1.0, std::abs(x), std::abs(y)}); };
  const auto [x0, x1] = boost::math::tools::toms748_solve(g, lo, hi, tol, iters);
  // pick the end of the final bracket that best meets the target
  const auto r0 = solve(x0), r1 = solve(x1);
  const bool use1 = std::abs(r1.scattering_length - target) < std::abs(r0.scattering_length - target);
  out.shift = use1 ? x1 : x0;
  out.scattering = use1 ? r1 : r0;
  out.curve = curve.shifted(out.shift, window);
  out.evaluations = evaluations;
  return out;
}

}  // namespace latpair
