#pragma once

// Independent reference computations used by the unit and acceptance tests.

#include "mfgprox/coupling.hpp"
#include "mfgprox/grid.hpp"

#include <cmath>
#include <functional>
#include <limits>

namespace mfgprox::oracle {

/// Minimizes a convex function on [a, b]: uniform scan, then golden section
/// inside the cells around the best sample. Returns the argmin.
inline double scan_minimize(const std::function<double(double)>& fn, double a, double b,
                            int samples = 200, double tol = 1e-12) {
  double best_x = a;
  double best_v = fn(a);
  const double step = (b - a) / samples;
  for (int k = 1; k <= samples; ++k) {
    const double x = a + k * step;
    const double v = fn(x);
    if (v < best_v) {
      best_v = v;
      best_x = x;
    }
  }
  double lo = std::max(a, best_x - step);
  double hi = std::min(b, best_x + step);
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
  double f1 = fn(x1), f2 = fn(x2);
  while (hi - lo > tol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = fn(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = fn(x2);
    }
  }
  const double mid = 0.5 * (lo + hi);
  // Endpoints can win for functions minimized on the boundary.
  double x = mid, v = fn(mid);
  if (fn(a) < v) { x = a; v = fn(a); }
  if (fn(b) < v) { x = b; }
  return x;
}

struct ProxOracleResult {
  double p = 0.0;
  double t = 0.0;
  Vec4 v = Vec4::Zero();
  double value = 0.0;
};

/// Brute-force prox of gamma (F + bhat + indicator [0, d]) at (m, w), searching
/// v on the segment [0, P_K w]: (p, t) over [0, p_max] x [0, 1].
inline ProxOracleResult prox_oracle(double m, const Vec4& w, double q, double gamma, double d,
                                    const Coupling& F, int node, double p_max) {
  const Vec4 pk(std::max(w[0], 0.0), std::min(w[1], 0.0), std::max(w[2], 0.0), std::min(w[3], 0.0));
  const double a = pk.norm();
  const double inf = std::numeric_limits<double>::infinity();
  auto objective = [&](double p, double t) {
    if (p < 0.0 || p > d) return inf;
    double kin = 0.0;
    if (p == 0.0) {
      if (t * a != 0.0) return inf;
    } else {
      kin = std::pow(t * a, q) / (q * std::pow(p, q - 1.0));
    }
    const double fp = F.F(node, p);
    if (!std::isfinite(fp)) return inf;
    const Vec4 v = t * pk;
    return gamma * (fp + kin) + 0.5 * ((p - m) * (p - m) + (v - w).squaredNorm());
  };
  auto best_t = [&](double p) {
    if (a == 0.0 || p == 0.0) return 0.0;
    return scan_minimize([&](double t) { return objective(p, t); }, 0.0, 1.0);
  };
  const double hi = std::min(p_max, d);
  const double p = scan_minimize([&](double pp) { return objective(pp, best_t(pp)); }, 0.0, hi);
  ProxOracleResult r;
  r.p = p;
  r.t = best_t(p);
  r.v = r.t * pk;
  r.value = objective(r.p, r.t);
  return r;
}

/// Root of an increasing scalar function by plain bisection.
inline double bisect(const std::function<double(double)>& fn, double lo, double hi, double tol = 1e-14) {
  for (int k = 0; k < 400 && hi - lo > tol; ++k) {
    const double mid = 0.5 * (lo + hi);
    (fn(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace mfgprox::oracle
