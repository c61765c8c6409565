#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace mfgprox {

struct RootOptions {
  double tol_abs = 1e-12;
  double tol_rel = 1e-12;
  int max_iter = 200;
};

struct RootResult {
  double x = 0.0;
  int iterations = 0;
  bool converged = false;
  double lo = 0.0;
  double hi = 0.0;
};

class RootError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Root of an increasing function on [lo, hi] with fn(lo) <= 0 <= fn(hi).
/// fn(x) returns {value, derivative}; a non-finite or non-positive derivative
/// makes that step a bisection. Newton steps leaving the bracket are rejected.
template <class Fn>
RootResult solve_increasing(Fn&& fn, double lo, double hi, double x0, const RootOptions& opt = {}) {
  RootResult r;
  auto width_ok = [&](double a, double b, double x) {
    return b - a <= opt.tol_abs + opt.tol_rel * std::abs(x);
  };
  auto bisect = [&](double a, double b) {
    if (a > 0.0 && b > 4.0 * a) return std::sqrt(a * b);
    return 0.5 * (a + b);
  };
  double x = (x0 > lo && x0 < hi) ? x0 : bisect(lo, hi);
  for (int it = 1; it <= opt.max_iter; ++it) {
    r.iterations = it;
    const auto [v, d] = fn(x);
    if (v == 0.0) {
      r.x = x;
      r.converged = true;
      break;
    }
    if (v < 0.0 || std::isnan(v)) {
      lo = x;
    } else {
      hi = x;
    }
    if (width_ok(lo, hi, x)) {
      r.x = 0.5 * (lo + hi);
      r.converged = true;
      break;
    }
    double next = bisect(lo, hi);
    if (std::isfinite(v) && std::isfinite(d) && d > 0.0) {
      const double xn = x - v / d;
      if (xn > lo && xn < hi) {
        if (std::abs(xn - x) <= opt.tol_abs + opt.tol_rel * std::abs(xn)) {
          r.x = xn;
          r.converged = true;
          break;
        }
        next = xn;
      }
    }
    x = next;
  }
  r.lo = lo;
  r.hi = hi;
  if (!r.converged) {
    throw RootError("root solver: no convergence after " + std::to_string(opt.max_iter) +
                    " iterations, bracket [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return r;
}

/// Doubles hi (starting at start > lo) until fn(hi).first > 0.
template <class Fn>
double grow_upper(Fn&& fn, double lo, double start, int max_doublings = 2000) {
  double hi = start > lo ? start : lo + 1.0;
  for (int k = 0; k < max_doublings; ++k) {
    const double v = fn(hi).first;
    if (v > 0.0) return hi;
    hi = lo + 2.0 * (hi - lo);
    if (!std::isfinite(hi)) break;
  }
  throw RootError("root solver: could not bracket a sign change above " + std::to_string(lo));
}

}  // namespace mfgprox
