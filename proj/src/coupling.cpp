#include "mfgprox/coupling.hpp"

#include <cmath>
#include <stdexcept>

namespace mfgprox {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

double Coupling::conj_eval(int, double) const {
  throw std::logic_error("coupling '" + name() + "' has no conjugate");
}

double Coupling::conj_deriv(int, double) const {
  throw std::logic_error("coupling '" + name() + "' has no conjugate derivative");
}

// Log

double LogCoupling::F(int node, double m) const {
  if (m < 0.0) return kInf;
  if (m == 0.0) return 0.0;
  return m * std::log(m) - m - m * s_[node];
}

double LogCoupling::f(int node, double m) const {
  if (m <= 0.0) return -kInf;
  return std::log(m) - s_[node];
}

double LogCoupling::df(int, double m) const { return m > 0.0 ? 1.0 / m : kInf; }

double LogCoupling::conj_eval(int node, double eta) const { return std::exp(eta + s_[node]); }
double LogCoupling::conj_deriv(int node, double eta) const { return std::exp(eta + s_[node]); }
double LogCoupling::conj_deriv2(int node, double eta) const { return std::exp(eta + s_[node]); }

// Quadratic

QuadraticCoupling::QuadraticCoupling(Eigen::VectorXd mbar, double r) : mbar_(std::move(mbar)), r_(r) {
  if (!(r > 0.0)) throw std::invalid_argument("QuadraticCoupling: r must be positive");
}

double QuadraticCoupling::F(int node, double m) const {
  if (m < 0.0) return kInf;
  const double d = m - mbar_[node];
  return 0.5 * r_ * d * d;
}

double QuadraticCoupling::f(int node, double m) const { return r_ * (m - mbar_[node]); }

double QuadraticCoupling::conj_eval(int node, double eta) const {
  const double mb = mbar_[node];
  if (eta >= -r_ * mb) return eta * eta / (2.0 * r_) + eta * mb;
  return -0.5 * r_ * mb * mb;
}

double QuadraticCoupling::conj_deriv(int node, double eta) const {
  return std::max(0.0, mbar_[node] + eta / r_);
}

double QuadraticCoupling::conj_deriv2(int node, double eta) const {
  return mbar_[node] + eta / r_ > 0.0 ? 1.0 / r_ : 0.0;
}

// Cubic

double CubicCoupling::F(int node, double m) const {
  if (m < 0.0) return kInf;
  return m * m * m / 3.0 - m * hbar_[node];
}

double CubicCoupling::f(int node, double m) const { return m * m - hbar_[node]; }

double CubicCoupling::conj_eval(int node, double eta) const {
  const double t = std::max(eta + hbar_[node], 0.0);
  return 2.0 / 3.0 * t * std::sqrt(t);
}

double CubicCoupling::conj_deriv(int node, double eta) const {
  return std::sqrt(std::max(eta + hbar_[node], 0.0));
}

double CubicCoupling::conj_deriv2(int node, double eta) const {
  const double t = eta + hbar_[node];
  return t > 0.0 ? 0.5 / std::sqrt(t) : kInf;
}

// User callables

FunctionCoupling::FunctionCoupling(CouplingFunctions fns) : fns_(std::move(fns)) {
  if (!fns_.F || !fns_.f) throw std::invalid_argument("FunctionCoupling: F and f are required");
}

double FunctionCoupling::F(int node, double m) const { return m < 0.0 ? kInf : fns_.F(node, m); }

double FunctionCoupling::df(int node, double m) const { return fns_.df ? fns_.df(node, m) : kNaN; }

double FunctionCoupling::conj_eval(int node, double eta) const {
  if (!fns_.conj_eval) return Coupling::conj_eval(node, eta);
  return fns_.conj_eval(node, eta);
}

double FunctionCoupling::conj_deriv(int node, double eta) const {
  if (!fns_.conj_deriv) return Coupling::conj_deriv(node, eta);
  return fns_.conj_deriv(node, eta);
}

double FunctionCoupling::conj_deriv2(int node, double eta) const {
  return fns_.conj_deriv2 ? fns_.conj_deriv2(node, eta) : kNaN;
}

}  // namespace mfgprox
