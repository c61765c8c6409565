#pragma once

#include <Eigen/Core>

#include <functional>
#include <limits>
#include <memory>
#include <string>

namespace mfgprox {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Local congestion cost F(x, m) at each grid node, with its derivatives and
/// (optionally) its Fenchel conjugate in m. F is +inf for m < 0.
class Coupling {
 public:
  virtual ~Coupling() = default;

  virtual std::string name() const = 0;
  virtual double F(int node, double m) const = 0;
  /// dF/dm, for m > 0 (and m = 0 when f0_finite()).
  virtual double f(int node, double m) const = 0;
  /// d2F/dm2; NaN when unknown (root finders then skip Newton steps).
  virtual double df(int node, double) const { (void)node; return std::numeric_limits<double>::quiet_NaN(); }

  virtual bool f0_finite() const = 0;
  /// F'(0); -inf when !f0_finite().
  virtual double f0(int node) const = 0;

  virtual bool has_conjugate() const { return false; }
  /// F*(x, eta) = sup_{m >= 0} m eta - F(x, m).
  virtual double conj_eval(int node, double eta) const;
  /// (F*)'(eta), the inverse of f extended by 0 below f(0).
  virtual double conj_deriv(int node, double eta) const;
  /// (F*)''(eta); NaN when unknown.
  virtual double conj_deriv2(int, double) const { return std::numeric_limits<double>::quiet_NaN(); }
};

using CouplingPtr = std::shared_ptr<const Coupling>;

/// F = m log m - m - m S(x). F'(0) = -inf.
class LogCoupling final : public Coupling {
 public:
  explicit LogCoupling(Eigen::VectorXd s) : s_(std::move(s)) {}
  std::string name() const override { return "log"; }
  double F(int node, double m) const override;
  double f(int node, double m) const override;
  double df(int node, double m) const override;
  bool f0_finite() const override { return false; }
  double f0(int) const override { return -kInf; }
  bool has_conjugate() const override { return true; }
  double conj_eval(int node, double eta) const override;
  double conj_deriv(int node, double eta) const override;
  double conj_deriv2(int node, double eta) const override;
  const Eigen::VectorXd& source() const { return s_; }

 private:
  Eigen::VectorXd s_;
};

/// F = r (m - mbar(x))^2 / 2.
class QuadraticCoupling final : public Coupling {
 public:
  QuadraticCoupling(Eigen::VectorXd mbar, double r = 1.0);
  std::string name() const override { return "quadratic"; }
  double F(int node, double m) const override;
  double f(int node, double m) const override;
  double df(int, double) const override { return r_; }
  bool f0_finite() const override { return true; }
  double f0(int node) const override { return -r_ * mbar_[node]; }
  bool has_conjugate() const override { return true; }
  double conj_eval(int node, double eta) const override;
  double conj_deriv(int node, double eta) const override;
  double conj_deriv2(int node, double eta) const override;
  const Eigen::VectorXd& target() const { return mbar_; }
  double r() const { return r_; }

 private:
  Eigen::VectorXd mbar_;
  double r_;
};

/// F = m^3 / 3 - m Hbar(x), i.e. f = m^2 - Hbar.
class CubicCoupling final : public Coupling {
 public:
  explicit CubicCoupling(Eigen::VectorXd hbar) : hbar_(std::move(hbar)) {}
  std::string name() const override { return "cubic"; }
  double F(int node, double m) const override;
  double f(int node, double m) const override;
  double df(int, double m) const override { return 2.0 * m; }
  bool f0_finite() const override { return true; }
  double f0(int node) const override { return -hbar_[node]; }
  bool has_conjugate() const override { return true; }
  double conj_eval(int node, double eta) const override;
  double conj_deriv(int node, double eta) const override;
  double conj_deriv2(int node, double eta) const override;
  const Eigen::VectorXd& potential() const { return hbar_; }

 private:
  Eigen::VectorXd hbar_;
};

/// Coupling assembled from user callables. Unset optional callables leave the
/// corresponding capability off.
struct CouplingFunctions {
  std::string name = "custom";
  std::function<double(int, double)> F;
  std::function<double(int, double)> f;
  std::function<double(int, double)> df;
  bool f0_finite = true;
  std::function<double(int, double)> conj_eval;
  std::function<double(int, double)> conj_deriv;
  std::function<double(int, double)> conj_deriv2;
};

class FunctionCoupling final : public Coupling {
 public:
  explicit FunctionCoupling(CouplingFunctions fns);
  std::string name() const override { return fns_.name; }
  double F(int node, double m) const override;
  double f(int node, double m) const override { return fns_.f(node, m); }
  double df(int node, double m) const override;
  bool f0_finite() const override { return fns_.f0_finite; }
  double f0(int node) const override { return fns_.f0_finite ? fns_.f(node, 0.0) : -kInf; }
  bool has_conjugate() const override { return bool(fns_.conj_eval) && bool(fns_.conj_deriv); }
  double conj_eval(int node, double eta) const override;
  double conj_deriv(int node, double eta) const override;
  double conj_deriv2(int node, double eta) const override;

 private:
  CouplingFunctions fns_;
};

}  // namespace mfgprox
