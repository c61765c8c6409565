#pragma once

#include "mfgprox/grid.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>

namespace mfgprox {

/// G(m, w) = (nu L m + B w, h^2 sum m) with L = -Lap, and its adjoint
/// G*(u, lambda) = (nu L u + h^2 lambda 1, B* u).
class ConstraintOperator {
 public:
  ConstraintOperator(TorusGrid grid, double nu);

  const TorusGrid& grid() const { return grid_; }
  double nu() const { return nu_; }

  std::pair<ScalarField, double> apply(const ScalarField& m, const FluxField& w) const;
  std::pair<ScalarField, FluxField> adjoint(const ScalarField& u, double lambda) const;

 private:
  TorusGrid grid_;
  double nu_;
};

enum class SaddleMethod { Spectral, Dense, CG };

SaddleMethod parse_saddle_method(const std::string& name);
std::string to_string(SaddleMethod m);

struct SaddleOptions {
  SaddleMethod method = SaddleMethod::Spectral;
  double cg_tol = 1e-10;
  int cg_maxit = 5000;
};

/// Solves (nu^2 L^2 + 2 L) x = r on zero-mean fields (the constant mode is
/// removed from r and from x).
class SaddleSolver {
 public:
  SaddleSolver(TorusGrid grid, double nu, SaddleOptions opt = {});

  ScalarField solve(const ScalarField& rhs) const;
  ScalarField apply_M(const ScalarField& x) const;

  const TorusGrid& grid() const { return grid_; }
  double nu() const { return nu_; }
  const SaddleOptions& options() const { return opt_; }
  /// Number of solve() calls so far.
  std::int64_t solve_count() const { return count_.load(); }
  /// Largest eigenvalue of M, from the 1-D spectrum.
  double max_eigenvalue() const;

 private:
  Eigen::VectorXd solve_spectral(const Eigen::VectorXd& r) const;
  Eigen::VectorXd solve_dense(const Eigen::VectorXd& r) const;
  Eigen::VectorXd solve_cg(const Eigen::VectorXd& r) const;

  TorusGrid grid_;
  double nu_;
  SaddleOptions opt_;
  Eigen::MatrixXd q1_;      // eigenvectors of the 1-D periodic second difference
  Eigen::VectorXd e1_;      // its eigenvalues
  Eigen::MatrixXd inv_mu_;  // 1 / M in the eigenbasis, 0 on the constant mode
  std::shared_ptr<Eigen::LLT<Eigen::MatrixXd>> dense_;
  mutable std::atomic<std::int64_t> count_{0};
};

/// Unknown pair of the unsplit formulation: a density-like and a flux-like field.
struct PrimalPair {
  ScalarField m;
  FluxField w;
  explicit PrimalPair(const TorusGrid& g) : m(g), w(g) {}
  PrimalPair(ScalarField m_, FluxField w_) : m(std::move(m_)), w(std::move(w_)) {}
};

/// (u, lambda) = (G G*)^{-1} (r1, r2); G G* = diag(M, h^2).
std::pair<ScalarField, double> solve_GGstar(const SaddleSolver& solver, const ScalarField& r1,
                                            double r2);

/// Orthogonal projection onto V = {G(m, w) = (0, 1)}.
PrimalPair project_V(const SaddleSolver& solver, const PrimalPair& x);

/// prox of gamma psi* with psi the indicator of V: sigma - gamma P_V(sigma / gamma).
PrimalPair prox_psistar_unsplit(const SaddleSolver& solver, const PrimalPair& sigma, double gamma);

/// Matrix-free linear map on flat vectors. Fields flatten as [m (N^2), w (4 N^2, node-major)].
struct LinearMap {
  Eigen::Index in_dim = 0;
  Eigen::Index out_dim = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> adjoint;
};

LinearMap identity_map(Eigen::Index dim);
/// G : (m, w) -> (A m + B w, h^2 sum m).
LinearMap constraint_map(const TorusGrid& grid, double nu);
LinearMap divergence_map(const TorusGrid& grid);
LinearMap diffusion_map(const TorusGrid& grid, double nu);

/// Dense matrix of a map, column by column. For tests at small sizes.
Eigen::MatrixXd to_dense(const LinearMap& op);

struct NormEstimate {
  double norm = 0.0;
  int iterations = 0;
};

/// Spectral norm by power iteration on op* op from a seeded random start;
/// stops at relative change < rel_tol or after max_iter iterations.
NormEstimate estimate_norm(const LinearMap& op, std::uint64_t seed = 12345, double rel_tol = 1e-6,
                           int max_iter = 500);

Eigen::VectorXd flatten(const ScalarField& m, const FluxField& w);
PrimalPair unflatten(const TorusGrid& g, const Eigen::VectorXd& v);

}  // namespace mfgprox
