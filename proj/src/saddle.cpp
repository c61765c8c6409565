#include "mfgprox/saddle.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <stdexcept>

namespace mfgprox {

namespace {

ScalarField minus_laplacian(const ScalarField& y) {
  ScalarField out = laplacian(y);
  out.values = -out.values;
  return out;
}

void remove_mean(Eigen::VectorXd& v) { v.array() -= ordered_sum(v) / static_cast<double>(v.size()); }

}  // namespace

ConstraintOperator::ConstraintOperator(TorusGrid grid, double nu) : grid_(grid), nu_(nu) {
  if (!(nu >= 0.0)) throw std::invalid_argument("ConstraintOperator: nu must be >= 0");
}

std::pair<ScalarField, double> ConstraintOperator::apply(const ScalarField& m,
                                                         const FluxField& w) const {
  require_same_grid(grid_, m.grid, "G");
  require_same_grid(grid_, w.grid, "G");
  ScalarField r = apply_A(m, nu_);
  r.values += apply_B(w).values;
  return {std::move(r), mass(m)};
}

std::pair<ScalarField, FluxField> ConstraintOperator::adjoint(const ScalarField& u,
                                                              double lambda) const {
  require_same_grid(grid_, u.grid, "G*");
  ScalarField a = apply_A(u, nu_);
  const double h = grid_.h();
  a.values.array() += h * h * lambda;
  return {std::move(a), apply_Bstar(u)};
}

SaddleMethod parse_saddle_method(const std::string& name) {
  if (name == "spectral") return SaddleMethod::Spectral;
  if (name == "dense") return SaddleMethod::Dense;
  if (name == "cg") return SaddleMethod::CG;
  throw std::invalid_argument("unknown linear solver '" + name + "' (spectral, dense, cg)");
}

std::string to_string(SaddleMethod m) {
  switch (m) {
    case SaddleMethod::Spectral: return "spectral";
    case SaddleMethod::Dense: return "dense";
    case SaddleMethod::CG: return "cg";
  }
  return "?";
}

SaddleSolver::SaddleSolver(TorusGrid grid, double nu, SaddleOptions opt)
    : grid_(grid), nu_(nu), opt_(opt) {
  if (!(nu >= 0.0)) throw std::invalid_argument("SaddleSolver: nu must be >= 0");
  const int n = grid.n();
  const double inv_h2 = 1.0 / (grid.h() * grid.h());
  Eigen::MatrixXd l1 = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    l1(i, i) = 2.0 * inv_h2;
    l1(i, grid.wrap(i + 1)) -= inv_h2;
    l1(i, grid.wrap(i - 1)) -= inv_h2;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l1);
  q1_ = es.eigenvectors();
  e1_ = es.eigenvalues();
  // The smallest eigenvalue belongs to the constant vector.
  inv_mu_.resize(n, n);
  for (int b = 0; b < n; ++b) {
    for (int a = 0; a < n; ++a) {
      const double mu = e1_[a] + e1_[b];
      inv_mu_(a, b) = (a == 0 && b == 0) ? 0.0 : 1.0 / (nu * nu * mu * mu + 2.0 * mu);
    }
  }

  if (opt_.method == SaddleMethod::Dense) {
    if (n > 40) throw std::invalid_argument("SaddleSolver: dense method limited to N <= 40");
    const int sz = grid.size();
    Eigen::MatrixXd mat(sz, sz);
    ScalarField e(grid);
    for (int k = 0; k < sz; ++k) {
      e.values.setZero();
      e[k] = 1.0;
      mat.col(k) = apply_M(e).values;
    }
    // Deflate the constant kernel with a rank-one shift.
    const double shift = mat.diagonal().mean();
    mat.array() += shift / static_cast<double>(sz);
    dense_ = std::make_shared<Eigen::LLT<Eigen::MatrixXd>>(mat);
    if (dense_->info() != Eigen::Success) {
      throw std::runtime_error("SaddleSolver: dense Cholesky factorization failed");
    }
  }
}

double SaddleSolver::max_eigenvalue() const {
  const double mu = 2.0 * e1_.maxCoeff();
  return nu_ * nu_ * mu * mu + 2.0 * mu;
}

ScalarField SaddleSolver::apply_M(const ScalarField& x) const {
  require_same_grid(grid_, x.grid, "SaddleSolver::apply_M");
  ScalarField lx = minus_laplacian(x);
  ScalarField out = minus_laplacian(lx);
  out.values *= nu_ * nu_;
  out.values += 2.0 * lx.values;
  return out;
}

Eigen::VectorXd SaddleSolver::solve_spectral(const Eigen::VectorXd& r) const {
  const int n = grid_.n();
  Eigen::Map<const Eigen::MatrixXd> rm(r.data(), n, n);
  Eigen::MatrixXd hat = q1_.transpose() * rm * q1_;
  hat.array() *= inv_mu_.array();
  Eigen::MatrixXd x = q1_ * hat * q1_.transpose();
  return Eigen::Map<Eigen::VectorXd>(x.data(), x.size());
}

Eigen::VectorXd SaddleSolver::solve_dense(const Eigen::VectorXd& r) const { return dense_->solve(r); }

Eigen::VectorXd SaddleSolver::solve_cg(const Eigen::VectorXd& r) const {
  // M has a constant diagonal, so the Jacobi preconditioner is a scaling.
  const double inv_h2 = 1.0 / (grid_.h() * grid_.h());
  const double diag = nu_ * nu_ * 20.0 * inv_h2 * inv_h2 + 8.0 * inv_h2;
  auto mul = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd out = apply_M(ScalarField(grid_, v)).values;
    remove_mean(out);
    return out;
  };
  Eigen::VectorXd x = Eigen::VectorXd::Zero(r.size());
  Eigen::VectorXd res = r;
  const double rnorm = r.norm();
  if (rnorm == 0.0) return x;
  Eigen::VectorXd z = res / diag;
  Eigen::VectorXd p = z;
  double rz = res.dot(z);
  for (int it = 0; it < opt_.cg_maxit; ++it) {
    const Eigen::VectorXd ap = mul(p);
    const double alpha = rz / p.dot(ap);
    x += alpha * p;
    res -= alpha * ap;
    if (res.norm() <= opt_.cg_tol * rnorm) return x;
    z = res / diag;
    const double rz_new = res.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  throw std::runtime_error("SaddleSolver: CG did not converge in " + std::to_string(opt_.cg_maxit) +
                           " iterations (relative residual " + std::to_string(res.norm() / rnorm) +
                           ")");
}

ScalarField SaddleSolver::solve(const ScalarField& rhs) const {
  require_same_grid(grid_, rhs.grid, "SaddleSolver::solve");
  ++count_;
  Eigen::VectorXd r = rhs.values;
  remove_mean(r);
  Eigen::VectorXd x;
  switch (opt_.method) {
    case SaddleMethod::Spectral: x = solve_spectral(r); break;
    case SaddleMethod::Dense: x = solve_dense(r); break;
    case SaddleMethod::CG: x = solve_cg(r); break;
  }
  remove_mean(x);
  return ScalarField(grid_, std::move(x));
}

std::pair<ScalarField, double> solve_GGstar(const SaddleSolver& solver, const ScalarField& r1,
                                            double r2) {
  const double h = solver.grid().h();
  return {solver.solve(r1), r2 / (h * h)};
}

PrimalPair project_V(const SaddleSolver& solver, const PrimalPair& x) {
  const ConstraintOperator G(solver.grid(), solver.nu());
  auto [r1, r2] = G.apply(x.m, x.w);
  auto [u, lambda] = solve_GGstar(solver, r1, r2 - 1.0);
  auto [gm, gw] = G.adjoint(u, lambda);
  PrimalPair out = x;
  out.m.values -= gm.values;
  out.w.values -= gw.values;
  return out;
}

PrimalPair prox_psistar_unsplit(const SaddleSolver& solver, const PrimalPair& sigma, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("prox_psistar_unsplit: gamma must be positive");
  PrimalPair scaled = sigma;
  scaled.m.values /= gamma;
  scaled.w.values /= gamma;
  const PrimalPair p = project_V(solver, scaled);
  PrimalPair out = sigma;
  out.m.values -= gamma * p.m.values;
  out.w.values -= gamma * p.w.values;
  return out;
}

Eigen::VectorXd flatten(const ScalarField& m, const FluxField& w) {
  const Eigen::Index n = m.values.size();
  Eigen::VectorXd v(5 * n);
  v.head(n) = m.values;
  v.tail(4 * n) = Eigen::Map<const Eigen::VectorXd>(w.values.data(), 4 * n);
  return v;
}

PrimalPair unflatten(const TorusGrid& g, const Eigen::VectorXd& v) {
  const Eigen::Index n = g.size();
  if (v.size() != 5 * n) throw std::invalid_argument("unflatten: size mismatch");
  PrimalPair out(g);
  out.m.values = v.head(n);
  out.w.values = Eigen::Map<const Eigen::Matrix4Xd>(v.data() + n, 4, n);
  return out;
}

LinearMap identity_map(Eigen::Index dim) {
  auto id = [](const Eigen::VectorXd& x) { return x; };
  return {dim, dim, id, id};
}

LinearMap constraint_map(const TorusGrid& grid, double nu) {
  const Eigen::Index n = grid.size();
  LinearMap op;
  op.in_dim = 5 * n;
  op.out_dim = n + 1;
  op.apply = [grid, nu, n](const Eigen::VectorXd& x) {
    const PrimalPair p = unflatten(grid, x);
    const auto [r1, r2] = ConstraintOperator(grid, nu).apply(p.m, p.w);
    Eigen::VectorXd out(n + 1);
    out.head(n) = r1.values;
    out[n] = r2;
    return out;
  };
  op.adjoint = [grid, nu, n](const Eigen::VectorXd& y) {
    const ScalarField u(grid, Eigen::VectorXd(y.head(n)));
    const auto [a, b] = ConstraintOperator(grid, nu).adjoint(u, y[n]);
    return flatten(a, b);
  };
  return op;
}

LinearMap divergence_map(const TorusGrid& grid) {
  const Eigen::Index n = grid.size();
  LinearMap op;
  op.in_dim = 4 * n;
  op.out_dim = n;
  op.apply = [grid, n](const Eigen::VectorXd& x) {
    const FluxField w(grid, Eigen::Map<const Eigen::Matrix4Xd>(x.data(), 4, n));
    return apply_B(w).values;
  };
  op.adjoint = [grid, n](const Eigen::VectorXd& y) {
    const FluxField w = apply_Bstar(ScalarField(grid, y));
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(w.values.data(), 4 * n));
  };
  return op;
}

LinearMap diffusion_map(const TorusGrid& grid, double nu) {
  const Eigen::Index n = grid.size();
  auto a = [grid, nu](const Eigen::VectorXd& x) { return apply_A(ScalarField(grid, x), nu).values; };
  return {n, n, a, a};
}

Eigen::MatrixXd to_dense(const LinearMap& op) {
  Eigen::MatrixXd mat(op.out_dim, op.in_dim);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(op.in_dim);
  for (Eigen::Index k = 0; k < op.in_dim; ++k) {
    e[k] = 1.0;
    mat.col(k) = op.apply(e);
    e[k] = 0.0;
  }
  return mat;
}

NormEstimate estimate_norm(const LinearMap& op, std::uint64_t seed, double rel_tol, int max_iter) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXd x(op.in_dim);
  for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = dist(rng);
  x.normalize();
  NormEstimate est;
  double prev = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd y = op.adjoint(op.apply(x));
    const double ny = y.norm();
    est.iterations = it;
    if (ny == 0.0) {
      est.norm = 0.0;
      return est;
    }
    est.norm = std::sqrt(ny);
    x = y / ny;
    if (it > 1 && std::abs(est.norm - prev) <= rel_tol * est.norm) break;
    prev = est.norm;
  }
  return est;
}

}  // namespace mfgprox
