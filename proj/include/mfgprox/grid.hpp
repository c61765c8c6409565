#pragma once

#include <Eigen/Core>

#include <stdexcept>

namespace mfgprox {

using Vec4 = Eigen::Vector4d;

/// Uniform periodic N x N grid on the unit torus, step h = 1/N.
class TorusGrid {
 public:
  explicit TorusGrid(int n_nodes);

  int n() const { return n_; }
  double h() const { return h_; }
  int size() const { return n_ * n_; }

  int wrap(int i) const { return ((i % n_) + n_) % n_; }
  /// Linear index of node (i, j); i runs fastest. Indices wrap.
  int index(int i, int j) const { return wrap(i) + n_ * wrap(j); }
  double coordinate(int i) const { return i * h_; }

  friend bool operator==(const TorusGrid& a, const TorusGrid& b) { return a.n_ == b.n_; }
  friend bool operator!=(const TorusGrid& a, const TorusGrid& b) { return a.n_ != b.n_; }

 private:
  int n_;
  double h_;
};

/// One real value per node (m, u, d, ...).
struct ScalarField {
  TorusGrid grid;
  Eigen::VectorXd values;

  explicit ScalarField(const TorusGrid& g, double fill = 0.0)
      : grid(g), values(Eigen::VectorXd::Constant(g.size(), fill)) {}
  ScalarField(const TorusGrid& g, Eigen::VectorXd v);

  double operator()(int i, int j) const { return values[grid.index(i, j)]; }
  double& operator()(int i, int j) { return values[grid.index(i, j)]; }
  double operator[](int k) const { return values[k]; }
  double& operator[](int k) { return values[k]; }

  bool all_finite() const;
};

/// Four flux components per node, ordered like the slots of [D_h y].
struct FluxField {
  TorusGrid grid;
  Eigen::Matrix4Xd values;

  explicit FluxField(const TorusGrid& g)
      : grid(g), values(Eigen::Matrix4Xd::Zero(4, g.size())) {}
  FluxField(const TorusGrid& g, Eigen::Matrix4Xd v);

  auto node(int k) { return values.col(k); }
  auto node(int k) const { return values.col(k); }
  auto operator()(int i, int j) { return values.col(grid.index(i, j)); }
  auto operator()(int i, int j) const { return values.col(grid.index(i, j)); }

  bool all_finite() const;
  /// True when every node lies in K = R+ x R- x R+ x R-.
  bool admissible() const;
};

void require_same_grid(const TorusGrid& a, const TorusGrid& b, const char* what);

// Reductions run in index order so results are reproducible bit for bit.
double ordered_sum(const Eigen::VectorXd& v);
double dot(const ScalarField& a, const ScalarField& b);
double dot(const FluxField& a, const FluxField& b);
double norm(const ScalarField& a);
double norm(const FluxField& a);
/// h^2 * sum(m)
double mass(const ScalarField& m);

/// [D_h y]_{i,j} = ((D1 y)_{i,j}, (D1 y)_{i-1,j}, (D2 y)_{i,j}, (D2 y)_{i,j-1}).
FluxField dh_stencil(const ScalarField& y);

/// Upwind gradient ((D1 y)^-_{i,j}, -(D1 y)^+_{i-1,j}, (D2 y)^-_{i,j}, -(D2 y)^+_{i,j-1}).
FluxField hat_dh(const ScalarField& y);

/// Five-point Laplacian.
ScalarField laplacian(const ScalarField& y);

/// (A m) = -nu * Lap(m). Self-adjoint.
ScalarField apply_A(const ScalarField& m, double nu);
/// Discrete divergence of a flux field; its range is the zero-sum fields.
ScalarField apply_B(const FluxField& w);
/// B* y = -[D_h y].
FluxField apply_Bstar(const ScalarField& y);

/// Discrete Fokker-Planck drift T(u, m), evaluated node by node from the upwind
/// stencil. Satisfies T(u, m) = -B(flux_from_value(u, m, q)).
ScalarField transport(const ScalarField& u, const ScalarField& m, double q);

/// Feedback flux w = m |hat[D_h u]|^{(2-q)/(q-1)} hat[D_h u]; zero where hat[D_h u] = 0.
/// Throws std::invalid_argument if m has a negative entry.
FluxField flux_from_value(const ScalarField& u, const ScalarField& m, double q);

Vec4 project_K(const Vec4& w);
Vec4 project_K_polar(const Vec4& w);
FluxField project_K(const FluxField& w);
/// Orthogonal projection onto {h^2 sum(m) = 1}.
ScalarField project_mass(const ScalarField& m);

}  // namespace mfgprox
