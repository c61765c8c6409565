#include "mfgprox/grid.hpp"

#include <cmath>
#include <string>

namespace mfgprox {

TorusGrid::TorusGrid(int n_nodes) : n_(n_nodes), h_(0.0) {
  if (n_nodes < 3) {
    throw std::invalid_argument("TorusGrid: need at least 3 nodes per side, got " +
                                std::to_string(n_nodes));
  }
  h_ = 1.0 / static_cast<double>(n_nodes);
}

ScalarField::ScalarField(const TorusGrid& g, Eigen::VectorXd v) : grid(g), values(std::move(v)) {
  if (values.size() != g.size()) throw std::invalid_argument("ScalarField: size mismatch");
}

bool ScalarField::all_finite() const { return values.allFinite(); }

FluxField::FluxField(const TorusGrid& g, Eigen::Matrix4Xd v) : grid(g), values(std::move(v)) {
  if (values.cols() != g.size()) throw std::invalid_argument("FluxField: size mismatch");
}

bool FluxField::all_finite() const { return values.allFinite(); }

bool FluxField::admissible() const {
  for (int k = 0; k < values.cols(); ++k) {
    if (values(0, k) < 0.0 || values(1, k) > 0.0 || values(2, k) < 0.0 || values(3, k) > 0.0) {
      return false;
    }
  }
  return true;
}

void require_same_grid(const TorusGrid& a, const TorusGrid& b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": grid mismatch (" + std::to_string(a.n()) +
                                " vs " + std::to_string(b.n()) + ")");
  }
}

double ordered_sum(const Eigen::VectorXd& v) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) s += v[k];
  return s;
}

double dot(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid, b.grid, "dot");
  double s = 0.0;
  for (Eigen::Index k = 0; k < a.values.size(); ++k) s += a.values[k] * b.values[k];
  return s;
}

double dot(const FluxField& a, const FluxField& b) {
  require_same_grid(a.grid, b.grid, "dot");
  double s = 0.0;
  for (Eigen::Index k = 0; k < a.values.cols(); ++k) {
    for (int c = 0; c < 4; ++c) s += a.values(c, k) * b.values(c, k);
  }
  return s;
}

double norm(const ScalarField& a) { return std::sqrt(dot(a, a)); }
double norm(const FluxField& a) { return std::sqrt(dot(a, a)); }

double mass(const ScalarField& m) {
  const double h = m.grid.h();
  return h * h * ordered_sum(m.values);
}

FluxField dh_stencil(const ScalarField& y) {
  const TorusGrid& g = y.grid;
  const int n = g.n();
  const double inv_h = 1.0 / g.h();
  FluxField out(g);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double c = y(i, j);
      auto col = out(i, j);
      col[0] = (y(i + 1, j) - c) * inv_h;
      col[1] = (c - y(i - 1, j)) * inv_h;
      col[2] = (y(i, j + 1) - c) * inv_h;
      col[3] = (c - y(i, j - 1)) * inv_h;
    }
  }
  return out;
}

FluxField hat_dh(const ScalarField& y) {
  FluxField d = dh_stencil(y);
  for (int k = 0; k < d.values.cols(); ++k) {
    auto col = d.node(k);
    col[0] = std::max(-col[0], 0.0);
    col[1] = -std::max(col[1], 0.0);
    col[2] = std::max(-col[2], 0.0);
    col[3] = -std::max(col[3], 0.0);
  }
  return d;
}

ScalarField laplacian(const ScalarField& y) {
  const TorusGrid& g = y.grid;
  const int n = g.n();
  const double inv_h2 = 1.0 / (g.h() * g.h());
  ScalarField out(g);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      out(i, j) =
          -(4.0 * y(i, j) - y(i + 1, j) - y(i - 1, j) - y(i, j + 1) - y(i, j - 1)) * inv_h2;
    }
  }
  return out;
}

ScalarField apply_A(const ScalarField& m, double nu) {
  ScalarField out = laplacian(m);
  out.values *= -nu;
  return out;
}

ScalarField apply_B(const FluxField& w) {
  const TorusGrid& g = w.grid;
  const int n = g.n();
  const double inv_h = 1.0 / g.h();
  ScalarField out(g);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const auto c = w(i, j);
      const double d1w1 = c[0] - w(i - 1, j)[0];
      const double d1w2 = w(i + 1, j)[1] - c[1];
      const double d2w3 = c[2] - w(i, j - 1)[2];
      const double d2w4 = w(i, j + 1)[3] - c[3];
      out(i, j) = (d1w1 + d1w2 + d2w3 + d2w4) * inv_h;
    }
  }
  return out;
}

FluxField apply_Bstar(const ScalarField& y) {
  FluxField out = dh_stencil(y);
  out.values = -out.values;
  return out;
}

namespace {

// |a|^{(2-q)/(q-1)} for each node, 0 where the upwind gradient vanishes.
Eigen::VectorXd transport_factor(const FluxField& hat, double q) {
  const double e = (2.0 - q) / (q - 1.0);
  Eigen::VectorXd g(hat.values.cols());
  for (int k = 0; k < hat.values.cols(); ++k) {
    const double r = hat.node(k).norm();
    g[k] = r > 0.0 ? std::pow(r, e) : 0.0;
  }
  return g;
}

}  // namespace

ScalarField transport(const ScalarField& u, const ScalarField& m, double q) {
  require_same_grid(u.grid, m.grid, "transport");
  if (!(q > 1.0)) throw std::invalid_argument("transport: q must exceed 1");
  const TorusGrid& g = u.grid;
  const int n = g.n();
  const FluxField d = dh_stencil(u);
  const FluxField hat = hat_dh(u);
  const Eigen::VectorXd fac = transport_factor(hat, q);
  auto mg = [&](int i, int j) { return m(i, j) * fac[g.index(i, j)]; };
  auto pos = [](double a) { return std::max(a, 0.0); };
  auto neg = [](double a) { return std::max(-a, 0.0); };
  const double inv_h = 1.0 / g.h();

  ScalarField out(g);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const auto dc = d(i, j);
      // dc = (D1 u_{i,j}, D1 u_{i-1,j}, D2 u_{i,j}, D2 u_{i,j-1})
      const double c = mg(i, j);
      double t = -c * neg(dc[0]) + mg(i - 1, j) * neg(dc[1]) + mg(i + 1, j) * pos(dc[0]) -
                 c * pos(dc[1]);
      t += -c * neg(dc[2]) + mg(i, j - 1) * neg(dc[3]) + mg(i, j + 1) * pos(dc[2]) -
           c * pos(dc[3]);
      out(i, j) = t * inv_h;
    }
  }
  return out;
}

FluxField flux_from_value(const ScalarField& u, const ScalarField& m, double q) {
  require_same_grid(u.grid, m.grid, "flux_from_value");
  if (!(q > 1.0)) throw std::invalid_argument("flux_from_value: q must exceed 1");
  for (int k = 0; k < m.values.size(); ++k) {
    if (m[k] < 0.0) {
      throw std::invalid_argument("flux_from_value: negative density at node " +
                                  std::to_string(k));
    }
  }
  FluxField hat = hat_dh(u);
  const Eigen::VectorXd fac = transport_factor(hat, q);
  for (int k = 0; k < hat.values.cols(); ++k) hat.node(k) *= m[k] * fac[k];
  return hat;
}

Vec4 project_K(const Vec4& w) {
  return Vec4(std::max(w[0], 0.0), std::min(w[1], 0.0), std::max(w[2], 0.0),
              std::min(w[3], 0.0));
}

Vec4 project_K_polar(const Vec4& w) { return w - project_K(w); }

FluxField project_K(const FluxField& w) {
  FluxField out(w.grid);
  for (int k = 0; k < w.values.cols(); ++k) out.node(k) = project_K(Vec4(w.node(k)));
  return out;
}

ScalarField project_mass(const ScalarField& m) {
  ScalarField out = m;
  out.values.array() += 1.0 - mass(m);
  return out;
}

}  // namespace mfgprox
