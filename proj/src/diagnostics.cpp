#include "mfgprox/diagnostics.hpp"

#include "mfgprox/coupling.hpp"
#include "mfgprox/energies.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace mfgprox {

double KktResiduals::max() const { return std::max({res_hjb, res_fp, res_mass, res_compl}); }

ScalarField hamiltonian_side(const ScalarField& u, const ProblemSpec& spec) {
  ScalarField out = apply_A(u, spec.nu);
  const FluxField hat = hat_dh(u);
  const double qc = spec.q_conj();
  for (int k = 0; k < out.grid.size(); ++k) out[k] += std::pow(hat.node(k).norm(), qc) / qc;
  return out;
}

double active_threshold(const ScalarField& m) { return 1e-8 * std::max(m.values.maxCoeff(), 0.0); }

namespace {

bool at_upper(double m, double d, double eps) { return std::isfinite(d) && m >= d - eps; }

}  // namespace

ScalarField density_multiplier(const ScalarField& m, const ScalarField& u, double lambda,
                               const ProblemSpec& spec) {
  ScalarField p(m.grid);
  if (!spec.bounded()) return p;
  const ScalarField hs = hamiltonian_side(u, spec);
  const double eps = active_threshold(m);
  for (int k = 0; k < m.grid.size(); ++k) {
    if (m[k] > eps && at_upper(m[k], spec.bound_at(k), eps)) {
      p[k] = std::max(0.0, hs[k] - lambda - spec.coupling->f(k, m[k]));
    }
  }
  return p;
}

KktResiduals kkt_residuals(const ScalarField& m, const FluxField& w, const ScalarField& u,
                           double lambda, const ProblemSpec& spec) {
  require_same_grid(m.grid, u.grid, "kkt_residuals");
  require_same_grid(m.grid, w.grid, "kkt_residuals");
  const int n = m.grid.size();
  const ScalarField hs = hamiltonian_side(u, spec);
  const double eps = active_threshold(m);
  KktResiduals r;

  for (int k = 0; k < n; ++k) {
    const double d = spec.bound_at(k);
    const double row = hs[k] - lambda - spec.coupling->f(k, std::max(m[k], 0.0));
    double viol;
    double compl_k = 0.0;
    if (m[k] <= eps) {
      // row = -mu with mu >= 0
      viol = std::max(0.0, row);
      compl_k = std::max(0.0, -row) * std::abs(m[k]);
    } else if (at_upper(m[k], d, eps)) {
      // row = p with p >= 0
      viol = std::max(0.0, -row);
      compl_k = std::max(0.0, row) * std::abs(d - m[k]);
    } else {
      viol = std::abs(row);
    }
    r.res_hjb = std::max(r.res_hjb, viol);
    compl_k = std::max({compl_k, -m[k], m[k] - d});
    const Vec4 wk = w.node(k);
    compl_k = std::max(compl_k, (wk - project_K(wk)).cwiseAbs().maxCoeff());
    r.res_compl = std::max(r.res_compl, compl_k);
  }

  ScalarField fp = apply_A(m, spec.nu);
  fp.values -= transport(u, m, spec.q).values;
  r.res_fp = fp.values.cwiseAbs().maxCoeff();
  r.res_mass = std::abs(mass(m) - 1.0);

  r.scale = 1.0 + std::abs(lambda) + u.values.cwiseAbs().maxCoeff();
  r.res_hjb /= r.scale;
  r.res_fp /= r.scale;
  r.res_mass /= r.scale;
  r.res_compl /= r.scale;
  return r;
}

double dual_objective(const ScalarField& u, double lambda_d, const ScalarField* p,
                      const ProblemSpec& spec) {
  const Coupling& F = *spec.coupling;
  if (!F.has_conjugate()) {
    throw std::invalid_argument("dual_objective: coupling '" + F.name() +
                                "' provides no conjugate");
  }
  const double h = u.grid.h();
  const ScalarField hs = hamiltonian_side(u, spec);
  double total = lambda_d;
  for (int k = 0; k < u.grid.size(); ++k) {
    const double pk = p ? (*p)[k] : 0.0;
    if (pk != 0.0) total += pk * spec.bound_at(k);
    total += F.conj_eval(k, hs[k] - pk - lambda_d * h * h);
  }
  return total;
}

double duality_gap(const ScalarField& m, const FluxField& w, const ScalarField& u, double lambda,
                   const ProblemSpec& spec) {
  const double h = m.grid.h();
  const ScalarField p = density_multiplier(m, u, lambda, spec);
  return primal_objective(m, w, spec) + dual_objective(u, lambda / (h * h), &p, spec);
}

namespace {

double source_S(double x, double y) { return std::sin(2 * M_PI * x) + std::sin(2 * M_PI * y); }

}  // namespace

double test1_lambda() {
  // The integrand is periodic and analytic, so the trapezoid rule converges
  // geometrically; 256 points reach machine precision.
  constexpr int kPoints = 256;
  double s = 0.0;
  for (int i = 0; i < kPoints; ++i) s += std::exp(std::sin(2 * M_PI * i / kPoints));
  return 2.0 * std::log(s / kPoints);
}

ExactSolution exact_test1(const TorusGrid& grid) {
  const double lambda = test1_lambda();
  ExactSolution ex{ScalarField(grid), ScalarField(grid), lambda,
                   [lambda](double x, double y) { return std::exp(source_S(x, y) - lambda); }};
  for (int j = 0; j < grid.n(); ++j) {
    for (int i = 0; i < grid.n(); ++i) {
      ex.m(i, j) = ex.density(grid.coordinate(i), grid.coordinate(j));
    }
  }
  return ex;
}

ScalarField test2_reference(const TorusGrid& grid, double width) {
  ScalarField m(grid);
  for (int j = 0; j < grid.n(); ++j) {
    for (int i = 0; i < grid.n(); ++i) {
      const double dx = grid.coordinate(i) - 0.5, dy = grid.coordinate(j) - 0.5;
      m(i, j) = std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
    }
  }
  m.values /= mass(m);
  return m;
}

Eigen::VectorXd test3_potential(const TorusGrid& grid) {
  Eigen::VectorXd hbar(grid.size());
  for (int j = 0; j < grid.n(); ++j) {
    for (int i = 0; i < grid.n(); ++i) {
      const double x = grid.coordinate(i), y = grid.coordinate(j);
      hbar[grid.index(i, j)] = std::sin(2 * M_PI * y) + std::sin(2 * M_PI * x) + std::cos(4 * M_PI * x);
    }
  }
  return hbar;
}

ScalarField test3_bound(const TorusGrid& grid, double dbar, double radius) {
  ScalarField d(grid, dbar);
  for (int j = 0; j < grid.n(); ++j) {
    for (int i = 0; i < grid.n(); ++i) {
      const double x = grid.coordinate(i), y = grid.coordinate(j);
      const double dx = std::min(x, 1.0 - x), dy = std::min(y, 1.0 - y);
      if (dx * dx + dy * dy <= radius * radius) d(i, j) = 1.0;
    }
  }
  return d;
}

ProblemSpec make_test_problem(const ExperimentSpec& exp) {
  const TorusGrid g(exp.n);
  switch (exp.test) {
    case 1: {
      Eigen::VectorXd s(g.size());
      for (int j = 0; j < g.n(); ++j) {
        for (int i = 0; i < g.n(); ++i) s[g.index(i, j)] = source_S(g.coordinate(i), g.coordinate(j));
      }
      return ProblemSpec(g, exp.nu, exp.q, std::make_shared<LogCoupling>(s));
    }
    case 2: {
      const ScalarField mbar = test2_reference(g, exp.gaussian_width);
      return ProblemSpec(g, exp.nu, exp.q, std::make_shared<QuadraticCoupling>(mbar.values, 1.0));
    }
    case 3:
    case 4: {
      auto c = std::make_shared<CubicCoupling>(test3_potential(g));
      if (exp.constrained) {
        return ProblemSpec(g, exp.nu, exp.q, c, test3_bound(g, exp.dbar, exp.radius));
      }
      return ProblemSpec(g, exp.nu, exp.q, c);
    }
    default:
      throw std::invalid_argument("unknown test id " + std::to_string(exp.test) + " (1-4)");
  }
}

double l2_error(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid, b.grid, "l2_error");
  const double h = a.grid.h();
  return h * (a.values - b.values).norm();
}

double l2_error_continuous(const ScalarField& m,
                           const std::function<double(double, double)>& exact) {
  using Rule = boost::math::quadrature::gauss<double, 5>;
  // Nodes and weights on [-1, 1], symmetric about 0.
  std::vector<double> xs, ws;
  const auto& ab = Rule::abscissa();
  const auto& wt = Rule::weights();
  for (std::size_t k = 0; k < ab.size(); ++k) {
    xs.push_back(ab[k]);
    ws.push_back(wt[k]);
    if (ab[k] != 0.0) {
      xs.push_back(-ab[k]);
      ws.push_back(wt[k]);
    }
  }
  const TorusGrid& g = m.grid;
  const double h = g.h();
  double total = 0.0;
  for (int j = 0; j < g.n(); ++j) {
    for (int i = 0; i < g.n(); ++i) {
      const double mij = m(i, j);
      double cell = 0.0;
      for (std::size_t a = 0; a < xs.size(); ++a) {
        const double x = g.coordinate(i) + 0.5 * h * xs[a];
        for (std::size_t b = 0; b < xs.size(); ++b) {
          const double y = g.coordinate(j) + 0.5 * h * xs[b];
          const double e = mij - exact(x, y);
          cell += ws[a] * ws[b] * e * e;
        }
      }
      total += 0.25 * h * h * cell;
    }
  }
  return std::sqrt(total);
}

double fit_rate(const std::vector<std::pair<double, double>>& errors) {
  if (errors.size() < 2) throw std::invalid_argument("fit_rate: need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(errors.size());
  for (const auto& [h, e] : errors) {
    if (!(h > 0.0) || !(e > 0.0)) throw std::invalid_argument("fit_rate: h and e must be positive");
    const double x = std::log(h), y = std::log(e);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw std::invalid_argument("fit_rate: all h equal");
  return (n * sxy - sx * sy) / den;
}

}  // namespace mfgprox
