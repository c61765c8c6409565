#pragma once

#include "mfgprox/grid.hpp"
#include "mfgprox/problem.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace mfgprox {

/// Violations of the discrete optimality system, each divided by
/// 1 + |lambda| + max|u|.
struct KktResiduals {
  double res_hjb = 0.0;
  double res_fp = 0.0;
  double res_mass = 0.0;
  double res_compl = 0.0;
  double scale = 1.0;

  double max() const;
};

/// -nu Lap_h u + |hat[D_h u]|^{q'} / q' at every node.
ScalarField hamiltonian_side(const ScalarField& u, const ProblemSpec& spec);

/// Threshold separating m ~ 0 (inequality rows) from m > 0 (equality rows).
double active_threshold(const ScalarField& m);

/// Multiplier of the upper bound, rebuilt as the nonnegative slack of the HJB
/// row where the bound is active; zero elsewhere and in unbounded problems.
ScalarField density_multiplier(const ScalarField& m, const ScalarField& u, double lambda,
                               const ProblemSpec& spec);

/// lambda here is the multiplier of the optimality system
/// -nu Lap u + |hat[D u]|^{q'}/q' + mu - p - lambda = f(x, m).
KktResiduals kkt_residuals(const ScalarField& m, const FluxField& w, const ScalarField& u,
                           double lambda, const ProblemSpec& spec);

/// lambda_d + sum p d + sum F*(x, -nu Lap u + |hat[D u]|^{q'}/q' - p - lambda_d h^2).
/// lambda_d is the dual variable of the mass constraint (the system multiplier
/// divided by h^2). p may be null. Throws std::invalid_argument without F*.
double dual_objective(const ScalarField& u, double lambda_d, const ScalarField* p,
                      const ProblemSpec& spec);

/// primal + dual, zero at a primal-dual solution. lambda as in kkt_residuals.
double duality_gap(const ScalarField& m, const FluxField& w, const ScalarField& u, double lambda,
                   const ProblemSpec& spec);

/// Closed-form solution of the first benchmark (log coupling, nu = 0).
struct ExactSolution {
  ScalarField m;
  ScalarField u;
  double lambda;
  std::function<double(double, double)> density;  // continuous m(x, y)
};

/// log of the integral of exp(sin 2 pi x + sin 2 pi y) over the torus.
double test1_lambda();
ExactSolution exact_test1(const TorusGrid& grid);

struct ExperimentSpec {
  int test = 1;
  int n = 20;
  double nu = 0.0;
  double q = 2.0;
  bool constrained = false;
  double dbar = 1.3;
  double radius = 0.25;
  double gaussian_width = 0.1;
};

/// Benchmark problems 1-4. Defaults for nu and q are the caller's business.
ProblemSpec make_test_problem(const ExperimentSpec& exp);

/// Gaussian reference density of benchmark 2, normalized to h^2 sum = 1.
ScalarField test2_reference(const TorusGrid& grid, double width);
/// sin 2 pi y + sin 2 pi x + cos 4 pi x at the nodes.
Eigen::VectorXd test3_potential(const TorusGrid& grid);
/// 1 inside the periodic disc of radius R about the origin, dbar outside.
ScalarField test3_bound(const TorusGrid& grid, double dbar, double radius);

/// sqrt(h^2 sum (a - b)^2).
double l2_error(const ScalarField& a, const ScalarField& b);

/// L2 distance on the torus between the piecewise-constant function equal to
/// m_{i,j} on the cell centred at node (i, j) and exact(x, y); 5-point
/// Gauss-Legendre per cell and direction.
double l2_error_continuous(const ScalarField& m, const std::function<double(double, double)>& exact);

/// Least-squares slope of log e against log h. Needs two or more points.
double fit_rate(const std::vector<std::pair<double, double>>& errors);

}  // namespace mfgprox
