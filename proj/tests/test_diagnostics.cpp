#include "mfgprox/diagnostics.hpp"
#include "mfgprox/energies.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <boost/math/special_functions/bessel.hpp>

#include <cmath>
#include <memory>

using namespace mfgprox;

namespace {

ProblemSpec uniform_log(int n, double nu) {
  const TorusGrid g(n);
  return ProblemSpec(g, nu, 2.0, std::make_shared<LogCoupling>(Eigen::VectorXd::Zero(g.size())));
}

}  // namespace

TEST_CASE("uniform solution has zero residuals and zero gap") {
  for (double nu : {0.0, 0.5}) {
    const ProblemSpec spec = uniform_log(8, nu);
    const TorusGrid& g = spec.grid;
    const KktResiduals r = kkt_residuals(ScalarField(g, 1.0), FluxField(g), ScalarField(g), 0.0, spec);
    CHECK(r.max() == 0.0);
    CHECK(r.scale == 1.0);
    CHECK(std::abs(duality_gap(ScalarField(g, 1.0), FluxField(g), ScalarField(g), 0.0, spec)) <= 1e-12);
  }
}

TEST_CASE("adding a constant to u leaves hjb and fp residuals alone") {
  std::mt19937_64 rng(5);
  const TorusGrid g(10);
  const ProblemSpec spec(g, 0.3, 2.0, std::make_shared<CubicCoupling>(test3_potential(g)));
  ScalarField m = testing::random_scalar(g, rng, 0.5, 1.5);
  m.values /= mass(m);
  const FluxField w = testing::random_flux(g, rng, -0.1, 0.1);
  ScalarField u = testing::random_scalar(g, rng, -0.2, 0.2);
  const KktResiduals a = kkt_residuals(m, w, u, 0.4, spec);
  u.values.array() += 2.5;
  const KktResiduals b = kkt_residuals(m, w, u, 0.4, spec);
  // Only the scale factor sees the shift.
  CHECK(a.res_hjb * a.scale == doctest::Approx(b.res_hjb * b.scale).epsilon(1e-10));
  CHECK(a.res_fp * a.scale == doctest::Approx(b.res_fp * b.scale).epsilon(1e-10));
}

TEST_CASE("inequality rows only count one side where m vanishes") {
  const TorusGrid g(6);
  // Quadratic coupling with target 1: f(0) = -1 is finite, so m = 0 is admissible.
  Eigen::VectorXd target = Eigen::VectorXd::Constant(g.size(), 1.0);
  const ProblemSpec q(g, 0.0, 2.0, std::make_shared<QuadraticCoupling>(target, 1.0));
  ScalarField m(g, 1.0);
  m[0] = 0.0;
  // row at node 0: 0 - lambda - (0 - 1) = 1 - lambda; lambda = 2 gives -1 (allowed).
  const KktResiduals ok = kkt_residuals(m, FluxField(g), ScalarField(g), 2.0, q);
  const KktResiduals bad = kkt_residuals(m, FluxField(g), ScalarField(g), 0.0, q);
  // Positive nodes: row = -lambda, so |lambda| shows up there in both cases.
  CHECK(ok.res_hjb * ok.scale == doctest::Approx(2.0));
  CHECK(bad.res_hjb * bad.scale == doctest::Approx(1.0));
}

TEST_CASE("dual objective needs a conjugate") {
  const TorusGrid g(4);
  CouplingFunctions fns;
  fns.F = [](int, double m) { return m * m; };
  fns.f = [](int, double m) { return 2 * m; };
  const ProblemSpec spec(g, 0.0, 2.0, std::make_shared<FunctionCoupling>(fns));
  CHECK_THROWS_AS(dual_objective(ScalarField(g), 0.0, nullptr, spec), std::invalid_argument);
}

TEST_CASE("density multiplier is zero without a bound and nonnegative with one") {
  std::mt19937_64 rng(9);
  const TorusGrid g(8);
  const auto c = std::make_shared<CubicCoupling>(test3_potential(g));
  const ProblemSpec free(g, 1.0, 2.0, c);
  const ProblemSpec bounded(g, 1.0, 2.0, c, test3_bound(g, 1.3, 0.25));
  ScalarField m = test3_bound(g, 1.3, 0.25);
  const ScalarField u = testing::random_scalar(g, rng);
  CHECK(density_multiplier(m, u, 0.3, free).values.isZero(0.0));
  const ScalarField p = density_multiplier(m, u, 0.3, bounded);
  CHECK(p.values.minCoeff() >= 0.0);
}

TEST_CASE("closed-form lambda of the log benchmark") {
  const double ref = 2.0 * std::log(boost::math::cyl_bessel_i(0, 1.0));
  CHECK(test1_lambda() == doctest::Approx(ref).epsilon(1e-14));
  CHECK(test1_lambda() == doctest::Approx(0.4718287170).epsilon(1e-9));

  for (int n : {20, 40}) {
    const ExactSolution ex = exact_test1(TorusGrid(n));
    // Mass of the sampled density: the periodic trapezoid rule is spectrally accurate.
    CHECK(mass(ex.m) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(ex.u.values.isZero(0.0));
  }
}

TEST_CASE("exact log solution injected on the grid") {
  double prev = kInf;
  for (int n : {20, 40}) {
    ExperimentSpec e;
    e.n = n;
    const ProblemSpec spec = make_test_problem(e);
    const ExactSolution ex = exact_test1(spec.grid);
    const double r = kkt_residuals(ex.m, FluxField(spec.grid), ex.u, ex.lambda, spec).max();
    CHECK(r <= prev + 1e-14);
    prev = r;
  }
}

TEST_CASE("benchmark data") {
  const TorusGrid g(20);
  CHECK(mass(test2_reference(g, 0.1)) == doctest::Approx(1.0).epsilon(1e-14));

  const ScalarField d = test3_bound(g, 1.3, 0.25);
  CHECK(d(0, 0) == 1.0);
  CHECK(d(10, 10) == 1.3);
  // Periodic disc: nodes near x = 1 are close to the origin.
  CHECK(d(19, 0) == 1.0);
  CHECK(d(0, 19) == 1.0);
  CHECK(d(4, 0) == 1.0);
  CHECK(d(6, 0) == 1.3);

  const Eigen::VectorXd hb = test3_potential(g);
  CHECK(hb[g.index(0, 0)] == doctest::Approx(1.0));
  CHECK_THROWS_AS(make_test_problem(ExperimentSpec{5}), std::invalid_argument);
}

TEST_CASE("h-weighted L2 error") {
  const TorusGrid g(10);
  CHECK(l2_error(ScalarField(g, 1.0), ScalarField(g, 3.0)) == doctest::Approx(2.0));
}

TEST_CASE("continuous L2 error of the piecewise-constant reconstruction") {
  const TorusGrid g(8);
  const ScalarField c(g, 2.0);
  CHECK(l2_error_continuous(c, [](double, double) { return 2.0; }) == doctest::Approx(0.0));

  // Oracle: fine midpoint sum of (m_cell - sin 2 pi x)^2.
  ScalarField m(g);
  auto f = [](double x, double) { return std::sin(2 * M_PI * x); };
  for (int j = 0; j < 8; ++j)
    for (int i = 0; i < 8; ++i) m(i, j) = f(g.coordinate(i), 0.0);
  const int sub = 400;
  double total = 0.0;
  for (int i = 0; i < 8; ++i) {
    for (int s = 0; s < sub; ++s) {
      const double x = g.coordinate(i) + g.h() * (-0.5 + (s + 0.5) / sub);
      const double e = m(i, 0) - f(x, 0.0);
      total += e * e * g.h() / sub;
    }
  }
  CHECK(l2_error_continuous(m, f) == doctest::Approx(std::sqrt(total)).epsilon(1e-5));
}

TEST_CASE("fit_rate recovers a power law") {
  std::vector<std::pair<double, double>> pts;
  for (double h : {0.1, 0.05, 0.025}) pts.emplace_back(h, 3.0 * std::pow(h, 1.5));
  CHECK(fit_rate(pts) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK_THROWS_AS(fit_rate({{0.1, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_rate({{0.1, 1.0}, {0.1, 2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_rate({{0.1, 1.0}, {0.2, -2.0}}), std::invalid_argument);
}
