#include "mfgprox/field_io.hpp"
#include "mfgprox/grid.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace mfgprox;
using mfgprox::testing::random_flux;
using mfgprox::testing::random_scalar;

TEST_CASE("grid needs at least three nodes per side") {
  CHECK_THROWS_AS(TorusGrid(2), std::invalid_argument);
  const TorusGrid g(3);
  CHECK(g.h() * g.n() == 1.0);
  CHECK(g.index(-1, 0) == 2);
  CHECK(g.index(3, 4) == 0 + 3 * 1);
}

TEST_CASE("constant fields have zero differences") {
  const TorusGrid g(5);
  const ScalarField c(g, 3.25);
  CHECK(dh_stencil(c).values.isZero(0.0));
  CHECK(hat_dh(c).values.isZero(0.0));
  CHECK(laplacian(c).values.isZero(0.0));
  CHECK(apply_A(c, 0.7).values.isZero(0.0));
  CHECK(apply_B(FluxField(g)).values.isZero(0.0));
  CHECK(transport(c, ScalarField(g, 1.0), 2.0).values.isZero(0.0));
}

TEST_CASE("linear ramp on N=4: forward difference wraps at the last row") {
  const TorusGrid g(4);
  ScalarField y(g);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) y(i, j) = i * g.h();
  const FluxField d = dh_stencil(y);
  for (int j = 0; j < 4; ++j) {
    for (int i = 0; i < 4; ++i) {
      CHECK(d(i, j)[0] == doctest::Approx(i == 3 ? -3.0 : 1.0));
      CHECK(d(i, j)[1] == doctest::Approx(i == 0 ? -3.0 : 1.0));
      CHECK(d(i, j)[2] == 0.0);
      CHECK(d(i, j)[3] == 0.0);
    }
  }
}

TEST_CASE("spike on N=4: upwind gradient, Laplacian and transport by hand") {
  const TorusGrid g(4);
  ScalarField y(g);
  y(1, 1) = 1.0;

  const FluxField hat = hat_dh(y);
  for (int j = 0; j < 4; ++j) {
    for (int i = 0; i < 4; ++i) {
      const Vec4 expect = (i == 1 && j == 1) ? Vec4(4, -4, 4, -4) : Vec4::Zero();
      CHECK((Vec4(hat(i, j)) - expect).norm() == 0.0);
    }
  }

  const ScalarField lap = laplacian(y);
  CHECK(lap(1, 1) == doctest::Approx(-64.0));
  CHECK(lap(0, 1) == doctest::Approx(16.0));
  CHECK(lap(2, 1) == doctest::Approx(16.0));
  CHECK(lap(1, 0) == doctest::Approx(16.0));
  CHECK(lap(1, 2) == doctest::Approx(16.0));
  CHECK(lap(3, 3) == 0.0);

  const ScalarField t = transport(y, ScalarField(g, 1.0), 2.0);
  CHECK(t(1, 1) == doctest::Approx(-64.0));
  CHECK(t(0, 1) == doctest::Approx(16.0));
  CHECK(t(2, 1) == doctest::Approx(16.0));
  CHECK(t(1, 0) == doctest::Approx(16.0));
  CHECK(t(1, 2) == doctest::Approx(16.0));
  CHECK(t(3, 3) == 0.0);
}

TEST_CASE("upwind gradient is the projection of -D_h onto K") {
  std::mt19937_64 rng(7);
  const TorusGrid g(9);
  for (int s = 0; s < 5; ++s) {
    const ScalarField y = random_scalar(g, rng);
    FluxField neg = dh_stencil(y);
    neg.values = -neg.values;
    CHECK((hat_dh(y).values - project_K(neg).values).cwiseAbs().maxCoeff() == 0.0);
    CHECK(hat_dh(y).admissible());
  }
}

TEST_CASE("adjoint identities and zero-sum ranges") {
  for (int n : {4, 8, 16}) {
    const TorusGrid g(n);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      std::mt19937_64 rng(seed * 1000 + n);
      const FluxField w = random_flux(g, rng);
      const ScalarField y = random_scalar(g, rng);
      const ScalarField m = random_scalar(g, rng);
      const double nu = 0.3 + 0.1 * seed;

      const double lhs = dot(apply_B(w), y);
      const double rhs = dot(w, apply_Bstar(y));
      CHECK(std::abs(lhs - rhs) <= 1e-12 * norm(w) * norm(y));

      const double a1 = dot(apply_A(m, nu), y);
      const double a2 = dot(m, apply_A(y, nu));
      CHECK(std::abs(a1 - a2) <= 1e-12 * norm(m) * norm(y));

      CHECK(std::abs(ordered_sum(apply_B(w).values)) <= 1e-12 * (1.0 + norm(w)));
      CHECK(std::abs(ordered_sum(apply_A(m, nu).values)) <= 1e-12 * (1.0 + norm(m)));
      CHECK(std::abs(ordered_sum(laplacian(y).values)) <= 1e-12 * (1.0 + norm(y)));
    }
  }
}

TEST_CASE("divergence of the feedback flux equals minus the transport term") {
  for (double q : {1.5, 2.0, 3.0}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      std::mt19937_64 rng(seed + 77);
      const TorusGrid g(8 + static_cast<int>(seed));
      const ScalarField u = random_scalar(g, rng);
      const ScalarField m = random_scalar(g, rng, 0.0, 2.0);
      const double nu = 0.5;
      const FluxField w = flux_from_value(u, m, q);
      ScalarField lhs = apply_A(m, nu);
      lhs.values += apply_B(w).values;
      ScalarField rhs = laplacian(m);
      rhs.values = -nu * rhs.values - transport(u, m, q).values;
      const double scale = 1.0 + norm(m) * norm(u);
      CHECK((lhs.values - rhs.values).cwiseAbs().maxCoeff() <= 1e-10 * scale);
    }
  }
}

TEST_CASE("feedback flux formula") {
  const TorusGrid g(4);
  std::mt19937_64 rng(3);
  const ScalarField m = random_scalar(g, rng, 0.0, 1.0);
  CHECK(flux_from_value(ScalarField(g), m, 3.0).values.isZero(0.0));

  const ScalarField u = random_scalar(g, rng);
  const FluxField w2 = flux_from_value(u, m, 2.0);
  const FluxField hat = hat_dh(u);
  for (int k = 0; k < g.size(); ++k) CHECK((Vec4(w2.node(k)) - m[k] * Vec4(hat.node(k))).norm() <= 1e-15);

  // hat at (0,0) is (2, 0, 0, 0): |hat|^{-1/2} hat = (sqrt 2, 0, 0, 0) for q = 3.
  ScalarField v(g);
  v(1, 0) = -0.5;
  const FluxField w3 = flux_from_value(v, ScalarField(g, 1.0), 3.0);
  CHECK(w3(0, 0)[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(Vec4(w3(0, 0)).tail<3>().isZero(0.0));

  ScalarField bad(g, 1.0);
  bad(2, 2) = -1e-3;
  CHECK_THROWS_AS(flux_from_value(u, bad, 2.0), std::invalid_argument);
}

TEST_CASE("projections onto K and onto the mass constraint") {
  CHECK(project_K(Vec4(1, -1, 1, -1)) == Vec4(1, -1, 1, -1));
  CHECK(project_K(Vec4(-1, 1, -1, 1)) == Vec4::Zero());
  CHECK(project_K(Vec4(-1, 1, -1, 1)) + project_K_polar(Vec4(-1, 1, -1, 1)) == Vec4(-1, 1, -1, 1));

  std::mt19937_64 rng(11);
  const TorusGrid g(7);
  const FluxField w = random_flux(g, rng);
  const FluxField pw = project_K(w);
  CHECK(pw.admissible());
  CHECK(project_K(pw).values == pw.values);

  const ScalarField m = random_scalar(g, rng, -3.0, 5.0);
  const ScalarField pm = project_mass(m);
  CHECK(mass(pm) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK((project_mass(pm).values - pm.values).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("GF1 round trip is bit exact") {
  std::mt19937_64 rng(5);
  const TorusGrid g(6);
  ScalarField m = random_scalar(g, rng, -1e3, 1e3);
  m[3] = 1.0 / 3.0;
  m[4] = -0.0;
  m[5] = 1e-300;
  const FluxField w = random_flux(g, rng);

  std::stringstream ss;
  write_gf1(ss, m);
  const ScalarField m2 = read_gf1_scalar(ss);
  CHECK(m2.grid.n() == 6);
  CHECK(m2.values == m.values);

  std::stringstream sw;
  write_gf1(sw, w);
  CHECK(sw.str().rfind("GF1 6 4\n", 0) == 0);
  const FluxField w2 = read_gf1_flux(sw);
  CHECK(w2.values == w.values);

  std::stringstream wrong("GF1 6 4\n1 2 3");
  CHECK_THROWS(read_gf1_scalar(wrong));
}
