#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "chp/elliptic.hpp"
#include "chp/oracles.hpp"
#include "chp/verifier.hpp"

using namespace chp;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("elliptic counterexample values") {
  const EllipticCounterexample ex;
  const std::array<double, 2> origin = ex.value(0.0);
  CHECK(origin[0] == 0.0);
  CHECK(origin[1] == 0.0);

  const std::array<double, 2> mid = ex.value(0.5);
  CHECK(mid[0] == doctest::Approx(-1.0986122886681098).epsilon(1e-15));  // log(1/3)
  CHECK(mid[1] == doctest::Approx(-0.2876820724517809).epsilon(1e-15));  // log(3/4)

  CHECK_THROWS_WITH_AS(ex.value(-0.1), "x must lie in [0, ell]", std::invalid_argument);
  CHECK_THROWS_WITH_AS(ex.value(0.95), "x must lie in [0, ell]", std::invalid_argument);
  EllipticCounterexample wide;
  wide.ell = 1.5;
  CHECK_THROWS_WITH_AS(wide.value(0.5), "ell must lie in (0, 1)", std::invalid_argument);
  CHECK_THROWS_WITH_AS(ex.ratio_derivative(0.0), "x must lie in (0, ell)", std::invalid_argument);
  CHECK_THROWS_WITH_AS(ex.metric(1.0), "metric requires |x| < 1", std::invalid_argument);
}

TEST_CASE("elliptic counterexample satisfies its equation") {
  // The flux A(x) u'(x) must be constant: first row -2, second row 0. Checked
  // with central differences away from the endpoints.
  const EllipticCounterexample ex;
  const double h = 1e-4;
  for (double x = 0.05; x <= 0.6; x += 0.05) {
    const std::array<double, 2> up = ex.value(x + h);
    const std::array<double, 2> um = ex.value(x - h);
    const double d1 = (up[0] - um[0]) / (2.0 * h);
    const double d2 = (up[1] - um[1]) / (2.0 * h);
    const DenseMatrix a = ex.metric(x);
    const double flux1 = a(0, 0) * d1 + a(0, 1) * d2;
    const double flux2 = a(1, 0) * d1 + a(1, 1) * d2;
    CHECK(std::abs(flux1 + 2.0) <= 1e-6);
    CHECK(std::abs(flux2) <= 1e-6);
  }
}

TEST_CASE("metric of the counterexample stays positive definite") {
  const EllipticCounterexample ex;
  for (double x = 0.0; x <= 0.899; x += 0.0899) {
    const DenseMatrix a = ex.metric(x);
    CHECK(a(0, 0) == 1.0);
    CHECK(a(0, 1) == -x);
    CHECK(a(1, 0) == -x);
    CHECK(a(1, 1) == 1.0);
    CHECK(sym_eigen_min(a) >= 1.0 - 0.9);  // eigenvalues 1 -+ x
  }
}

TEST_CASE("component ratio is strictly decreasing") {
  const EllipticCounterexample ex;
  // against a central difference of u1/u2
  const double h = 1e-5;
  for (double x = 0.15; x <= 0.8; x += 0.05) {
    const std::array<double, 2> up = ex.value(x + h);
    const std::array<double, 2> um = ex.value(x - h);
    const double fd = (up[0] / up[1] - um[0] / um[1]) / (2.0 * h);
    const double got = ex.ratio_derivative(x);
    CHECK(std::abs(got - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
  }
  // and negative across the whole open interval
  for (int i = 1; i <= 1000; ++i) {
    const double x = 0.9 * i / 1001.0;
    CHECK(ex.ratio_derivative(x) < 0.0);
  }
}

TEST_CASE("parabolic counterexample values and diagnostic") {
  const ParabolicCounterexample ex;
  const std::array<double, 2> start = ex.value(0.0, kPi / 2.0);
  CHECK(start[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(start[1] == doctest::Approx(1.0).epsilon(1e-15));

  const double t = std::log(2.0);
  const std::array<double, 2> later = ex.value(t, kPi / 2.0);
  CHECK(later[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(later[1] == doctest::Approx(0.25).epsilon(1e-14));

  CHECK(ex.eta_exact(0.0) == 0.0);
  CHECK(ex.eta_exact(t) == doctest::Approx(kPi / 128.0).epsilon(1e-14));

  CHECK_THROWS_WITH_AS(ex.value(-0.5, 1.0), "t must be nonnegative", std::invalid_argument);
  CHECK_THROWS_WITH_AS(ex.value(0.5, 4.0), "x must lie in [0, pi]", std::invalid_argument);
  ParabolicCounterexample same;
  same.a2 = 1.0;
  CHECK_THROWS_WITH_AS(same.value(0.0, 1.0), "rates must be positive and distinct",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(same.eta_exact(0.5), "rates must be positive and distinct",
                       std::invalid_argument);
}

TEST_CASE("parabolic counterexample satisfies both heat equations") {
  const ParabolicCounterexample ex;
  const double h = 1e-4;
  for (double t = 0.2; t <= 1.0; t += 0.2) {
    for (double x = 0.5; x <= 2.5; x += 0.5) {
      for (int c = 0; c < 2; ++c) {
        const double rate = c == 0 ? ex.a1 : ex.a2;
        const size_t ci = static_cast<size_t>(c);
        const double ut = (ex.value(t + h, x)[ci] - ex.value(t - h, x)[ci]) / (2.0 * h);
        const double uxx =
            (ex.value(t, x + h)[ci] - 2.0 * ex.value(t, x)[ci] + ex.value(t, x - h)[ci]) /
            (h * h);
        CHECK(std::abs(ut - rate * uxx) <= 1e-5);
      }
    }
  }
}

TEST_CASE("harmonic component fields") {
  auto mesh = std::make_shared<const Mesh>(rect_mesh(-1.0, 1.0, -1.0, 1.0, 4, 4));
  const NodalField u = harmonic_field(mesh, {HarmonicPoly::XxMinusYy, HarmonicPoly::XY,
                                             HarmonicPoly::X, HarmonicPoly::One});
  REQUIRE(u.components == 4);
  for (int i = 0; i < mesh->node_count(); ++i) {
    const std::array<double, 2> x = mesh->node(i);
    CHECK(u.at(i)[0] == doctest::Approx(x[0] * x[0] - x[1] * x[1]).epsilon(1e-14));
    CHECK(u.at(i)[1] == doctest::Approx(2.0 * x[0] * x[1]).epsilon(1e-14));
    CHECK(u.at(i)[2] == doctest::Approx(x[0]).epsilon(1e-14));
    CHECK(u.at(i)[3] == 1.0);
  }

  auto line = std::make_shared<const Mesh>(interval_mesh(0.0, 1.0, 4));
  CHECK_THROWS_WITH_AS(harmonic_field(line, {HarmonicPoly::X}), "harmonic fields need a 2D mesh",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(harmonic_field(mesh, {}), "at least one component required",
                       std::invalid_argument);
}

TEST_CASE("harmonic data keeps the discrete solution in its hull") {
  auto mesh = std::make_shared<const Mesh>(rect_mesh(-1.0, 1.0, -1.0, 1.0, 16, 16));
  const NodalField exact = harmonic_field(mesh, {HarmonicPoly::XxMinusYy, HarmonicPoly::XY});

  EllipticCoefficients coeffs;
  coeffs.components = 2;
  BoundaryValues bc;
  for (int node : mesh->boundary_nodes) {
    bc[node] = {exact.at(node)[0], exact.at(node)[1]};
  }
  const NodalField u = solve_dirichlet(assemble(mesh, coeffs), bc);

  double err = 0.0;
  for (size_t i = 0; i < u.values.size(); ++i) {
    err = std::max(err, std::abs(u.values[i] - exact.values[i]));
  }
  CHECK(err <= 0.02);  // second order at h = 1/8

  const ChpReport rep = verify(u, boundary_hull(u), kChpTolLinear);
  CHECK(rep.pass);
}
