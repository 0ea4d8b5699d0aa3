#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <map>
#include <random>

#include "chp/elliptic.hpp"
#include "chp/oracles.hpp"
#include "chp/verifier.hpp"
#include "support.hpp"

using namespace chp;

namespace {

// Finds the CSR entry (i, j) or fails the test.
double entry(const Csr& a, int i, int j) {
  for (int k = a.ptr[static_cast<size_t>(i)]; k < a.ptr[static_cast<size_t>(i) + 1]; ++k) {
    if (a.col[static_cast<size_t>(k)] == j) return a.val[static_cast<size_t>(k)];
  }
  FAIL("missing entry");
  return 0.0;
}

BoundaryValues sampled_bc(const Mesh& mesh,
                          const std::function<std::vector<double>(std::array<double, 2>)>& g) {
  BoundaryValues bc;
  for (int node : mesh.boundary_nodes) bc[node] = g(mesh.node(node));
  return bc;
}

NodalField solve_counterexample(int cells) {
  const EllipticCounterexample ex;
  auto mesh = std::make_shared<const Mesh>(interval_mesh(0.0, ex.ell, cells));
  EllipticCoefficients coeffs;
  coeffs.components = 2;
  coeffs.metric = [ex](std::array<double, 2> x) { return ex.metric(x[0]); };
  const BlockSparseSystem sys = assemble(mesh, coeffs);
  BoundaryValues bc;
  for (int node : mesh->boundary_nodes) {
    const std::array<double, 2> v = ex.value(mesh->node(node)[0]);
    bc[node] = {v[0], v[1]};
  }
  return solve_dirichlet(sys, bc);
}

double max_error_vs(const NodalField& u, const EllipticCounterexample& ex) {
  double err = 0.0;
  for (int i = 0; i < u.mesh->node_count(); ++i) {
    const std::array<double, 2> v = ex.value(u.mesh->node(i)[0]);
    err = std::max(err, std::abs(u.at(i)[0] - v[0]));
    err = std::max(err, std::abs(u.at(i)[1] - v[1]));
  }
  return err;
}

}  // namespace

TEST_CASE("interval stiffness carries the classic stencil") {
  auto mesh = std::make_shared<const Mesh>(interval_mesh(0.0, 1.0, 2));
  EllipticCoefficients coeffs;  // scalar Laplace
  const BlockSparseSystem sys = assemble(mesh, coeffs);
  // h = 1/2: diagonal 2/h = 4, neighbors -1/h = -2
  CHECK(entry(sys.stiffness, 1, 1) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(entry(sys.stiffness, 1, 0) == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(entry(sys.stiffness, 1, 2) == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(entry(sys.stiffness, 0, 0) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("assembly is symmetric and matches the serial reference bitwise") {
  auto mesh = std::make_shared<const Mesh>(rect_mesh(0.0, 1.0, 0.0, 1.0, 7, 6));
  EllipticCoefficients coeffs;
  coeffs.components = 2;
  coeffs.metric = [](std::array<double, 2> x) {
    DenseMatrix m(2, 2);
    m(0, 0) = 2.0 + std::sin(x[0]);
    m(0, 1) = m(1, 0) = 0.3 * std::cos(x[1]);
    m(1, 1) = 1.5;
    return m;
  };
  coeffs.diffusion = [](std::array<double, 2> x) {
    DenseMatrix d(2, 2);
    d(0, 0) = 1.2 + 0.1 * x[0];
    d(0, 1) = d(1, 0) = 0.05 * x[1];
    d(1, 1) = 1.0 + 0.2 * x[1];
    return d;
  };
  coeffs.lambda = 0.5;

  const BlockSparseSystem par = assemble(mesh, coeffs);
  const BlockSparseSystem ser = assemble_serial(mesh, coeffs);
  REQUIRE(par.stiffness.nnz() == ser.stiffness.nnz());
  CHECK(std::memcmp(par.stiffness.val.data(), ser.stiffness.val.data(),
                    par.stiffness.val.size() * sizeof(double)) == 0);
  CHECK(par.stiffness.col == ser.stiffness.col);

  const Csr& a = par.stiffness;
  double scale = 0.0;
  for (double v : a.val) scale = std::max(scale, std::abs(v));
  for (int i = 0; i < a.n; ++i) {
    for (int k = a.ptr[static_cast<size_t>(i)]; k < a.ptr[static_cast<size_t>(i) + 1]; ++k) {
      const int j = a.col[static_cast<size_t>(k)];
      CHECK(std::abs(a.val[static_cast<size_t>(k)] - entry(a, j, i)) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("coefficient validation names the offending element") {
  auto mesh = std::make_shared<const Mesh>(interval_mesh(0.0, 1.0, 4));
  EllipticCoefficients bad;
  bad.components = 2;
  bad.metric = [](std::array<double, 2>) {
    DenseMatrix m(2, 2);
    m(0, 0) = m(1, 1) = 1.0;
    m(0, 1) = m(1, 0) = 2.0;  // eigenvalues 3 and -1
    return m;
  };
  CHECK_THROWS_WITH_AS(assemble(mesh, bad), "metric sample is not positive definite at element 0",
                       std::invalid_argument);

  EllipticCoefficients asym;
  asym.components = 2;
  asym.metric = [](std::array<double, 2>) {
    DenseMatrix m(2, 2);
    m(0, 0) = m(1, 1) = 1.0;
    m(0, 1) = 0.5;
    m(1, 0) = -0.5;
    return m;
  };
  CHECK_THROWS_WITH_AS(assemble(mesh, asym), "metric sample is not symmetric at element 0",
                       std::invalid_argument);

  EllipticCoefficients shape;
  shape.components = 2;
  shape.metric = [](std::array<double, 2>) { return DenseMatrix(3, 3); };
  CHECK_THROWS_WITH_AS(assemble(mesh, shape), "metric sample has the wrong shape at element 0",
                       std::invalid_argument);

  EllipticCoefficients weak;
  weak.diffusion = [](std::array<double, 2>) {
    DenseMatrix d(1, 1);
    d(0, 0) = 0.5;
    return d;
  };
  weak.lambda = 1.0;
  CHECK_THROWS_WITH_AS(assemble(mesh, weak),
                       "diffusion sample falls below the ellipticity floor at element 0",
                       std::invalid_argument);
}

TEST_CASE("boundary data validation names the node") {
  auto mesh = std::make_shared<const Mesh>(interval_mesh(0.0, 1.0, 4));
  const BlockSparseSystem sys = assemble(mesh, EllipticCoefficients{});
  BoundaryValues missing;
  missing[0] = {1.0};
  CHECK_THROWS_WITH_AS(solve_dirichlet(sys, missing), "missing boundary value at node 4",
                       std::invalid_argument);
  BoundaryValues wide;
  wide[0] = {1.0, 2.0};
  wide[4] = {1.0};
  CHECK_THROWS_WITH_AS(solve_dirichlet(sys, wide), "boundary value at node 0 has the wrong size",
                       std::invalid_argument);
  BoundaryValues inf;
  inf[0] = {std::nan("")};
  inf[4] = {1.0};
  CHECK_THROWS_WITH_AS(solve_dirichlet(sys, inf), "boundary value at node 0 is not finite",
                       std::invalid_argument);
}

TEST_CASE("a constant coupling metric leaves the solution componentwise") {
  // With a constant invertible metric the block system factors through the
  // scalar one, so the solution cannot depend on the metric at all.
  std::mt19937_64 rng(5150);
  auto mesh = std::make_shared<const Mesh>(rect_mesh(0.0, 1.0, 0.0, 1.0, 6, 6));
  auto g = [](std::array<double, 2> x) {
    return std::vector<double>{std::sin(3.0 * x[0]) + x[1], x[0] * x[1] - 0.5};
  };

  EllipticCoefficients with_metric;
  with_metric.components = 2;
  const DenseMatrix am = testsup::random_spd(rng, 2, 20.0);
  with_metric.metric = [am](std::array<double, 2>) { return am; };
  const NodalField ua = solve_dirichlet(assemble(mesh, with_metric), sampled_bc(*mesh, g));

  EllipticCoefficients plain;
  plain.components = 2;
  const NodalField ui = solve_dirichlet(assemble(mesh, plain), sampled_bc(*mesh, g));

  double diff = 0.0;
  for (size_t i = 0; i < ua.values.size(); ++i) {
    diff = std::max(diff, std::abs(ua.values[i] - ui.values[i]));
  }
  CHECK(diff <= 1e-9);
}

TEST_CASE("linear boundary data is reproduced exactly") {
  auto m1 = std::make_shared<const Mesh>(interval_mesh(0.0, 1.0, 8));
  const NodalField u1 = solve_scalar(m1, nullptr, 1.0, {{0, 0.0}, {8, 1.0}});
  for (int i = 0; i <= 8; ++i) {
    CHECK(std::abs(u1.at(i)[0] - m1->node(i)[0]) <= 1e-12);
  }

  auto m2 = std::make_shared<const Mesh>(rect_mesh(0.0, 1.0, 0.0, 1.0, 5, 5));
  EllipticCoefficients coeffs;
  coeffs.components = 2;
  const NodalField u2 =
      solve_dirichlet(assemble(m2, coeffs), sampled_bc(*m2, [](std::array<double, 2> x) {
                        return std::vector<double>{x[0], x[0] + x[1]};
                      }));
  for (int i = 0; i < m2->node_count(); ++i) {
    const std::array<double, 2> x = m2->node(i);
    CHECK(std::abs(u2.at(i)[0] - x[0]) <= 1e-10);
    CHECK(std::abs(u2.at(i)[1] - (x[0] + x[1])) <= 1e-10);
  }
}

TEST_CASE("scalar solutions respect the discrete maximum principle") {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> val(-2.0, 2.0);
  auto mesh = std::make_shared<const Mesh>(rect_mesh(0.0, 1.0, 0.0, 1.0, 8, 8));
  for (int trial = 0; trial < 5; ++trial) {
    std::map<int, double> bc;
    double lo = 1e300, hi = -1e300;
    for (int node : mesh->boundary_nodes) {
      const double v = val(rng);
      bc[node] = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const NodalField u = solve_scalar(mesh, nullptr, 1.0, bc);
    for (double v : u.values) {
      CHECK(v >= lo - 1e-10);
      CHECK(v <= hi + 1e-10);
    }
  }
}

TEST_CASE("the counterexample run leaves the hull and converges at second order") {
  const NodalField coarse = solve_counterexample(32);
  const NodalField fine = solve_counterexample(64);
  const EllipticCounterexample ex;
  const double e32 = max_error_vs(coarse, ex);
  const double e64 = max_error_vs(fine, ex);
  const double eoc = std::log(e32 / e64) / std::log(2.0);
  CHECK(eoc == doctest::Approx(2.0).epsilon(0.15));

  const ChpReport rep = verify(fine, boundary_hull(fine), kChpTolLinear);
  CHECK_FALSE(rep.pass);
  CHECK(rep.max_violation > 0.25);  // the hull escape is macroscopic
  CHECK(rep.max_violation < 0.35);
}
