// Times the OpenMP kernels against their serial reference implementations
// and checks that both produce bitwise-identical results. On a single core
// the speedup column sits near 1; the bitwise column must read "yes"
// regardless of the thread count.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "chp/elliptic.hpp"
#include "chp/field.hpp"
#include "chp/geometry.hpp"
#include "chp/linalg.hpp"
#include "chp/mesh.hpp"
#include "chp/verifier.hpp"

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void row(const char* name, double serial_ms, double parallel_ms, bool bitwise) {
  std::printf("%-16s %12.3f %12.3f %9.2fx %8s\n", name, serial_ms, parallel_ms,
              serial_ms / parallel_ms, bitwise ? "yes" : "NO");
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (no OpenMP)\n");
#endif
  std::printf("%-16s %12s %12s %10s %8s\n", "kernel", "serial [ms]", "parallel [ms]",
              "speedup", "bitwise");

  const auto mesh = std::make_shared<const chp::Mesh>(chp::rect_mesh(0, 1, 0, 1, 96, 96));

  // Assembly: two-component system with a smooth metric.
  chp::EllipticCoefficients coeffs;
  coeffs.components = 2;
  coeffs.metric = [](std::array<double, 2> x) {
    chp::DenseMatrix m(2, 2);
    m(0, 0) = 2.0 + std::sin(3.0 * x[0]);
    m(1, 1) = 2.0 + std::cos(2.0 * x[1]);
    m(0, 1) = m(1, 0) = 0.5 * std::sin(x[0] + x[1]);
    return m;
  };
  chp::BlockSparseSystem sys_serial;
  chp::BlockSparseSystem sys_parallel;
  const double t_asm_s = time_ms([&] { sys_serial = chp::assemble_serial(mesh, coeffs); }, 5);
  const double t_asm_p = time_ms([&] { sys_parallel = chp::assemble(mesh, coeffs); }, 5);
  row("assembly", t_asm_s, t_asm_p, sys_serial.stiffness.val == sys_parallel.stiffness.val);

  // Sparse matvec on the assembled operator.
  const chp::Csr& a = sys_parallel.stiffness;
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> x(static_cast<size_t>(a.n));
  for (double& v : x) v = unif(rng);
  std::vector<double> y_serial(x.size());
  std::vector<double> y_parallel(x.size());
  const double t_mv_s = time_ms([&] { chp::csr_matvec_serial(a, x, y_serial); }, 200);
  const double t_mv_p = time_ms([&] { chp::csr_matvec(a, x, y_parallel); }, 200);
  row("csr_matvec", t_mv_s, t_mv_p, y_serial == y_parallel);

  // Nodewise metric projection of a random field onto a hexagon.
  chp::ConvexPolytope hexagon;
  hexagon.ambient_dim = 2;
  for (int k = 0; k < 6; ++k) {
    const double th = 2.0 * std::acos(-1.0) * k / 6;
    hexagon.vertices.push_back({0.6 * std::cos(th), 0.6 * std::sin(th)});
  }
  chp::NodalField field = chp::make_field(mesh, 2);
  for (double& v : field.values) v = 1.5 * unif(rng);
  const chp::MetricMatrix metric = chp::MetricMatrix::identity(2);
  chp::NodalField proj_serial;
  chp::NodalField proj_parallel;
  const double t_pr_s =
      time_ms([&] { proj_serial = chp::project_field_serial(field, hexagon, metric); }, 5);
  const double t_pr_p =
      time_ms([&] { proj_parallel = chp::project_field(field, hexagon, metric); }, 5);
  row("project_field", t_pr_s, t_pr_p, proj_serial.values == proj_parallel.values);

  // Violation scan of the same field.
  std::vector<double> scan_serial;
  std::vector<double> scan_parallel;
  const double t_sc_s =
      time_ms([&] { scan_serial = chp::violation_scan_serial(field, hexagon); }, 5);
  const double t_sc_p = time_ms([&] { scan_parallel = chp::violation_scan(field, hexagon); }, 5);
  row("violation_scan", t_sc_s, t_sc_p, scan_serial == scan_parallel);

  const bool all_match = sys_serial.stiffness.val == sys_parallel.stiffness.val &&
                         y_serial == y_parallel && proj_serial.values == proj_parallel.values &&
                         scan_serial == scan_parallel;
  return all_match ? 0 : 1;
}
