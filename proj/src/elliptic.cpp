#include "chp/elliptic.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <stdexcept>
#include <string>

#include "fem_common.hpp"

namespace chp {

namespace {

constexpr double kSymTol = 1e-12;

[[noreturn]] void element_error(const char* what, int element) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s at element %d", what, element);
  throw std::invalid_argument(buf);
}

DenseMatrix sample_metric(const EllipticCoefficients& coeffs, const std::array<double, 2>& x,
                          int element) {
  if (!coeffs.metric) return DenseMatrix::identity(coeffs.components);
  DenseMatrix a = coeffs.metric(x);
  if (a.rows != coeffs.components || a.cols != coeffs.components) {
    element_error("metric sample has the wrong shape", element);
  }
  if (!is_symmetric(a, kSymTol)) element_error("metric sample is not symmetric", element);
  DenseMatrix l(a.rows, a.cols);
  if (!cholesky_lower(a, 1e-12 * std::max(1.0, max_abs(a)), l)) {
    element_error("metric sample is not positive definite", element);
  }
  return a;
}

DenseMatrix sample_diffusion(const EllipticCoefficients& coeffs, const std::array<double, 2>& x,
                             int dim, int element) {
  if (!coeffs.diffusion) return DenseMatrix::identity(dim);
  DenseMatrix a = coeffs.diffusion(x);
  if (a.rows != dim || a.cols != dim) {
    element_error("diffusion sample has the wrong shape", element);
  }
  if (!is_symmetric(a, kSymTol)) element_error("diffusion sample is not symmetric", element);
  const double tol = 1e-12 * (1.0 + max_abs(a));
  if (sym_eigen_min(a) < coeffs.lambda - tol) {
    element_error("diffusion sample falls below the ellipticity floor", element);
  }
  return a;
}

// Dense (nv*N)^2 block for one element: A(x_e) (x) |e| grad phi_j . a grad phi_i.
void element_block(const Mesh& mesh, const EllipticCoefficients& coeffs, int e, double* blk) {
  const int nv = mesh.nodes_per_element();
  const int dim = mesh.dim;
  const int ncomp = coeffs.components;
  const int bs = nv * ncomp;

  const std::array<double, 2> mid = mesh.midpoint(e);
  const double vol = mesh.measure(e);
  const DenseMatrix a_comp = sample_metric(coeffs, mid, e);
  const DenseMatrix a_diff = sample_diffusion(coeffs, mid, dim, e);

  double grads[3 * 2];
  mesh.basis_gradients(e, grads);

  double geom[3 * 3];  // |e| * (a grad phi_lj) . grad phi_li
  for (int li = 0; li < nv; ++li) {
    for (int lj = 0; lj < nv; ++lj) {
      double s = 0.0;
      for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) {
          s += grads[li * dim + r] * a_diff(r, c) * grads[lj * dim + c];
        }
      }
      geom[li * 3 + lj] = vol * s;
    }
  }

  for (int li = 0; li < nv; ++li) {
    for (int c = 0; c < ncomp; ++c) {
      for (int lj = 0; lj < nv; ++lj) {
        for (int d = 0; d < ncomp; ++d) {
          blk[(li * ncomp + c) * bs + (lj * ncomp + d)] = a_comp(c, d) * geom[li * 3 + lj];
        }
      }
    }
  }
}

BlockSparseSystem assemble_impl(std::shared_ptr<const Mesh> mesh,
                                const EllipticCoefficients& coeffs, bool parallel) {
  if (!mesh) throw std::invalid_argument("mesh is null");
  if (coeffs.components < 1) throw std::invalid_argument("components must be positive");

  const int ne = mesh->element_count();
  const int bs = mesh->nodes_per_element() * coeffs.components;
  std::vector<double> locals(static_cast<size_t>(ne) * bs * bs);

  bool failed = false;
#pragma omp parallel for schedule(static) if (parallel)
  for (int e = 0; e < ne; ++e) {
    try {
      element_block(*mesh, coeffs, e, locals.data() + static_cast<size_t>(e) * bs * bs);
    } catch (...) {
#pragma omp atomic write
      failed = true;
    }
  }
  if (failed) {
    // Rerun serially so the reported element is the first bad one.
    for (int e = 0; e < ne; ++e) {
      element_block(*mesh, coeffs, e, locals.data() + static_cast<size_t>(e) * bs * bs);
    }
  }

  const std::vector<std::vector<int>> adj = fem::node_elements(*mesh);
  BlockSparseSystem sys;
  sys.mesh = mesh;
  sys.components = coeffs.components;
  sys.stiffness = fem::block_pattern(*mesh, coeffs.components, adj);
  fem::scatter_blocks(*mesh, coeffs.components, adj, locals, sys.stiffness, parallel);
  return sys;
}

}  // namespace

BlockSparseSystem assemble(std::shared_ptr<const Mesh> mesh, const EllipticCoefficients& coeffs) {
  return assemble_impl(std::move(mesh), coeffs, true);
}

BlockSparseSystem assemble_serial(std::shared_ptr<const Mesh> mesh,
                                  const EllipticCoefficients& coeffs) {
  return assemble_impl(std::move(mesh), coeffs, false);
}

NodalField solve_dirichlet(const BlockSparseSystem& system, const BoundaryValues& bc) {
  if (!system.mesh) throw std::invalid_argument("system has no mesh");
  const Mesh& mesh = *system.mesh;
  const int ncomp = system.components;
  const int n = mesh.node_count() * ncomp;

  std::vector<double> pinned(static_cast<size_t>(n), 0.0);
  for (int node : mesh.boundary_nodes) {
    const auto it = bc.find(node);
    if (it == bc.end()) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "missing boundary value at node %d", node);
      throw std::invalid_argument(buf);
    }
    if (static_cast<int>(it->second.size()) != ncomp) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "boundary value at node %d has the wrong size", node);
      throw std::invalid_argument(buf);
    }
    for (int c = 0; c < ncomp; ++c) {
      const double v = it->second[static_cast<size_t>(c)];
      if (!std::isfinite(v)) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "boundary value at node %d is not finite", node);
        throw std::invalid_argument(buf);
      }
      pinned[static_cast<size_t>(node * ncomp + c)] = v;
    }
  }

  const std::vector<double> rhs(static_cast<size_t>(n), 0.0);
  const std::vector<double> x =
      fem::solve_pinned(system.stiffness, mesh, ncomp, rhs, pinned, /*symmetric=*/true);

  NodalField u = make_field(system.mesh, ncomp);
  u.values = x;
  return u;
}

NodalField solve_scalar(std::shared_ptr<const Mesh> mesh,
                        std::function<DenseMatrix(std::array<double, 2>)> diffusion,
                        double lambda, const std::map<int, double>& bc) {
  EllipticCoefficients coeffs;
  coeffs.components = 1;
  coeffs.diffusion = std::move(diffusion);
  coeffs.lambda = lambda;
  const BlockSparseSystem sys = assemble(std::move(mesh), coeffs);
  BoundaryValues vec_bc;
  for (const auto& [node, v] : bc) vec_bc[node] = {v};
  return solve_dirichlet(sys, vec_bc);
}

}  // namespace chp
