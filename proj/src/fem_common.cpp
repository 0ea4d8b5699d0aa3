#include "fem_common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace chp::fem {

namespace {

constexpr double kSolveTol = 1e-12;       // target for the iterative paths
constexpr double kResidualCheck = 1e-10;  // accepted relative residual

int band_width(int ncomp) {
  // Widest coupling on an interval mesh: neighbouring node, any component,
  // |(i+1)*N + d - (i*N + c)| <= 2N - 1.
  return 2 * ncomp - 1;
}

}  // namespace

std::vector<std::vector<int>> node_elements(const Mesh& mesh) {
  std::vector<std::vector<int>> adj(mesh.node_count());
  const int nv = mesh.nodes_per_element();
  for (int e = 0; e < mesh.element_count(); ++e) {
    const int* nd = mesh.element_nodes(e);
    for (int k = 0; k < nv; ++k) adj[static_cast<size_t>(nd[k])].push_back(e);
  }
  return adj;  // per-node lists ascend because e does
}

Csr block_pattern(const Mesh& mesh, int ncomp, const std::vector<std::vector<int>>& adj) {
  const int nn = mesh.node_count();
  std::vector<std::vector<int>> nbr(nn);
  const int nv = mesh.nodes_per_element();
  for (int i = 0; i < nn; ++i) {
    std::vector<int>& row = nbr[static_cast<size_t>(i)];
    for (int e : adj[static_cast<size_t>(i)]) {
      const int* nd = mesh.element_nodes(e);
      for (int k = 0; k < nv; ++k) row.push_back(nd[k]);
    }
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }

  Csr a;
  a.n = nn * ncomp;
  a.ptr.assign(static_cast<size_t>(a.n) + 1, 0);
  for (int i = 0; i < nn; ++i) {
    const int row_nnz = static_cast<int>(nbr[static_cast<size_t>(i)].size()) * ncomp;
    for (int c = 0; c < ncomp; ++c) a.ptr[static_cast<size_t>(i * ncomp + c) + 1] = row_nnz;
  }
  for (size_t r = 0; r < static_cast<size_t>(a.n); ++r) a.ptr[r + 1] += a.ptr[r];
  a.col.resize(a.ptr.back());
  a.val.assign(a.ptr.back(), 0.0);
  for (int i = 0; i < nn; ++i) {
    for (int c = 0; c < ncomp; ++c) {
      int k = a.ptr[static_cast<size_t>(i * ncomp + c)];
      for (int j : nbr[static_cast<size_t>(i)]) {
        for (int d = 0; d < ncomp; ++d) a.col[k++] = j * ncomp + d;
      }
    }
  }
  return a;
}

void scatter_blocks(const Mesh& mesh, int ncomp, const std::vector<std::vector<int>>& adj,
                    const std::vector<double>& locals, Csr& a, bool parallel) {
  const int nn = mesh.node_count();
  const int nv = mesh.nodes_per_element();
  const int bs = nv * ncomp;  // rows/cols of one element block
  if (locals.size() != static_cast<size_t>(mesh.element_count()) * bs * bs) {
    throw std::invalid_argument("element block buffer has the wrong size");
  }

#pragma omp parallel for schedule(static) if (parallel)
  for (int i = 0; i < nn; ++i) {
    for (int e : adj[static_cast<size_t>(i)]) {  // ascending, fixed order
      const int* nd = mesh.element_nodes(e);
      int li = 0;
      while (nd[li] != i) ++li;
      const double* blk = locals.data() + static_cast<size_t>(e) * bs * bs;
      for (int c = 0; c < ncomp; ++c) {
        const int row = i * ncomp + c;
        const int* cb = a.col.data() + a.ptr[static_cast<size_t>(row)];
        const int* ce = a.col.data() + a.ptr[static_cast<size_t>(row) + 1];
        double* vb = a.val.data() + a.ptr[static_cast<size_t>(row)];
        for (int lj = 0; lj < nv; ++lj) {
          for (int d = 0; d < ncomp; ++d) {
            const int col = nd[lj] * ncomp + d;
            const int* pos = std::lower_bound(cb, ce, col);
            vb[pos - cb] += blk[(li * ncomp + c) * bs + (lj * ncomp + d)];
          }
        }
      }
    }
  }
}

std::vector<double> solve_pinned(const Csr& a, const Mesh& mesh, int ncomp,
                                 const std::vector<double>& rhs, const std::vector<double>& bc,
                                 bool symmetric, SolveInfo* info) {
  const int n = a.n;
  if (static_cast<int>(rhs.size()) != n || static_cast<int>(bc.size()) != n) {
    throw std::invalid_argument("right-hand side or boundary vector has the wrong size");
  }

  // Map unknowns to the reduced (free) numbering; -1 marks pinned rows.
  std::vector<int> red(static_cast<size_t>(n), -1);
  int nf = 0;
  for (int i = 0; i < mesh.node_count(); ++i) {
    if (mesh.on_boundary[static_cast<size_t>(i)]) continue;
    for (int c = 0; c < ncomp; ++c) red[static_cast<size_t>(i * ncomp + c)] = nf++;
  }

  std::vector<double> x(static_cast<size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    if (red[static_cast<size_t>(i)] < 0) x[static_cast<size_t>(i)] = bc[static_cast<size_t>(i)];
  }
  if (nf == 0) return x;

  // Reduced operator and lifted right-hand side.
  Csr ar;
  ar.n = nf;
  ar.ptr.assign(static_cast<size_t>(nf) + 1, 0);
  std::vector<double> br(static_cast<size_t>(nf), 0.0);
  std::vector<int> free_rows(static_cast<size_t>(nf), 0);
  for (int i = 0; i < n; ++i) {
    const int fi = red[static_cast<size_t>(i)];
    if (fi < 0) continue;
    free_rows[static_cast<size_t>(fi)] = i;
    double b = rhs[static_cast<size_t>(i)];
    size_t keep = 0;
    for (int k = a.ptr[static_cast<size_t>(i)]; k < a.ptr[static_cast<size_t>(i) + 1]; ++k) {
      if (red[static_cast<size_t>(a.col[k])] >= 0) {
        ++keep;
      } else {
        b -= a.val[k] * bc[static_cast<size_t>(a.col[k])];
      }
    }
    ar.ptr[static_cast<size_t>(fi) + 1] = keep;
    br[static_cast<size_t>(fi)] = b;
  }
  for (size_t r = 0; r < static_cast<size_t>(nf); ++r) ar.ptr[r + 1] += ar.ptr[r];
  ar.col.resize(ar.ptr.back());
  ar.val.resize(ar.ptr.back());
  for (int fi = 0; fi < nf; ++fi) {
    const int i = free_rows[static_cast<size_t>(fi)];
    int k2 = ar.ptr[static_cast<size_t>(fi)];
    for (int k = a.ptr[static_cast<size_t>(i)]; k < a.ptr[static_cast<size_t>(i) + 1]; ++k) {
      const int fj = red[static_cast<size_t>(a.col[k])];
      if (fj < 0) continue;
      ar.col[k2] = fj;
      ar.val[k2] = a.val[k];
      ++k2;
    }
  }

  std::vector<double> xr(static_cast<size_t>(nf), 0.0);
  SolveInfo local;
  if (mesh.dim == 1) {
    // Free unknowns keep the nodal ordering, so the reduced matrix stays
    // banded and a direct solve is both exact and cheap.
    BandedLU lu(nf, band_width(ncomp));
    for (int fi = 0; fi < nf; ++fi) {
      for (int k = ar.ptr[static_cast<size_t>(fi)]; k < ar.ptr[static_cast<size_t>(fi) + 1]; ++k) {
        lu.at(fi, ar.col[k]) = ar.val[k];
      }
    }
    lu.factor();
    lu.solve(br, xr);
  } else {
    const int max_iter = 20 * nf;
    const KrylovResult r = symmetric ? cg_jacobi(ar, br, xr, kSolveTol, max_iter)
                                     : bicgstab_jacobi(ar, br, xr, kSolveTol, max_iter);
    local.iterations = r.iterations;
  }

  // Residual check covers both paths (and catches a wrongly factored band).
  std::vector<double> res(static_cast<size_t>(nf));
  csr_matvec(ar, xr, res);
  for (int i = 0; i < nf; ++i) res[static_cast<size_t>(i)] = br[static_cast<size_t>(i)] - res[static_cast<size_t>(i)];
  const double bn = norm2(br);
  const double rel = bn > 0.0 ? norm2(res) / bn : norm2(res);
  local.rel_residual = rel;
  if (!(rel <= kResidualCheck)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "linear solve did not converge (relative residual %.3e)", rel);
    throw std::runtime_error(buf);
  }
  if (info) *info = local;

  for (int fi = 0; fi < nf; ++fi) x[static_cast<size_t>(free_rows[static_cast<size_t>(fi)])] = xr[static_cast<size_t>(fi)];
  return x;
}

}  // namespace chp::fem
