#pragma once

// Internal FEM plumbing shared by the elliptic and parabolic solvers:
// block CSR pattern over (node, component) unknowns, a deterministic
// two-phase scatter, and the Dirichlet-reduced solve.
//
// Determinism note: element blocks are computed independently (phase one,
// parallel over elements), then each matrix row pulls its contributions from
// the adjacent elements in ascending element order (phase two, parallel over
// rows). No atomics, no reduction trees, so the assembled values do not
// depend on the thread count.

#include <vector>

#include "chp/linalg.hpp"
#include "chp/mesh.hpp"

namespace chp::fem {

// Elements adjacent to each node, ascending element index.
std::vector<std::vector<int>> node_elements(const Mesh& mesh);

// CSR with the sparsity of the (node*ncomp) x (node*ncomp) operator, values
// zeroed. Columns ascend within each row.
Csr block_pattern(const Mesh& mesh, int ncomp, const std::vector<std::vector<int>>& adj);

// locals: per element a dense (nv*ncomp)^2 row-major block, local unknown
// (v, c) flattened as v*ncomp + c. Accumulates into `a` (pattern required).
void scatter_blocks(const Mesh& mesh, int ncomp, const std::vector<std::vector<int>>& adj,
                    const std::vector<double>& locals, Csr& a, bool parallel);

struct SolveInfo {
  int iterations = 0;      // 0 for the direct banded path
  double rel_residual = 0.0;
};

// Solve a u = rhs with boundary nodes pinned to bc (full-length, node-major
// like the unknowns). Row/column elimination with the boundary lift moved to
// the right-hand side keeps the reduced operator symmetric whenever the full
// one is. Interval meshes go through banded LU; 2D through Jacobi-CG, or
// Jacobi-BiCGSTAB when `symmetric` is false. The reduced residual is checked
// to 1e-10 relative and a failure throws with the achieved residual.
std::vector<double> solve_pinned(const Csr& a, const Mesh& mesh, int ncomp,
                                 const std::vector<double>& rhs, const std::vector<double>& bc,
                                 bool symmetric, SolveInfo* info = nullptr);

}  // namespace chp::fem
