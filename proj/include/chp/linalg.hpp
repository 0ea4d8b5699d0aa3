#pragma once

// Dense and sparse linear algebra shared by the whole lab. Dense matrices
// stay small here (component counts up to 8, spatial dimension up to 2), so
// everything is plain row-major storage with no cleverness. The sparse side
// carries the assembled FEM operators: CSR with an OpenMP row-parallel
// matvec, a banded LU for interval meshes and Jacobi-preconditioned Krylov
// solvers for the 2D systems.
//
// All reductions (dot, norm) sum fixed-size index blocks and then combine
// the block sums in order. The result is independent of the thread count,
// which is what makes "two runs give byte-identical output" a property we
// can actually promise.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace chp {

struct DenseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;  // row-major

  DenseMatrix() = default;
  DenseMatrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

  double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

  static DenseMatrix identity(int n);
};

// Largest |a_ij|.
double max_abs(const DenseMatrix& m);

// max |a_ij - a_ji| <= tol_rel * max|a|.
bool is_symmetric(const DenseMatrix& m, double tol_rel);

// Lower Cholesky factor of an SPD matrix. Fails (returns false) as soon as a
// pivot drops to pivot_floor or below; the partially written factor is then
// meaningless.
bool cholesky_lower(const DenseMatrix& a, double pivot_floor, DenseMatrix& l);

// Solve L L^T x = b given the lower factor.
void cholesky_solve(const DenseMatrix& l, std::span<const double> b, std::span<double> x);

// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a small
// symmetric matrix, by cyclic Jacobi rotations.
void sym_eigen(const DenseMatrix& a, std::vector<double>& values, DenseMatrix& vectors);

// Smallest eigenvalue of a symmetric matrix; closed form for n <= 2, Jacobi
// otherwise.
double sym_eigen_min(const DenseMatrix& a);

// --- deterministic reductions -------------------------------------------

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
double norm_inf(std::span<const double> x);

// --- sparse -------------------------------------------------------------

struct Csr {
  int n = 0;  // square
  std::vector<int> ptr;  // size n+1
  std::vector<int> col;  // ascending within each row
  std::vector<double> val;

  size_t nnz() const { return col.size(); }
};

// y = A x. The parallel version splits by row, so both orderings of the
// per-row sums coincide and the two functions agree bitwise.
void csr_matvec(const Csr& a, std::span<const double> x, std::span<double> y);
void csr_matvec_serial(const Csr& a, std::span<const double> x, std::span<double> y);

struct KrylovResult {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

// Preconditioned conjugate gradients, Jacobi preconditioner. x holds the
// initial guess on entry and the solution on exit. rel_tol is on |r|/|b|.
KrylovResult cg_jacobi(const Csr& a, std::span<const double> b, std::vector<double>& x,
                       double rel_tol, int max_iter);

// BiCGSTAB with Jacobi preconditioner for the nonsymmetric systems an
// advection term produces.
KrylovResult bicgstab_jacobi(const Csr& a, std::span<const double> b, std::vector<double>& x,
                             double rel_tol, int max_iter);

// Band matrix with half-bandwidth kb, row i holding columns [i-kb, i+kb].
// factor() is LU without pivoting, which is safe for the SPD and the
// mass-dominated mildly nonsymmetric systems we feed it.
class BandedLU {
 public:
  BandedLU(int n, int kb);

  double& at(int i, int j);
  void factor();               // throws std::runtime_error on a vanishing pivot
  void solve(std::span<const double> b, std::span<double> x) const;

  int size() const { return n_; }
  int bandwidth() const { return kb_; }

 private:
  int n_ = 0;
  int kb_ = 0;
  int w_ = 0;  // 2*kb+1 stored entries per row
  std::vector<double> band_;
  bool factored_ = false;
};

}  // namespace chp
