#include "chp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace chp {

DenseMatrix DenseMatrix::identity(int n) {
  DenseMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double max_abs(const DenseMatrix& m) {
  double v = 0.0;
  for (double x : m.a) v = std::max(v, std::fabs(x));
  return v;
}

bool is_symmetric(const DenseMatrix& m, double tol_rel) {
  if (m.rows != m.cols) return false;
  const double scale = std::max(max_abs(m), 1e-300);
  for (int i = 0; i < m.rows; ++i)
    for (int j = i + 1; j < m.cols; ++j)
      if (std::fabs(m(i, j) - m(j, i)) > tol_rel * scale) return false;
  return true;
}

bool cholesky_lower(const DenseMatrix& a, double pivot_floor, DenseMatrix& l) {
  const int n = a.rows;
  l = DenseMatrix(n, n);
  for (int j = 0; j < n; ++j) {
    double d = a(j, j);
    for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (d <= pivot_floor) return false;
    l(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return true;
}

void cholesky_solve(const DenseMatrix& l, std::span<const double> b, std::span<double> x) {
  const int n = l.rows;
  // forward: L y = b
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= l(i, k) * x[k];
    x[i] = s / l(i, i);
  }
  // backward: L^T x = y
  for (int i = n - 1; i >= 0; --i) {
    double s = x[i];
    for (int k = i + 1; k < n; ++k) s -= l(k, i) * x[k];
    x[i] = s / l(i, i);
  }
}

void sym_eigen(const DenseMatrix& a, std::vector<double>& values, DenseMatrix& vectors) {
  const int n = a.rows;
  DenseMatrix m = a;
  vectors = DenseMatrix::identity(n);
  const double scale = std::max(max_abs(a), 1e-300);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off = std::max(off, std::fabs(m(p, q)));
    if (off <= 1e-15 * scale) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::fabs(m(p, q)) <= 1e-18 * scale) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * m(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double mkp = m(k, p), mkq = m(k, q);
          m(k, p) = c * mkp - s * mkq;
          m(k, q) = s * mkp + c * mkq;
        }
        for (int k = 0; k < n; ++k) {
          const double mpk = m(p, k), mqk = m(q, k);
          m(p, k) = c * mpk - s * mqk;
          m(q, k) = s * mpk + c * mqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = vectors(k, p), vkq = vectors(k, q);
          vectors(k, p) = c * vkp - s * vkq;
          vectors(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  values.resize(n);
  for (int i = 0; i < n; ++i) values[i] = m(i, i);
  // sort ascending, carrying the eigenvector columns along
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int i, int j) { return values[i] < values[j]; });
  std::vector<double> sv(n);
  DenseMatrix svec(n, n);
  for (int i = 0; i < n; ++i) {
    sv[i] = values[order[i]];
    for (int k = 0; k < n; ++k) svec(k, i) = vectors(k, order[i]);
  }
  values = sv;
  vectors = svec;
}

double sym_eigen_min(const DenseMatrix& a) {
  if (a.rows == 1) return a(0, 0);
  if (a.rows == 2) {
    const double tr = a(0, 0) + a(1, 1);
    const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    return tr / 2.0 - disc;
  }
  std::vector<double> vals;
  DenseMatrix vecs;
  sym_eigen(a, vals, vecs);
  return vals.front();
}

// --- deterministic reductions -------------------------------------------

namespace {
constexpr std::ptrdiff_t kBlock = 1024;
}

double dot(std::span<const double> x, std::span<const double> y) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
  const std::ptrdiff_t nb = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(static_cast<size_t>(std::max<std::ptrdiff_t>(nb, 1)), 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    double s = 0.0;
    const std::ptrdiff_t end = std::min(n, (b + 1) * kBlock);
    for (std::ptrdiff_t i = b * kBlock; i < end; ++i) s += x[i] * y[i];
    partial[b] = s;
  }
  double s = 0.0;
  for (std::ptrdiff_t b = 0; b < nb; ++b) s += partial[b];
  return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

double norm_inf(std::span<const double> x) {
  double v = 0.0;
  for (double e : x) v = std::max(v, std::fabs(e));
  return v;
}

// --- sparse -------------------------------------------------------------

void csr_matvec(const Csr& a, std::span<const double> x, std::span<double> y) {
  const int n = a.n;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = a.ptr[i]; k < a.ptr[i + 1]; ++k) s += a.val[k] * x[a.col[k]];
    y[i] = s;
  }
}

void csr_matvec_serial(const Csr& a, std::span<const double> x, std::span<double> y) {
  for (int i = 0; i < a.n; ++i) {
    double s = 0.0;
    for (int k = a.ptr[i]; k < a.ptr[i + 1]; ++k) s += a.val[k] * x[a.col[k]];
    y[i] = s;
  }
}

namespace {

std::vector<double> jacobi_diag(const Csr& a) {
  std::vector<double> d(a.n, 1.0);
  for (int i = 0; i < a.n; ++i)
    for (int k = a.ptr[i]; k < a.ptr[i + 1]; ++k)
      if (a.col[k] == i && a.val[k] != 0.0) d[i] = a.val[k];
  return d;
}

}  // namespace

KrylovResult cg_jacobi(const Csr& a, std::span<const double> b, std::vector<double>& x,
                       double rel_tol, int max_iter) {
  const int n = a.n;
  x.resize(n, 0.0);
  const double bnorm = norm2(b);
  KrylovResult res;
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    res.converged = true;
    return res;
  }
  const std::vector<double> diag = jacobi_diag(a);
  std::vector<double> r(n), z(n), p(n), ap(n);
  csr_matvec(a, x, ap);
  for (int i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  for (int i = 0; i < n; ++i) z[i] = r[i] / diag[i];
  p = z;
  double rz = dot(r, z);
  for (int it = 0; it < max_iter; ++it) {
    res.rel_residual = norm2(r) / bnorm;
    if (res.rel_residual <= rel_tol) {
      res.converged = true;
      res.iterations = it;
      return res;
    }
    csr_matvec(a, p, ap);
    const double pap = dot(p, ap);
    if (pap <= 0.0) break;  // not SPD (or breakdown): bail out, caller checks residual
    const double alpha = rz / pap;
    for (int i = 0; i < n; ++i) x[i] += alpha * p[i];
    for (int i = 0; i < n; ++i) r[i] -= alpha * ap[i];
    for (int i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  res.iterations = max_iter;
  res.rel_residual = norm2(r) / bnorm;
  res.converged = res.rel_residual <= rel_tol;
  return res;
}

KrylovResult bicgstab_jacobi(const Csr& a, std::span<const double> b, std::vector<double>& x,
                             double rel_tol, int max_iter) {
  const int n = a.n;
  x.resize(n, 0.0);
  const double bnorm = norm2(b);
  KrylovResult res;
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    res.converged = true;
    return res;
  }
  const std::vector<double> diag = jacobi_diag(a);
  std::vector<double> r(n), r0(n), p(n, 0.0), v(n, 0.0), s(n), t(n), ph(n), sh(n);
  csr_matvec(a, x, v);
  for (int i = 0; i < n; ++i) r[i] = b[i] - v[i];
  r0 = r;
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  std::fill(v.begin(), v.end(), 0.0);
  for (int it = 0; it < max_iter; ++it) {
    res.rel_residual = norm2(r) / bnorm;
    if (res.rel_residual <= rel_tol) {
      res.converged = true;
      res.iterations = it;
      return res;
    }
    const double rho_new = dot(r0, r);
    if (rho_new == 0.0) break;
    const double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    for (int i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    for (int i = 0; i < n; ++i) ph[i] = p[i] / diag[i];
    csr_matvec(a, ph, v);
    const double r0v = dot(r0, v);
    if (r0v == 0.0) break;
    alpha = rho / r0v;
    for (int i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    for (int i = 0; i < n; ++i) sh[i] = s[i] / diag[i];
    csr_matvec(a, sh, t);
    const double tt = dot(t, t);
    omega = tt > 0.0 ? dot(t, s) / tt : 0.0;
    for (int i = 0; i < n; ++i) x[i] += alpha * ph[i] + omega * sh[i];
    for (int i = 0; i < n; ++i) r[i] = s[i] - omega * t[i];
    if (omega == 0.0) break;
  }
  res.iterations = max_iter;
  res.rel_residual = norm2(r) / bnorm;
  res.converged = res.rel_residual <= rel_tol;
  return res;
}

// --- banded --------------------------------------------------------------

BandedLU::BandedLU(int n, int kb)
    : n_(n), kb_(kb), w_(2 * kb + 1), band_(static_cast<size_t>(n) * (2 * kb + 1), 0.0) {
  if (n <= 0 || kb < 0) throw std::invalid_argument("banded matrix: bad shape");
}

double& BandedLU::at(int i, int j) {
  if (i < 0 || i >= n_ || j < i - kb_ || j > i + kb_)
    throw std::out_of_range("banded matrix: entry outside band");
  return band_[static_cast<size_t>(i) * w_ + (j - i + kb_)];
}

void BandedLU::factor() {
  for (int k = 0; k < n_; ++k) {
    const double piv = band_[static_cast<size_t>(k) * w_ + kb_];
    if (std::fabs(piv) < 1e-300)
      throw std::runtime_error("banded factorization hit a zero pivot at row " + std::to_string(k));
    const int iend = std::min(n_ - 1, k + kb_);
    for (int i = k + 1; i <= iend; ++i) {
      double& lik = band_[static_cast<size_t>(i) * w_ + (k - i + kb_)];
      lik /= piv;
      const double m = lik;
      const int jend = std::min(n_ - 1, k + kb_);
      for (int j = k + 1; j <= jend; ++j)
        band_[static_cast<size_t>(i) * w_ + (j - i + kb_)] -=
            m * band_[static_cast<size_t>(k) * w_ + (j - k + kb_)];
    }
  }
  factored_ = true;
}

void BandedLU::solve(std::span<const double> b, std::span<double> x) const {
  if (!factored_) throw std::logic_error("banded solve before factor()");
  // L y = b (unit diagonal)
  for (int i = 0; i < n_; ++i) {
    double s = b[i];
    const int j0 = std::max(0, i - kb_);
    for (int j = j0; j < i; ++j) s -= band_[static_cast<size_t>(i) * w_ + (j - i + kb_)] * x[j];
    x[i] = s;
  }
  // U x = y
  for (int i = n_ - 1; i >= 0; --i) {
    double s = x[i];
    const int j1 = std::min(n_ - 1, i + kb_);
    for (int j = i + 1; j <= j1; ++j) s -= band_[static_cast<size_t>(i) * w_ + (j - i + kb_)] * x[j];
    x[i] = s / band_[static_cast<size_t>(i) * w_ + kb_];
  }
}

}  // namespace chp
