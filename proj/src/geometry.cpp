#include "chp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace chp {

namespace {

constexpr double kGapTolRel = 1e-12;   // optimality gap, relative to |z|^2
constexpr int kIterFactor = 10;        // cap = factor * vertex count
constexpr double kDropTol = 1e-14;     // weight below this leaves the active set
constexpr double kStallRel = 1e-13;    // |z|^2 decrease below this is rounding noise

void check_points(const std::vector<Point>& points) {
  if (points.empty()) throw std::invalid_argument("empty point set");
  const size_t n = points.front().size();
  if (n == 0) throw std::invalid_argument("invalid point");
  for (const Point& p : points) {
    if (p.size() != n) throw std::invalid_argument("invalid point");
    for (double v : p)
      if (!std::isfinite(v)) throw std::invalid_argument("invalid point");
  }
}

// ----- Euclidean minimum-norm point over conv{p_0..p_{m-1}} ---------------

struct MnpState {
  std::vector<int> active;      // insertion order
  std::vector<double> w;        // positive weights over `active`, sum 1
  std::vector<double> z;        // current point, sum w_i p_i
  int iterations = 0;
};

double sqnorm(std::span<const double> v) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return s;
}

// Affine minimiser of |sum alpha_r q_r|^2 with sum alpha = 1 over the active
// points, anchored at the first of them: solve the Gram normal equations in
// the difference directions. Returns false when the directions are (nearly)
// linearly dependent, which at a positive optimality gap cannot happen in
// exact arithmetic.
bool affine_minimizer(const double* pts, int n, const std::vector<int>& active,
                      std::vector<double>& alpha) {
  const int k = static_cast<int>(active.size());
  alpha.assign(k, 0.0);
  if (k == 1) {
    alpha[0] = 1.0;
    return true;
  }
  const double* q0 = pts + static_cast<size_t>(active[0]) * n;
  DenseMatrix g(k - 1, k - 1);
  std::vector<double> rhs(k - 1);
  for (int r = 0; r < k - 1; ++r) {
    const double* qr = pts + static_cast<size_t>(active[r + 1]) * n;
    for (int c = r; c < k - 1; ++c) {
      const double* qc = pts + static_cast<size_t>(active[c + 1]) * n;
      double s = 0.0;
      for (int d = 0; d < n; ++d) s += (qr[d] - q0[d]) * (qc[d] - q0[d]);
      g(r, c) = s;
      g(c, r) = s;
    }
    double s = 0.0;
    for (int d = 0; d < n; ++d) s += (qr[d] - q0[d]) * q0[d];
    rhs[r] = -s;
  }
  double diag_max = 0.0;
  for (int r = 0; r < k - 1; ++r) diag_max = std::max(diag_max, g(r, r));
  DenseMatrix l;
  if (!cholesky_lower(g, 1e-13 * std::max(diag_max, 1e-300), l)) return false;
  std::vector<double> beta(k - 1);
  cholesky_solve(l, rhs, beta);
  double sum = 0.0;
  for (int r = 0; r < k - 1; ++r) {
    alpha[r + 1] = beta[r];
    sum += beta[r];
  }
  alpha[0] = 1.0 - sum;
  return true;
}

void recompute_point(const double* pts, int n, MnpState& st) {
  st.z.assign(n, 0.0);
  for (size_t r = 0; r < st.active.size(); ++r) {
    const double* q = pts + static_cast<size_t>(st.active[r]) * n;
    for (int d = 0; d < n; ++d) st.z[d] += st.w[r] * q[d];
  }
}

// pts: m points of dimension n, row-major. Finds the point of least
// Euclidean norm in their convex hull.
MnpState min_norm_point(const double* pts, int m, int n, int max_iter) {
  MnpState st;
  {
    int best = 0;
    double best_sq = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      const double sq = sqnorm({pts + static_cast<size_t>(i) * n, static_cast<size_t>(n)});
      if (sq < best_sq) {
        best_sq = sq;
        best = i;
      }
    }
    st.active = {best};
    st.w = {1.0};
    st.z.assign(pts + static_cast<size_t>(best) * n, pts + static_cast<size_t>(best) * n + n);
  }
  std::vector<double> alpha;

  for (st.iterations = 1; st.iterations <= max_iter; ++st.iterations) {
    const double zsq = sqnorm(st.z);
    const std::vector<int> active_in = st.active;
    const std::vector<double> w_in = st.w;
    // vertex most opposed to the current point, lowest index on ties
    int j = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      const double* p = pts + static_cast<size_t>(i) * n;
      double s = 0.0;
      for (int d = 0; d < n; ++d) s += p[d] * st.z[d];
      if (s < best) {
        best = s;
        j = i;
      }
    }
    const double gap = zsq - best;
    if (gap <= kGapTolRel * zsq) return st;
    if (std::find(st.active.begin(), st.active.end(), j) != st.active.end())
      return st;  // numerical stall: the improving vertex is already active

    st.active.push_back(j);
    st.w.push_back(0.0);

    // restore a corral: walk toward the affine minimiser, dropping vertices
    // whose weight hits zero
    const int minor_cap = static_cast<int>(st.active.size()) + 2;
    for (int minor = 0; minor < minor_cap; ++minor) {
      if (!affine_minimizer(pts, n, st.active, alpha)) {
        // dependent direction: the new vertex adds nothing measurable
        st.active.pop_back();
        st.w.pop_back();
        recompute_point(pts, n, st);
        return st;
      }
      bool interior = true;
      for (double a : alpha)
        if (a <= 0.0) {
          interior = false;
          break;
        }
      if (interior) {
        st.w = alpha;
        break;
      }
      double theta = 1.0;
      int hit = -1;
      for (size_t r = 0; r < alpha.size(); ++r) {
        if (alpha[r] > 0.0) continue;
        const double denom = st.w[r] - alpha[r];
        if (denom <= 0.0) continue;
        const double t = st.w[r] / denom;
        if (t < theta) {
          theta = t;
          hit = static_cast<int>(r);
        }
      }
      for (size_t r = 0; r < st.w.size(); ++r)
        st.w[r] = (1.0 - theta) * st.w[r] + theta * alpha[r];
      if (hit >= 0) st.w[hit] = 0.0;
      for (int r = static_cast<int>(st.w.size()) - 1; r >= 0; --r) {
        if (st.w[r] <= kDropTol) {
          st.active.erase(st.active.begin() + r);
          st.w.erase(st.w.begin() + r);
        }
      }
      if (st.active.empty()) {  // numerical safety net, unreachable in exact arithmetic
        st.active = {j};
        st.w = {1.0};
        break;
      }
      double total = std::accumulate(st.w.begin(), st.w.end(), 0.0);
      if (total > 0.0)
        for (double& v : st.w) v /= total;
    }
    recompute_point(pts, n, st);
    // no measurable decrease: the floating-point floor is reached, no matter
    // what the gap still reads; hand back the better of the two iterates
    const double new_sq = sqnorm(st.z);
    if (new_sq >= zsq * (1.0 - kStallRel)) {
      if (new_sq > zsq) {
        st.active = active_in;
        st.w = w_in;
        recompute_point(pts, n, st);
      }
      return st;
    }
  }
  throw std::runtime_error("metric projection did not converge within the iteration cap");
}

// ----- hull helpers -------------------------------------------------------

ConvexPolytope hull_1d(const std::vector<Point>& points) {
  double lo = points[0][0], hi = points[0][0];
  for (const Point& p : points) {
    lo = std::min(lo, p[0]);
    hi = std::max(hi, p[0]);
  }
  ConvexPolytope k;
  k.ambient_dim = 1;
  k.vertices.push_back({lo});
  if (hi > lo) k.vertices.push_back({hi});
  return k;
}

double cross(const Point& o, const Point& a, const Point& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Andrew's monotone chain, counterclockwise, collinear points dropped.
ConvexPolytope hull_2d(const std::vector<Point>& points) {
  std::vector<Point> pts = points;
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  double span = 0.0;
  for (const Point& p : pts) {
    span = std::max(span, std::fabs(p[0] - pts[0][0]));
    span = std::max(span, std::fabs(p[1] - pts[0][1]));
  }
  const double eps = 1e-12 * std::max(span * span, 1e-300);

  ConvexPolytope k;
  k.ambient_dim = 2;
  if (pts.size() == 1) {
    k.vertices = pts;
    return k;
  }
  const size_t m = pts.size();
  std::vector<Point> h(2 * m);
  size_t t = 0;
  for (size_t i = 0; i < m; ++i) {  // lower
    while (t >= 2 && cross(h[t - 2], h[t - 1], pts[i]) <= eps) --t;
    h[t++] = pts[i];
  }
  for (size_t i = m - 1, lower = t + 1; i-- > 0;) {  // upper
    while (t >= lower && cross(h[t - 2], h[t - 1], pts[i]) <= eps) --t;
    h[t++] = pts[i];
  }
  h.resize(t - 1);  // last point repeats the first
  k.vertices = std::move(h);
  return k;
}

// General dimension: drop, one at a time, every point lying in the hull of
// the current survivors. Exact duplicates fall out on their first pass.
ConvexPolytope hull_filter(const std::vector<Point>& points, int n) {
  std::vector<Point> work = points;
  double span = 0.0;
  for (const Point& p : points)
    for (int d = 0; d < n; ++d) span = std::max(span, std::fabs(p[d] - points[0][d]));
  const double member_tol = 1e-12 * std::max(1.0, span);

  MetricMatrix eye = MetricMatrix::identity(n);
  size_t i = 0;
  while (i < work.size() && work.size() > 1) {
    ConvexPolytope rest;
    rest.ambient_dim = n;
    rest.vertices.reserve(work.size() - 1);
    for (size_t r = 0; r < work.size(); ++r)
      if (r != i) rest.vertices.push_back(work[r]);
    if (metric_project(work[i], rest, eye).distance <= member_tol)
      work.erase(work.begin() + i);
    else
      ++i;
  }
  ConvexPolytope k;
  k.ambient_dim = n;
  k.vertices = std::move(work);
  return k;
}

}  // namespace

// ----- MetricMatrix -------------------------------------------------------

MetricMatrix MetricMatrix::from(const DenseMatrix& entries) {
  if (entries.rows != entries.cols || entries.rows == 0)
    throw std::invalid_argument("metric matrix must be square");
  if (!is_symmetric(entries, 1e-12))
    throw std::invalid_argument("metric matrix not symmetric");
  MetricMatrix m;
  m.a_ = entries;
  if (!cholesky_lower(entries, 1e-12 * max_abs(entries), m.l_))
    throw std::invalid_argument("metric matrix not positive definite");
  return m;
}

MetricMatrix MetricMatrix::identity(int n) { return from(DenseMatrix::identity(n)); }

double MetricMatrix::inner(std::span<const double> v, std::span<const double> w) const {
  const int n = a_.rows;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    double aw = 0.0;
    for (int j = 0; j < n; ++j) aw += a_(i, j) * w[j];
    s += v[i] * aw;
  }
  return s;
}

double MetricMatrix::norm(std::span<const double> v) const {
  return std::sqrt(std::max(0.0, inner(v, v)));
}

void MetricMatrix::transform(std::span<const double> y, std::span<double> out) const {
  const int n = a_.rows;
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = i; j < n; ++j) s += l_(j, i) * y[j];  // (L^T)_ij = L_ji
    out[i] = s;
  }
}

// ----- public API ---------------------------------------------------------

ConvexPolytope convex_hull(const std::vector<Point>& points) {
  check_points(points);
  const int n = static_cast<int>(points.front().size());
  if (n == 1) return hull_1d(points);
  if (n == 2) return hull_2d(points);
  return hull_filter(points, n);
}

ProjectionResult metric_project(const Point& x, const ConvexPolytope& k, const MetricMatrix& a) {
  const int n = k.ambient_dim;
  if (k.vertices.empty()) throw std::invalid_argument("empty point set");
  if (static_cast<int>(x.size()) != n || a.dim() != n)
    throw std::invalid_argument("dimension mismatch");

  const int m = static_cast<int>(k.vertices.size());
  // p_i = L^T (v_i - x); the minimum-norm point over these is L^T(Pi x - x)
  std::vector<double> pts(static_cast<size_t>(m) * n);
  std::vector<double> diff(n);
  for (int i = 0; i < m; ++i) {
    if (static_cast<int>(k.vertices[i].size()) != n)
      throw std::invalid_argument("dimension mismatch");
    for (int d = 0; d < n; ++d) diff[d] = k.vertices[i][d] - x[d];
    a.transform(diff, {pts.data() + static_cast<size_t>(i) * n, static_cast<size_t>(n)});
  }

  MnpState st = min_norm_point(pts.data(), m, n, kIterFactor * m);

  ProjectionResult res;
  res.iterations = st.iterations;
  res.weights.assign(m, 0.0);
  for (size_t r = 0; r < st.active.size(); ++r) res.weights[st.active[r]] = st.w[r];
  res.point.assign(n, 0.0);
  for (int i = 0; i < m; ++i) {
    if (res.weights[i] == 0.0) continue;
    for (int d = 0; d < n; ++d) res.point[d] += res.weights[i] * k.vertices[i][d];
  }
  res.distance = std::sqrt(sqnorm(st.z));
  return res;
}

double violation_distance(const Point& x, const ConvexPolytope& k) {
  return metric_project(x, k, MetricMatrix::identity(k.ambient_dim)).distance;
}

}  // namespace chp
