#pragma once

// Convex geometry in low ambient dimension (N <= 8): hulls kept in vertex
// representation, and the metric projection onto them.
//
// The projection minimises the anisotropic distance |x - y|_A induced by an
// SPD matrix A. With A = L L^T the substitution y -> L^T y turns this into a
// Euclidean closest-point problem over the transformed vertices, which is
// solved as a minimum-norm-point search over convex combinations with an
// active vertex set. Convex weights survive the substitution unchanged, so
// the result maps straight back.

#include <span>
#include <vector>

#include "chp/linalg.hpp"

namespace chp {

using Point = std::vector<double>;

// Minimal vertex representation: no vertex lies in the hull of the others.
struct ConvexPolytope {
  int ambient_dim = 0;
  std::vector<Point> vertices;
};

// SPD matrix defining <v,w>_A = v . (A w), with the lower Cholesky factor
// cached at construction. Construction rejects asymmetric input (1e-12
// relative) and factorization pivots at or below 1e-12 * max|A_ij|.
class MetricMatrix {
 public:
  static MetricMatrix from(const DenseMatrix& entries);
  static MetricMatrix identity(int n);

  int dim() const { return a_.rows; }
  const DenseMatrix& entries() const { return a_; }
  const DenseMatrix& cholesky() const { return l_; }

  double inner(std::span<const double> v, std::span<const double> w) const;
  double norm(std::span<const double> v) const;

  // out = L^T y, the change of variables that makes |.|_A Euclidean.
  void transform(std::span<const double> y, std::span<double> out) const;

 private:
  MetricMatrix() = default;
  DenseMatrix a_;
  DenseMatrix l_;
};

struct ProjectionResult {
  Point point;                  // closest point of K in the A-metric
  double distance = 0.0;        // |x - point|_A
  std::vector<double> weights;  // convex weights over K.vertices reproducing point
  int iterations = 0;
};

// Minimal hull of a nonempty point set. N = 1 reduces to [min, max]; N = 2
// returns the polygon counterclockwise starting at the lexicographic minimum;
// higher dimensions keep input order and drop every point that lies in the
// hull of the surviving others. Degenerate inputs (all equal, collinear) are
// fine and collapse accordingly.
ConvexPolytope convex_hull(const std::vector<Point>& points);

// argmin over K of |x - y|_A. Termination is on a 1e-12 relative optimality
// gap with an iteration cap of 10 * vertex count; failing the cap throws.
ProjectionResult metric_project(const Point& x, const ConvexPolytope& k, const MetricMatrix& a);

// Euclidean distance from x to K; zero (up to 1e-10) exactly when x is in K.
double violation_distance(const Point& x, const ConvexPolytope& k);

}  // namespace chp
