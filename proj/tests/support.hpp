#pragma once

// Shared generators for the property-style tests. Everything is seeded
// explicitly so failures replay.

#include <cmath>
#include <random>
#include <vector>

#include "chp/geometry.hpp"
#include "chp/linalg.hpp"

namespace testsup {

inline std::vector<chp::Point> random_points(std::mt19937_64& rng, int count, int dim, double lo,
                                             double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<chp::Point> pts(static_cast<size_t>(count), chp::Point(static_cast<size_t>(dim)));
  for (chp::Point& p : pts) {
    for (double& x : p) x = u(rng);
  }
  return pts;
}

// SPD matrix with eigenvalues spread geometrically over [1, cond], conjugated
// by a product of random Givens rotations.
inline chp::DenseMatrix random_spd(std::mt19937_64& rng, int n, double cond) {
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::acos(-1.0));
  chp::DenseMatrix q = chp::DenseMatrix::identity(n);
  for (int round = 0; round < 2; ++round) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double th = ang(rng);
        const double c = std::cos(th), s = std::sin(th);
        for (int k = 0; k < n; ++k) {
          const double qi = q(i, k), qj = q(j, k);
          q(i, k) = c * qi - s * qj;
          q(j, k) = s * qi + c * qj;
        }
      }
    }
  }
  std::vector<double> eig(static_cast<size_t>(n), 1.0);
  for (int k = 0; k < n; ++k) {
    eig[static_cast<size_t>(k)] = n == 1 ? 1.0 : std::pow(cond, double(k) / (n - 1));
  }
  chp::DenseMatrix a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += q(k, i) * eig[static_cast<size_t>(k)] * q(k, j);
      a(i, j) = s;
    }
  }
  // Symmetrize away the last rounding bit so MetricMatrix::from accepts it.
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double m = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = a(j, i) = m;
    }
  }
  return a;
}

// Distance from x to the hull of `vertices` in the metric of `a`, by an
// exhaustive simplex grid over all vertex pairs (1D weights) or triples (2D
// weights). Independent of the active-set search; cost grows like 1/step^2.
inline double grid_distance(const chp::Point& x, const std::vector<chp::Point>& vertices,
                            const chp::DenseMatrix& a, double step) {
  const int dim = static_cast<int>(x.size());
  const int nv = static_cast<int>(vertices.size());
  const int steps = static_cast<int>(std::lround(1.0 / step));

  auto dist_a = [&](double dx, double dy) {
    if (dim == 1) return std::sqrt(a(0, 0) * dx * dx);
    return std::sqrt(a(0, 0) * dx * dx + 2.0 * a(0, 1) * dx * dy + a(1, 1) * dy * dy);
  };

  double best = dist_a(x[0] - vertices[0][0], dim == 2 ? x[1] - vertices[0][1] : 0.0);
  for (int i = 0; i < nv; ++i) best = std::min(best, dist_a(x[0] - vertices[static_cast<size_t>(i)][0], dim == 2 ? x[1] - vertices[static_cast<size_t>(i)][1] : 0.0));

  if (dim == 1) {
    for (int i = 0; i < nv; ++i) {
      for (int j = i + 1; j < nv; ++j) {
        const double vi = vertices[static_cast<size_t>(i)][0];
        const double vj = vertices[static_cast<size_t>(j)][0];
        for (int s = 1; s < steps; ++s) {
          const double w = s * step;
          best = std::min(best, dist_a(x[0] - (w * vi + (1.0 - w) * vj), 0.0));
        }
      }
    }
    return best;
  }

  for (int i = 0; i < nv; ++i) {
    for (int j = i + 1; j < nv; ++j) {
      for (int k = j + 1; k < nv; ++k) {
        const double* vi = vertices[static_cast<size_t>(i)].data();
        const double* vj = vertices[static_cast<size_t>(j)].data();
        const double* vk = vertices[static_cast<size_t>(k)].data();
        for (int s1 = 0; s1 <= steps; ++s1) {
          const double w1 = s1 * step;
          const double bx = x[0] - vk[0] - w1 * (vi[0] - vk[0]);
          const double by = x[1] - vk[1] - w1 * (vi[1] - vk[1]);
          const double ex = vj[0] - vk[0];
          const double ey = vj[1] - vk[1];
          for (int s2 = 0; s2 <= steps - s1; ++s2) {
            const double w2 = s2 * step;
            best = std::min(best, dist_a(bx - w2 * ex, by - w2 * ey));
          }
        }
      }
    }
  }
  // Pairs cover the hull boundary when only two points survive dedup.
  if (nv == 2) {
    for (int s = 1; s < steps; ++s) {
      const double w = s * step;
      const double px = w * vertices[0][0] + (1.0 - w) * vertices[1][0];
      const double py = w * vertices[0][1] + (1.0 - w) * vertices[1][1];
      best = std::min(best, dist_a(x[0] - px, x[1] - py));
    }
  }
  return best;
}

}  // namespace testsup
