#include "chp/oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace chp {

namespace {

void check_ell(double ell) {
  if (!(ell > 0.0) || !(ell < 1.0)) {
    throw std::invalid_argument("ell must lie in (0, 1)");
  }
}

}  // namespace

std::array<double, 2> EllipticCounterexample::value(double x) const {
  check_ell(ell);
  if (!(x >= 0.0) || !(x <= ell)) {
    throw std::invalid_argument("x must lie in [0, ell]");
  }
  // log1p keeps full precision near x = 0 where both components vanish.
  const double u1 = std::log1p(-x) - std::log1p(x);
  const double u2 = std::log1p(-x * x);
  return {u1, u2};
}

double EllipticCounterexample::ratio_derivative(double x) const {
  check_ell(ell);
  if (!(x > 0.0) || !(x < ell)) {
    throw std::invalid_argument("x must lie in (0, ell)");
  }
  const double lp = std::log1p(x);    // log(1 + x)
  const double lm = std::log1p(-x);   // log(1 - x)
  const double num = 2.0 * (1.0 + x) * lp + 2.0 * (1.0 - x) * lm;
  const double den = (x * x - 1.0) * (lm + lp) * (lm + lp);
  return num / den;
}

DenseMatrix EllipticCounterexample::metric(double x) const {
  check_ell(ell);
  if (!(std::abs(x) < 1.0)) {
    throw std::invalid_argument("metric requires |x| < 1");
  }
  DenseMatrix a(2, 2);
  a(0, 0) = 1.0;
  a(0, 1) = -x;
  a(1, 0) = -x;
  a(1, 1) = 1.0;
  return a;
}

std::array<double, 2> ParabolicCounterexample::value(double t, double x) const {
  if (!(a1 > 0.0) || !(a2 > 0.0) || a1 == a2) {
    throw std::invalid_argument("rates must be positive and distinct");
  }
  if (!(t >= 0.0)) throw std::invalid_argument("t must be nonnegative");
  if (!(x >= 0.0) || !(x <= std::acos(-1.0))) {
    throw std::invalid_argument("x must lie in [0, pi]");
  }
  const double s = std::sin(x);
  return {std::exp(-a1 * t) * s, std::exp(-a2 * t) * s};
}

double ParabolicCounterexample::eta_exact(double t) const {
  if (!(a1 > 0.0) || !(a2 > 0.0) || a1 == a2) {
    throw std::invalid_argument("rates must be positive and distinct");
  }
  if (!(t >= 0.0)) throw std::invalid_argument("t must be nonnegative");
  const double pi = std::acos(-1.0);
  const double d = std::exp(-a1 * t) - std::exp(-a2 * t);
  return pi / 8.0 * d * d;
}

NodalField harmonic_field(std::shared_ptr<const Mesh> mesh,
                          const std::vector<HarmonicPoly>& polys) {
  if (!mesh) throw std::invalid_argument("mesh is null");
  if (mesh->dim != 2) throw std::invalid_argument("harmonic fields need a 2D mesh");
  if (polys.empty()) throw std::invalid_argument("at least one component required");

  return sample_field(mesh, static_cast<int>(polys.size()),
                      [&polys](std::array<double, 2> p) {
                        const double x = p[0];
                        const double y = p[1];
                        std::vector<double> v;
                        v.reserve(polys.size());
                        for (HarmonicPoly h : polys) {
                          switch (h) {
                            case HarmonicPoly::One: v.push_back(1.0); break;
                            case HarmonicPoly::X: v.push_back(x); break;
                            case HarmonicPoly::Y: v.push_back(y); break;
                            case HarmonicPoly::XxMinusYy: v.push_back(x * x - y * y); break;
                            case HarmonicPoly::XY: v.push_back(2.0 * x * y); break;
                          }
                        }
                        return v;
                      });
}

}  // namespace chp
