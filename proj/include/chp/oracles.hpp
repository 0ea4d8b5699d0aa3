#pragma once

// Closed-form solutions used as ground truth by the tests and the
// convergence studies.
//
// Scope note: every hull handled by the verifier is one fixed set. A
// projection target that itself moves with x is a different animal (the
// nodewise projection is then no longer distance-decreasing), and nothing
// here models that case.

#include <array>
#include <memory>
#include <vector>

#include "chp/field.hpp"
#include "chp/linalg.hpp"
#include "chp/mesh.hpp"

namespace chp {

// Two-component elliptic system on (0, ell), 0 < ell < 1, whose exact
// solution leaves the hull of its boundary values in the interior even
// though the coupling metric stays uniformly positive definite. The escape
// is what the verifier must flag.
struct EllipticCounterexample {
  double ell = 0.9;

  // (log((1-x)/(1+x)), log(1-x^2)); finite on [0, ell] since ell < 1.
  std::array<double, 2> value(double x) const;

  // Derivative of u^1(x)/u^2(x) on (0, ell); strictly negative there, which
  // is how one sees the two components are nowhere proportional.
  double ratio_derivative(double x) const;

  // Component metric [[1, -x], [-x, 1]], positive definite for |x| < 1.
  DenseMatrix metric(double x) const;
};

// Two decoupled heat equations on (0, pi) with rates a1 != a2 and the same
// initial profile sin(x). Boundary and initial data live on the diagonal
// segment {(s, s)}, the trajectory immediately leaves it.
struct ParabolicCounterexample {
  double a1 = 1.0;
  double a2 = 2.0;

  // (e^{-a1 t} sin x, e^{-a2 t} sin x) for t >= 0, x in [0, pi].
  std::array<double, 2> value(double t, double x) const;

  // Distance diagnostic against the diagonal hull, (pi/8)(e^{-a1 t} - e^{-a2 t})^2.
  double eta_exact(double t) const;
};

// Harmonic polynomials for building 2D fields whose exact solutions are
// known (each is its own Dirichlet solution).
enum class HarmonicPoly { One, X, Y, XxMinusYy, XY };

// Field with one harmonic polynomial per component, sampled at the nodes.
NodalField harmonic_field(std::shared_ptr<const Mesh> mesh,
                          const std::vector<HarmonicPoly>& polys);

}  // namespace chp
