#pragma once

// Diagonal-type parabolic systems
//   d_t u^alpha - div(a0(t,x,u,Du) d_alpha a(t,x) grad u^alpha)
//     + b . grad u^alpha + c u^alpha = 0
// advanced by implicit Euler with Picard iteration on the frozen
// coefficients. Structure constraints are checked at every quadrature point:
// a0 >= 0, |b| <= C sqrt(a0), c >= 0, and the tensor a stays uniformly
// elliptic. Violations name the offending element.

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "chp/field.hpp"
#include "chp/linalg.hpp"
#include "chp/mesh.hpp"

namespace chp {

struct ParabolicCoefficients {
  // Scalar state factor a0(t, x, u, Du) >= 0. Du is components x dim.
  std::function<double(double, std::array<double, 2>, const std::vector<double>&,
                       const DenseMatrix&)>
      a0;
  // Diffusion tensor a(t, x), dim x dim symmetric, eigenvalues >= lambda.
  // Null means identity.
  std::function<DenseMatrix(double, std::array<double, 2>)> diffusion;
  // Drift b(t, x, u, Du), bounded by growth_constant * sqrt(a0). Null: none.
  std::function<std::array<double, 2>(double, std::array<double, 2>, const std::vector<double>&,
                                      const DenseMatrix&)>
      advection;
  // Reaction c(t, x, u, Du) >= 0. Null: none.
  std::function<double(double, std::array<double, 2>, const std::vector<double>&,
                       const DenseMatrix&)>
      reaction;
  double growth_constant = 0.0;  // C in |b| <= C sqrt(a0)
  double lambda = 1.0;           // ellipticity floor for a(t, x)
  // Positive per-component factors d_alpha. Empty means all ones.
  std::vector<double> component_diffusion;
  // False skips the Picard loop: the first solve is already exact because
  // the coefficients do not read u or Du.
  bool state_dependent = true;
};

struct ParabolicScenario {
  std::shared_ptr<const Mesh> mesh;
  int components = 1;
  ParabolicCoefficients coeffs;
  NodalField initial;
  // Dirichlet trace: (time, boundary node) -> one value per component.
  std::function<std::vector<double>(double, int)> boundary;
  double t_final = 1.0;
  double dt = 1e-2;
};

// One implicit Euler step from t_old to t_old + dt.
NodalField step(const ParabolicScenario& scenario, const NodalField& u_old, double t_old,
                double dt);

// March from t = 0 to t_final. The trajectory stores every level including
// the initial one; a trailing partial step lands exactly on t_final.
Trajectory run(const ParabolicScenario& scenario);

// Heat equation factors: a0 = 1, identity tensor, no drift or reaction.
ParabolicCoefficients heat_coefficients();

// Regularized p-Laplace factor a0 = (|Du|_F^2 + epsilon)^((p-2)/2), p > 1.
ParabolicCoefficients p_laplace_coefficients(double p, double epsilon = 1e-10);

}  // namespace chp
