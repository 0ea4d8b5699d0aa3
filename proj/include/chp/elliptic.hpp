#pragma once

// Diagonal-type elliptic systems -div(a(x) grad u^alpha) = 0 discretized with
// P1 elements and one-point (barycenter) quadrature. The component coupling
// enters only through the constant-per-element metric A(x) used to weight the
// blocks; with A = I the components decouple completely.

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "chp/field.hpp"
#include "chp/linalg.hpp"
#include "chp/mesh.hpp"

namespace chp {

struct EllipticCoefficients {
  int components = 1;
  // Component metric A(x), components x components, symmetric positive
  // definite. Null means identity.
  std::function<DenseMatrix(std::array<double, 2>)> metric;
  // Scalar diffusion tensor a(x), dim x dim, symmetric with smallest
  // eigenvalue >= lambda. Null means identity.
  std::function<DenseMatrix(std::array<double, 2>)> diffusion;
  double lambda = 1.0;  // uniform ellipticity floor enforced on samples
};

// Dirichlet data: node index -> one value per component. Every boundary node
// of the mesh must be present.
using BoundaryValues = std::map<int, std::vector<double>>;

struct BlockSparseSystem {
  std::shared_ptr<const Mesh> mesh;
  int components = 1;
  Csr stiffness;  // (nodes * components) square, node-major unknowns
};

// Assemble the block stiffness matrix. Coefficients are sampled at element
// barycenters and validated there; a bad sample names the element in the
// error. The parallel and serial versions produce bitwise-equal matrices.
BlockSparseSystem assemble(std::shared_ptr<const Mesh> mesh, const EllipticCoefficients& coeffs);
BlockSparseSystem assemble_serial(std::shared_ptr<const Mesh> mesh,
                                  const EllipticCoefficients& coeffs);

// Solve the homogeneous interior problem with the given Dirichlet trace.
NodalField solve_dirichlet(const BlockSparseSystem& system, const BoundaryValues& bc);

// Scalar convenience wrapper (components = 1, identity metric).
NodalField solve_scalar(std::shared_ptr<const Mesh> mesh,
                        std::function<DenseMatrix(std::array<double, 2>)> diffusion,
                        double lambda, const std::map<int, double>& bc);

}  // namespace chp
