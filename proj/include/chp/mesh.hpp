#pragma once

// Structured meshes: equispaced interval partitions and rectangle
// triangulations (each cell split by the diagonal from its lower-left
// corner, both triangles counterclockwise). Node order is the construction
// order everywhere: left to right in 1D, row-major with y outermost in 2D.

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

namespace chp {

struct Mesh {
  int dim = 1;
  double x0 = 0.0, x1 = 0.0;  // extents; y-range unused in 1D
  double y0 = 0.0, y1 = 0.0;
  int cells_x = 0, cells_y = 0;

  std::vector<double> coords;          // dim doubles per node
  std::vector<int> elements;           // (dim+1) node indices per element
  std::vector<int> boundary_nodes;     // ascending
  std::vector<std::uint8_t> on_boundary;

  int nodes_per_element() const { return dim + 1; }
  int node_count() const { return static_cast<int>(coords.size()) / dim; }
  int element_count() const { return static_cast<int>(elements.size()) / nodes_per_element(); }

  const int* element_nodes(int e) const { return elements.data() + static_cast<size_t>(e) * nodes_per_element(); }
  std::array<double, 2> node(int i) const;

  double measure(int e) const;                 // length (1D) or area (2D)
  std::array<double, 2> midpoint(int e) const; // element barycenter, the quadrature point

  // Gradients of the nodal basis functions on element e, one row per local
  // node, dim columns. Constant per element for P1.
  void basis_gradients(int e, double* out) const;
};

// cells >= 2 equispaced cells on (a, b); throws "a < b required" otherwise.
Mesh interval_mesh(double a, double b, int cells);

// Structured triangulation of (x0,x1) x (y0,y1) with cells_x * cells_y
// rectangles, two triangles each.
Mesh rect_mesh(double x0, double x1, double y0, double y1, int cells_x, int cells_y);

// Row-sum (lumped) mass per node; sums to the domain measure.
std::vector<double> lumped_mass(const Mesh& mesh);

}  // namespace chp
