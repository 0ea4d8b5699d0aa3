#include "chp/mesh.hpp"

#include <cmath>
#include <stdexcept>

namespace chp {

std::array<double, 2> Mesh::node(int i) const {
  if (dim == 1) return {coords[i], 0.0};
  return {coords[2 * static_cast<size_t>(i)], coords[2 * static_cast<size_t>(i) + 1]};
}

double Mesh::measure(int e) const {
  const int* nd = element_nodes(e);
  if (dim == 1) return coords[nd[1]] - coords[nd[0]];
  const auto a = node(nd[0]), b = node(nd[1]), c = node(nd[2]);
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

std::array<double, 2> Mesh::midpoint(int e) const {
  const int* nd = element_nodes(e);
  const int nv = nodes_per_element();
  std::array<double, 2> m{0.0, 0.0};
  for (int v = 0; v < nv; ++v) {
    const auto p = node(nd[v]);
    m[0] += p[0];
    m[1] += p[1];
  }
  m[0] /= nv;
  m[1] /= nv;
  return m;
}

void Mesh::basis_gradients(int e, double* out) const {
  const int* nd = element_nodes(e);
  if (dim == 1) {
    const double h = coords[nd[1]] - coords[nd[0]];
    out[0] = -1.0 / h;
    out[1] = 1.0 / h;
    return;
  }
  const auto a = node(nd[0]), b = node(nd[1]), c = node(nd[2]);
  const double det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
  out[0] = (b[1] - c[1]) / det;  // grad phi_0
  out[1] = (c[0] - b[0]) / det;
  out[2] = (c[1] - a[1]) / det;  // grad phi_1
  out[3] = (a[0] - c[0]) / det;
  out[4] = (a[1] - b[1]) / det;  // grad phi_2
  out[5] = (b[0] - a[0]) / det;
}

Mesh interval_mesh(double a, double b, int cells) {
  if (!(a < b)) throw std::invalid_argument("a < b required");
  if (cells < 2) throw std::invalid_argument("at least 2 cells required");
  if (!std::isfinite(a) || !std::isfinite(b)) throw std::invalid_argument("a < b required");
  Mesh m;
  m.dim = 1;
  m.x0 = a;
  m.x1 = b;
  m.cells_x = cells;
  const double h = (b - a) / cells;
  m.coords.resize(cells + 1);
  for (int i = 0; i <= cells; ++i) m.coords[i] = a + i * h;
  m.coords.back() = b;
  m.elements.reserve(2 * static_cast<size_t>(cells));
  for (int i = 0; i < cells; ++i) {
    m.elements.push_back(i);
    m.elements.push_back(i + 1);
  }
  m.on_boundary.assign(cells + 1, 0);
  m.on_boundary.front() = 1;
  m.on_boundary.back() = 1;
  m.boundary_nodes = {0, cells};
  return m;
}

Mesh rect_mesh(double x0, double x1, double y0, double y1, int cells_x, int cells_y) {
  if (!(x0 < x1) || !(y0 < y1)) throw std::invalid_argument("positive extents required");
  if (cells_x < 2 || cells_y < 2) throw std::invalid_argument("at least 2 cells per direction required");
  Mesh m;
  m.dim = 2;
  m.x0 = x0;
  m.x1 = x1;
  m.y0 = y0;
  m.y1 = y1;
  m.cells_x = cells_x;
  m.cells_y = cells_y;
  const int nx = cells_x + 1, ny = cells_y + 1;
  const double hx = (x1 - x0) / cells_x, hy = (y1 - y0) / cells_y;
  m.coords.resize(2 * static_cast<size_t>(nx) * ny);
  for (int iy = 0; iy < ny; ++iy) {
    const double y = (iy == cells_y) ? y1 : y0 + iy * hy;
    for (int ix = 0; ix < nx; ++ix) {
      const int i = iy * nx + ix;
      m.coords[2 * static_cast<size_t>(i)] = (ix == cells_x) ? x1 : x0 + ix * hx;
      m.coords[2 * static_cast<size_t>(i) + 1] = y;
    }
  }
  m.elements.reserve(6 * static_cast<size_t>(cells_x) * cells_y);
  for (int iy = 0; iy < cells_y; ++iy) {
    for (int ix = 0; ix < cells_x; ++ix) {
      const int ll = iy * nx + ix;
      const int lr = ll + 1;
      const int ul = ll + nx;
      const int ur = ul + 1;
      // diagonal from the lower-left corner; both triangles counterclockwise
      m.elements.insert(m.elements.end(), {ll, lr, ur});
      m.elements.insert(m.elements.end(), {ll, ur, ul});
    }
  }
  m.on_boundary.assign(static_cast<size_t>(nx) * ny, 0);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix)
      if (ix == 0 || ix == cells_x || iy == 0 || iy == cells_y)
        m.on_boundary[static_cast<size_t>(iy) * nx + ix] = 1;
  for (int i = 0; i < m.node_count(); ++i)
    if (m.on_boundary[i]) m.boundary_nodes.push_back(i);
  return m;
}

std::vector<double> lumped_mass(const Mesh& mesh) {
  std::vector<double> mass(mesh.node_count(), 0.0);
  const int nv = mesh.nodes_per_element();
  for (int e = 0; e < mesh.element_count(); ++e) {
    const double share = mesh.measure(e) / nv;
    const int* nd = mesh.element_nodes(e);
    for (int v = 0; v < nv; ++v) mass[nd[v]] += share;
  }
  return mass;
}

}  // namespace chp
