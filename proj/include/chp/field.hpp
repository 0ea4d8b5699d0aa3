#pragma once

// Piecewise-linear vector fields on a mesh: one R^N value per node, stored
// node-major. CSV dumps carry 17 significant digits so a written field reads
// back bit-exactly, and a rerun rewrites identical bytes.

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "chp/geometry.hpp"
#include "chp/linalg.hpp"
#include "chp/mesh.hpp"

namespace chp {

struct NodalField {
  std::shared_ptr<const Mesh> mesh;
  int components = 0;
  std::vector<double> values;  // values[node * components + c]

  std::span<const double> at(int node) const {
    return {values.data() + static_cast<size_t>(node) * components,
            static_cast<size_t>(components)};
  }
  std::span<double> at(int node) {
    return {values.data() + static_cast<size_t>(node) * components,
            static_cast<size_t>(components)};
  }
};

struct Trajectory {
  std::shared_ptr<const Mesh> mesh;
  std::vector<double> times;
  std::vector<NodalField> states;  // one per time level
};

// Zero field with N components.
NodalField make_field(std::shared_ptr<const Mesh> mesh, int components);

// Field sampled from a callback (coords -> N values); rejects non-finite
// samples.
NodalField sample_field(std::shared_ptr<const Mesh> mesh, int components,
                        const std::function<std::vector<double>(std::array<double, 2>)>& fn);

// Gradient of the field on one element: components x dim, exact for P1.
// Throws "index out of range" on a bad element index.
DenseMatrix element_gradient(const NodalField& u, int element);

// Nodewise metric projection onto K. The parallel version distributes nodes
// across threads; per node the arithmetic is identical, so both variants
// agree bitwise.
NodalField project_field(const NodalField& u, const ConvexPolytope& k, const MetricMatrix& a);
NodalField project_field_serial(const NodalField& u, const ConvexPolytope& k,
                                const MetricMatrix& a);

// CSV with header "x[,y],u_1,...,u_N", one row per node in mesh order.
void write_field_csv(const NodalField& u, const std::string& path);

// Rebuilds the structured mesh from the coordinate columns; accepts exactly
// the layout write_field_csv produces. Parse errors carry "path:line:".
NodalField read_field_csv(const std::string& path);

// One CSV per level ("level_000042.csv") plus an index "times.csv" with
// columns level,time,filename, all in `dir`.
void write_trajectory(const Trajectory& traj, const std::string& dir);
Trajectory read_trajectory(const std::string& times_csv_path);

}  // namespace chp
