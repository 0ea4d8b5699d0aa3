#include "chp/field.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace chp {

namespace {

void check_mesh(const std::shared_ptr<const Mesh>& mesh) {
  if (!mesh) throw std::invalid_argument("field requires a mesh");
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void parse_fail(const std::string& path, size_t line, const std::string& msg) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + msg);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& tok, const std::string& path, size_t line) {
  const char* s = tok.c_str();
  char* end = nullptr;
  const double v = std::strtod(s, &end);
  if (end == s || *end != '\0') parse_fail(path, line, "not a number: '" + tok + "'");
  return v;
}

}  // namespace

NodalField make_field(std::shared_ptr<const Mesh> mesh, int components) {
  check_mesh(mesh);
  if (components < 1) throw std::invalid_argument("at least one component required");
  NodalField f;
  f.components = components;
  f.values.assign(static_cast<size_t>(mesh->node_count()) * components, 0.0);
  f.mesh = std::move(mesh);
  return f;
}

NodalField sample_field(std::shared_ptr<const Mesh> mesh, int components,
                        const std::function<std::vector<double>(std::array<double, 2>)>& fn) {
  NodalField f = make_field(std::move(mesh), components);
  for (int i = 0; i < f.mesh->node_count(); ++i) {
    const std::vector<double> v = fn(f.mesh->node(i));
    if (static_cast<int>(v.size()) != components)
      throw std::invalid_argument("field sample has wrong component count");
    for (int c = 0; c < components; ++c) {
      if (!std::isfinite(v[c])) throw std::invalid_argument("field sample not finite");
      f.at(i)[c] = v[c];
    }
  }
  return f;
}

DenseMatrix element_gradient(const NodalField& u, int element) {
  check_mesh(u.mesh);
  const Mesh& mesh = *u.mesh;
  if (element < 0 || element >= mesh.element_count())
    throw std::out_of_range("index out of range");
  const int nv = mesh.nodes_per_element();
  const int* nd = mesh.element_nodes(element);
  double grads[6];
  mesh.basis_gradients(element, grads);
  DenseMatrix g(u.components, mesh.dim);
  for (int v = 0; v < nv; ++v) {
    const std::span<const double> uv = u.at(nd[v]);
    for (int c = 0; c < u.components; ++c)
      for (int d = 0; d < mesh.dim; ++d) g(c, d) += uv[c] * grads[v * mesh.dim + d];
  }
  return g;
}

namespace {

NodalField project_field_impl(const NodalField& u, const ConvexPolytope& k,
                              const MetricMatrix& a, bool parallel) {
  check_mesh(u.mesh);
  if (k.ambient_dim != u.components || a.dim() != u.components)
    throw std::invalid_argument("dimension mismatch");
  NodalField out = make_field(u.mesh, u.components);
  const int nn = u.mesh->node_count();
  bool failed = false;

  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < nn; ++i) {
      try {
        Point x(u.at(i).begin(), u.at(i).end());
        const ProjectionResult r = metric_project(x, k, a);
        for (int c = 0; c < u.components; ++c) out.at(i)[c] = r.point[c];
      } catch (...) {
#pragma omp atomic write
        failed = true;
      }
    }
  } else {
    for (int i = 0; i < nn; ++i) {
      Point x(u.at(i).begin(), u.at(i).end());
      const ProjectionResult r = metric_project(x, k, a);
      for (int c = 0; c < u.components; ++c) out.at(i)[c] = r.point[c];
    }
  }
  if (failed) {
    // rerun serially so the throw carries the first offending node
    return project_field_impl(u, k, a, false);
  }
  return out;
}

}  // namespace

NodalField project_field(const NodalField& u, const ConvexPolytope& k, const MetricMatrix& a) {
  return project_field_impl(u, k, a, true);
}

NodalField project_field_serial(const NodalField& u, const ConvexPolytope& k,
                                const MetricMatrix& a) {
  return project_field_impl(u, k, a, false);
}

// ----- CSV ----------------------------------------------------------------

void write_field_csv(const NodalField& u, const std::string& path) {
  check_mesh(u.mesh);
  const Mesh& mesh = *u.mesh;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << (mesh.dim == 1 ? "x" : "x,y");
  for (int c = 1; c <= u.components; ++c) out << ",u_" << c;
  out << "\n";
  for (int i = 0; i < mesh.node_count(); ++i) {
    const auto p = mesh.node(i);
    out << fmt17(p[0]);
    if (mesh.dim == 2) out << "," << fmt17(p[1]);
    for (int c = 0; c < u.components; ++c) out << "," << fmt17(u.at(i)[c]);
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

namespace {

// The dumps come from structured meshes; rebuild one and splice in the exact
// coordinates from the file.
std::shared_ptr<const Mesh> mesh_from_coords(const std::vector<double>& xs,
                                             const std::vector<double>& ys, int dim,
                                             const std::string& path) {
  const int n = static_cast<int>(xs.size());
  if (dim == 1) {
    if (n < 3) parse_fail(path, 2, "too few nodes for an interval mesh");
    for (int i = 1; i < n; ++i)
      if (!(xs[i] > xs[i - 1])) parse_fail(path, 2 + i, "x must increase row by row");
    Mesh m = interval_mesh(xs.front(), xs.back(), n - 1);
    const double span = xs.back() - xs.front();
    for (int i = 0; i < n; ++i)
      if (std::fabs(m.coords[i] - xs[i]) > 1e-9 * span)
        parse_fail(path, 2 + i, "nodes are not equispaced");
    m.coords = xs;
    return std::make_shared<const Mesh>(std::move(m));
  }
  int nx = 1;
  while (nx < n && ys[nx] == ys[0]) ++nx;
  if (nx < 3 || n % nx != 0) parse_fail(path, 2, "rows do not form a structured grid");
  const int ny = n / nx;
  if (ny < 3) parse_fail(path, 2, "rows do not form a structured grid");
  Mesh m = rect_mesh(xs[0], xs[nx - 1], ys[0], ys[static_cast<size_t>(n) - 1], nx - 1, ny - 1);
  const double span_x = xs[nx - 1] - xs[0];
  const double span_y = ys[static_cast<size_t>(n) - 1] - ys[0];
  for (int i = 0; i < n; ++i) {
    if (std::fabs(m.coords[2 * static_cast<size_t>(i)] - xs[i]) > 1e-9 * span_x ||
        std::fabs(m.coords[2 * static_cast<size_t>(i) + 1] - ys[i]) > 1e-9 * span_y)
      parse_fail(path, 2 + i, "rows do not form a structured grid");
    m.coords[2 * static_cast<size_t>(i)] = xs[i];
    m.coords[2 * static_cast<size_t>(i) + 1] = ys[i];
  }
  return std::make_shared<const Mesh>(std::move(m));
}

}  // namespace

NodalField read_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) parse_fail(path, 1, "missing header");
  const std::vector<std::string> head = split_csv(line);
  int dim = 0;
  size_t ncol = head.size();
  if (ncol >= 2 && head[0] == "x" && head[1] == "y")
    dim = 2;
  else if (ncol >= 2 && head[0] == "x")
    dim = 1;
  else
    parse_fail(path, 1, "header must start with x[,y]");
  const int ncomp = static_cast<int>(ncol) - dim;
  if (ncomp < 1) parse_fail(path, 1, "no solution columns");
  for (int c = 0; c < ncomp; ++c)
    if (head[dim + c] != "u_" + std::to_string(c + 1))
      parse_fail(path, 1, "expected column u_" + std::to_string(c + 1));

  std::vector<double> xs, ys, vals;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> tok = split_csv(line);
    if (tok.size() != ncol)
      parse_fail(path, lineno, "expected " + std::to_string(ncol) + " columns");
    xs.push_back(parse_double(tok[0], path, lineno));
    if (dim == 2) ys.push_back(parse_double(tok[1], path, lineno));
    for (int c = 0; c < ncomp; ++c) {
      const double v = parse_double(tok[dim + c], path, lineno);
      if (!std::isfinite(v)) parse_fail(path, lineno, "value not finite");
      vals.push_back(v);
    }
  }
  if (xs.empty()) parse_fail(path, lineno + 1, "no data rows");

  NodalField f;
  f.mesh = mesh_from_coords(xs, ys, dim, path);
  f.components = ncomp;
  f.values = std::move(vals);
  return f;
}

// ----- trajectories -------------------------------------------------------

void write_trajectory(const Trajectory& traj, const std::string& dir) {
  if (traj.states.empty() || traj.states.size() != traj.times.size())
    throw std::invalid_argument("trajectory is empty or inconsistent");
  std::filesystem::create_directories(dir);
  std::ofstream idx(dir + "/times.csv");
  if (!idx) throw std::runtime_error("cannot write " + dir + "/times.csv");
  idx << "level,time,filename\n";
  for (size_t k = 0; k < traj.states.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "level_%06zu.csv", k);
    write_field_csv(traj.states[k], dir + "/" + name);
    idx << k << "," << fmt17(traj.times[k]) << "," << name << "\n";
  }
  if (!idx) throw std::runtime_error("write failed for " + dir + "/times.csv");
}

Trajectory read_trajectory(const std::string& times_csv_path) {
  std::ifstream in(times_csv_path);
  if (!in) throw std::runtime_error("cannot read " + times_csv_path);
  const std::string dir = std::filesystem::path(times_csv_path).parent_path().string();
  std::string line;
  if (!std::getline(in, line)) parse_fail(times_csv_path, 1, "missing header");
  if (split_csv(line) != std::vector<std::string>{"level", "time", "filename"})
    parse_fail(times_csv_path, 1, "expected header level,time,filename");
  Trajectory traj;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> tok = split_csv(line);
    if (tok.size() != 3) parse_fail(times_csv_path, lineno, "expected 3 columns");
    const double lvl = parse_double(tok[0], times_csv_path, lineno);
    if (lvl != static_cast<double>(traj.states.size()))
      parse_fail(times_csv_path, lineno, "levels must count up from 0");
    const double t = parse_double(tok[1], times_csv_path, lineno);
    if (!traj.times.empty() && t <= traj.times.back())
      parse_fail(times_csv_path, lineno, "times must increase");
    traj.times.push_back(t);
    traj.states.push_back(read_field_csv(dir.empty() ? tok[2] : dir + "/" + tok[2]));
  }
  if (traj.states.empty()) parse_fail(times_csv_path, lineno + 1, "no levels");
  traj.mesh = traj.states.front().mesh;
  for (const NodalField& s : traj.states) {
    if (s.components != traj.states.front().components ||
        s.mesh->node_count() != traj.mesh->node_count() ||
        s.mesh->coords != traj.mesh->coords)
      throw std::runtime_error(times_csv_path + ": levels disagree on mesh or components");
  }
  return traj;
}

}  // namespace chp
