#include "chp/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "chp/linalg.hpp"
#include "chp/mesh.hpp"

namespace chp {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> scan_impl(const NodalField& u, const ConvexPolytope& hull, bool parallel) {
  if (!u.mesh) throw std::invalid_argument("field has no mesh");
  if (hull.ambient_dim != u.components) {
    throw std::invalid_argument("hull dimension does not match the field components");
  }
  const int nn = u.mesh->node_count();
  std::vector<double> dist(static_cast<size_t>(nn), 0.0);

  bool failed = false;
#pragma omp parallel for schedule(static) if (parallel)
  for (int i = 0; i < nn; ++i) {
    try {
      const std::span<const double> v = u.at(i);
      dist[static_cast<size_t>(i)] = violation_distance(Point(v.begin(), v.end()), hull);
    } catch (...) {
#pragma omp atomic write
      failed = true;
    }
  }
  if (failed) {
    for (int i = 0; i < nn; ++i) {
      const std::span<const double> v = u.at(i);
      dist[static_cast<size_t>(i)] = violation_distance(Point(v.begin(), v.end()), hull);
    }
  }
  return dist;
}

void check_trajectory(const Trajectory& traj) {
  if (!traj.mesh || traj.states.empty() || traj.times.size() != traj.states.size()) {
    throw std::invalid_argument("trajectory is empty or inconsistent");
  }
}

}  // namespace

double chp_tolerance_nonlinear(const NodalField& initial) {
  return 1e-6 * (1.0 + norm_inf(initial.values));
}

ConvexPolytope boundary_hull(const NodalField& u) {
  if (!u.mesh) throw std::invalid_argument("field has no mesh");
  std::vector<Point> pts;
  pts.reserve(u.mesh->boundary_nodes.size());
  for (int node : u.mesh->boundary_nodes) {
    const std::span<const double> v = u.at(node);
    pts.emplace_back(v.begin(), v.end());
  }
  return convex_hull(pts);
}

ConvexPolytope boundary_hull(const Trajectory& traj, bool include_zero) {
  check_trajectory(traj);
  const int ncomp = traj.states.front().components;
  std::vector<Point> pts;
  const NodalField& u0 = traj.states.front();
  for (int i = 0; i < traj.mesh->node_count(); ++i) {
    const std::span<const double> v = u0.at(i);
    pts.emplace_back(v.begin(), v.end());
  }
  for (const NodalField& u : traj.states) {
    for (int node : traj.mesh->boundary_nodes) {
      const std::span<const double> v = u.at(node);
      pts.emplace_back(v.begin(), v.end());
    }
  }
  if (include_zero) pts.emplace_back(static_cast<size_t>(ncomp), 0.0);
  return convex_hull(pts);
}

std::vector<double> violation_scan(const NodalField& u, const ConvexPolytope& hull) {
  return scan_impl(u, hull, true);
}

std::vector<double> violation_scan_serial(const NodalField& u, const ConvexPolytope& hull) {
  return scan_impl(u, hull, false);
}

ChpReport verify(const NodalField& u, const ConvexPolytope& hull, double tolerance) {
  ChpReport rep;
  rep.hull = hull;
  rep.tolerance = tolerance;
  rep.violations.push_back(violation_scan(u, hull));
  const std::vector<double>& d = rep.violations.front();
  for (size_t i = 0; i < d.size(); ++i) {
    if (d[i] > rep.max_violation) {
      rep.max_violation = d[i];
      rep.argmax_node = static_cast<int>(i);
    }
  }
  rep.pass = rep.max_violation <= tolerance;
  return rep;
}

ChpReport verify(const Trajectory& traj, const ConvexPolytope& hull, double tolerance) {
  check_trajectory(traj);
  ChpReport rep;
  rep.hull = hull;
  rep.tolerance = tolerance;
  rep.violations.reserve(traj.states.size());
  for (size_t level = 0; level < traj.states.size(); ++level) {
    rep.violations.push_back(violation_scan(traj.states[level], hull));
    const std::vector<double>& d = rep.violations.back();
    for (size_t i = 0; i < d.size(); ++i) {
      if (d[i] > rep.max_violation) {
        rep.max_violation = d[i];
        rep.argmax_node = static_cast<int>(i);
        rep.argmax_level = static_cast<int>(level);
      }
    }
  }
  rep.argmax_time = traj.times[static_cast<size_t>(rep.argmax_level)];
  rep.pass = rep.max_violation <= tolerance;
  rep.eta = eta_series(traj, hull);
  return rep;
}

std::vector<std::pair<double, double>> eta_series(const Trajectory& traj,
                                                  const ConvexPolytope& hull) {
  check_trajectory(traj);
  const std::vector<double> mass = lumped_mass(*traj.mesh);
  std::vector<std::pair<double, double>> eta;
  eta.reserve(traj.times.size());
  for (size_t level = 0; level < traj.states.size(); ++level) {
    const std::vector<double> d = violation_scan(traj.states[level], hull);
    double s = 0.0;  // fixed nodal order, deterministic
    for (size_t i = 0; i < d.size(); ++i) s += 0.5 * mass[i] * d[i] * d[i];
    eta.emplace_back(traj.times[level], s);
  }
  return eta;
}

std::string report_json(const ChpReport& report) {
  nlohmann::ordered_json j;
  j["hull_vertices"] = report.hull.vertices;
  j["max_violation"] = report.max_violation;
  j["argmax_node"] = report.argmax_node;
  j["argmax_time"] = report.argmax_time;
  j["verdict"] = report.pass ? "PASS" : "FAIL";
  j["tolerance"] = report.tolerance;
  return j.dump(2) + "\n";
}

void write_report_json(const ChpReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << report_json(report);
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_eta_csv(const std::vector<std::pair<double, double>>& eta, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "t,eta\n";
  for (const auto& [t, v] : eta) out << fmt17(t) << "," << fmt17(v) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_hull_csv(const ConvexPolytope& hull, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (int c = 0; c < hull.ambient_dim; ++c) out << (c ? ",u_" : "u_") << c + 1;
  out << "\n";
  for (const Point& v : hull.vertices) {
    for (int c = 0; c < hull.ambient_dim; ++c) {
      if (c) out << ",";
      out << fmt17(v[static_cast<size_t>(c)]);
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

ConvexPolytope read_hull_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  auto fail = [&path](int line, const std::string& msg) -> void {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + msg);
  };

  std::string line;
  if (!std::getline(in, line)) fail(1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  int ncomp = 0;
  {
    size_t pos = 0;
    while (pos < line.size()) {
      size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      const std::string tok = line.substr(pos, comma - pos);
      if (tok != "u_" + std::to_string(ncomp + 1)) fail(1, "expected header u_1,...,u_N");
      ++ncomp;
      pos = comma + 1;
    }
    if (ncomp == 0) fail(1, "expected header u_1,...,u_N");
  }

  std::vector<Point> pts;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Point p;
    size_t pos = 0;
    while (pos <= line.size()) {
      size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      const std::string tok = line.substr(pos, comma - pos);
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (tok.empty() || end != tok.c_str() + tok.size() || !std::isfinite(v)) {
        fail(lineno, "bad number '" + tok + "'");
      }
      p.push_back(v);
      if (comma == line.size()) break;
      pos = comma + 1;
    }
    if (static_cast<int>(p.size()) != ncomp) fail(lineno, "wrong number of columns");
    pts.push_back(std::move(p));
  }
  if (pts.empty()) fail(lineno, "no vertices");
  return convex_hull(pts);
}

}  // namespace chp
