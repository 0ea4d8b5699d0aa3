#pragma once

// Checks discrete solutions against the convex hull property: every nodal
// value must lie in the hull spanned by the boundary data (elliptic) or by
// the initial plus lateral boundary data (parabolic), up to a tolerance.
// Produces a machine-readable verdict plus the full violation field, and an
// energy-style distance diagnostic along trajectories.

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "chp/field.hpp"
#include "chp/geometry.hpp"

namespace chp {

// Default tolerance for linear scenarios, where nodal values are convex
// combinations of the data up to solver residual only.
constexpr double kChpTolLinear = 1e-7;

// Nonlinear scenarios accumulate Picard truncation on top; scale with the
// data size.
double chp_tolerance_nonlinear(const NodalField& initial);

struct ChpReport {
  ConvexPolytope hull;
  // Euclidean distance to the hull per level and node; elliptic reports have
  // a single level.
  std::vector<std::vector<double>> violations;
  double max_violation = 0.0;
  int argmax_node = 0;
  int argmax_level = 0;
  double argmax_time = 0.0;  // 0 for elliptic reports
  double tolerance = 0.0;
  bool pass = true;
  // Optional (time, eta) series; filled for trajectory reports.
  std::vector<std::pair<double, double>> eta;
};

// Hull of the Dirichlet data read off the field's own boundary nodes.
ConvexPolytope boundary_hull(const NodalField& u);

// Hull of initial values (all nodes at level 0) and lateral boundary values
// (all levels); include_zero adds the origin, the right notion when a
// reaction term pulls the solution toward zero.
ConvexPolytope boundary_hull(const Trajectory& traj, bool include_zero);

// Distance to the hull at every node. Parallel over nodes; the serial
// variant is the reference the benchmark compares against. Bitwise equal.
std::vector<double> violation_scan(const NodalField& u, const ConvexPolytope& hull);
std::vector<double> violation_scan_serial(const NodalField& u, const ConvexPolytope& hull);

ChpReport verify(const NodalField& u, const ConvexPolytope& hull, double tolerance);
ChpReport verify(const Trajectory& traj, const ConvexPolytope& hull, double tolerance);

// eta(t) = 1/2 sum_i m_i |u_i - P_hull(u_i)|^2 with the lumped masses m_i,
// one value per time level. Identically zero exactly when the hull property
// holds discretely.
std::vector<std::pair<double, double>> eta_series(const Trajectory& traj,
                                                  const ConvexPolytope& hull);

// JSON object with fields hull_vertices, max_violation, argmax_node,
// argmax_time, verdict, tolerance.
std::string report_json(const ChpReport& report);
void write_report_json(const ChpReport& report, const std::string& path);

// CSV "t,eta", 17 significant digits.
void write_eta_csv(const std::vector<std::pair<double, double>>& eta, const std::string& path);

// CSV "u_1,...,u_N", one hull vertex per row.
void write_hull_csv(const ConvexPolytope& hull, const std::string& path);
ConvexPolytope read_hull_csv(const std::string& path);

}  // namespace chp
