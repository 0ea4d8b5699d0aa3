#pragma once

// Config-driven front end: parse a scenario description, build the
// corresponding discrete problem, run it, verify the hull property and dump
// solution, hull, report and diagnostics to an output directory. The file
// format is flat "key = value" lines under [section] headers; docs/config.md
// has the full grammar.

#include <stdexcept>
#include <string>
#include <vector>

namespace chp {

struct ConfigError : std::runtime_error {
  ConfigError(const std::string& path, int line_no, const std::string& msg);
  int line = 0;
};

struct ScenarioConfig {
  std::string path;  // source file, kept for error messages

  // [scenario]
  std::string kind;  // elliptic | parabolic | counterexample-elliptic | counterexample-parabolic
  std::string expect = "pass";
  double tolerance = -1.0;  // < 0: per-kind default
  bool include_zero = false;

  // [mesh]
  bool mesh_1d = false, mesh_2d = false;
  double a = 0.0, b = 1.0;  // 1D extent
  int cells = 0;            // 0: kind default
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  int cells_x = 0, cells_y = 0;

  // [coefficients]
  std::string preset;  // heat | p-laplace | laplace | smooth-spd; empty: kind default
  int components = 0;  // 0: derived from data presets, else 1
  double p = 2.0;
  double epsilon = 1e-10;
  double lambda = -1.0;  // < 0: preset default
  double a1 = 1.0, a2 = 2.0;
  double ell = 0.9;
  double c = 0.0;        // constant reaction
  double b_scale = 0.0;  // drift strength, b = b_scale * sqrt(a0) * unit vector
  std::vector<std::vector<double>> metric;  // constant component metric; empty: identity

  // [time]
  double t_final = 1.0;
  double dt = 1e-3;

  // [data]
  std::string initial = "sine";   // zero | sine | sine-equal | constant:v1,...
  std::string boundary = "zero";  // zero | constant:v1,... | linear | harmonic-pair

  // [output]
  std::string out_dir = "out";

  // [convergence]
  std::string study;  // spatial | temporal
  std::vector<int> cells_list;
  std::vector<double> dt_list;
};

ScenarioConfig load_config(const std::string& path);

struct RunOptions {
  std::string out_dir;      // overrides [output] dir when nonempty
  double tolerance = -1.0;  // overrides [scenario] tolerance when >= 0
  bool include_zero = false;
};

// Build, solve, verify, write outputs. Returns 0 when the verdict matches
// cfg.expect, 1 when it does not. Input problems throw.
int run_scenario(const ScenarioConfig& cfg, const RunOptions& opt);

// Resolution sweep against the scenario's closed-form solution; writes
// convergence.csv (h_or_dt,error,eoc) and prints the table. Returns 0.
int run_convergence(const ScenarioConfig& cfg, const RunOptions& opt);

struct VerifyOptions {
  std::string field_csv;       // exactly one of field_csv
  std::string trajectory_csv;  // ... and trajectory_csv (path to times.csv)
  std::string hull_csv;        // optional; default recomputes from the data
  std::string expect = "pass";
  double tolerance = -1.0;
  bool include_zero = false;
};

// Re-check dumped output. Prints the report JSON; returns 0/1 as above.
int run_verify(const VerifyOptions& opt);

}  // namespace chp
