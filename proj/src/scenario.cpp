#include "chp/scenario.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <set>

#include "chp/elliptic.hpp"
#include "chp/field.hpp"
#include "chp/geometry.hpp"
#include "chp/linalg.hpp"
#include "chp/mesh.hpp"
#include "chp/oracles.hpp"
#include "chp/parabolic.hpp"
#include "chp/verifier.hpp"

namespace chp {

namespace {

const double kPi = std::acos(-1.0);

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool to_double(const std::string& tok, double& out) {
  if (tok.empty()) return false;
  char* end = nullptr;
  out = std::strtod(tok.c_str(), &end);
  return end == tok.c_str() + tok.size() && std::isfinite(out);
}

bool to_int(const std::string& tok, int& out) {
  if (tok.empty()) return false;
  char* end = nullptr;
  const long v = std::strtol(tok.c_str(), &end, 10);
  if (end != tok.c_str() + tok.size()) return false;
  out = static_cast<int>(v);
  return static_cast<long>(out) == v;
}

bool to_bool(const std::string& tok, bool& out) {
  if (tok == "true" || tok == "yes" || tok == "1") {
    out = true;
    return true;
  }
  if (tok == "false" || tok == "no" || tok == "0") {
    out = false;
    return true;
  }
  return false;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (pos <= s.size()) {
    size_t next = s.find(sep, pos);
    if (next == std::string::npos) next = s.size();
    out.push_back(trim(s.substr(pos, next - pos)));
    if (next == s.size()) break;
    pos = next + 1;
  }
  return out;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// --- config ---------------------------------------------------------------

struct KeyContext {
  const std::string& path;
  int line;
  const std::string& key;  // "section.key" for messages
};

[[noreturn]] void bad_value(const KeyContext& kc, const std::string& val) {
  throw ConfigError(kc.path, kc.line, "bad value '" + val + "' for " + kc.key);
}

double get_double(const KeyContext& kc, const std::string& val) {
  double v = 0.0;
  if (!to_double(val, v)) bad_value(kc, val);
  return v;
}

int get_int(const KeyContext& kc, const std::string& val) {
  int v = 0;
  if (!to_int(val, v)) bad_value(kc, val);
  return v;
}

bool get_bool(const KeyContext& kc, const std::string& val) {
  bool v = false;
  if (!to_bool(val, v)) bad_value(kc, val);
  return v;
}

std::vector<int> get_int_list(const KeyContext& kc, const std::string& val) {
  std::vector<int> out;
  for (const std::string& tok : split(val, ',')) {
    int v = 0;
    if (!to_int(tok, v)) bad_value(kc, val);
    out.push_back(v);
  }
  return out;
}

std::vector<double> get_double_list(const KeyContext& kc, const std::string& val) {
  std::vector<double> out;
  for (const std::string& tok : split(val, ',')) {
    double v = 0.0;
    if (!to_double(tok, v)) bad_value(kc, val);
    out.push_back(v);
  }
  return out;
}

std::vector<std::vector<double>> get_matrix(const KeyContext& kc, const std::string& val) {
  std::vector<std::vector<double>> rows;
  for (const std::string& row : split(val, ';')) rows.push_back(get_double_list(kc, row));
  return rows;
}

// Name plus optional ":v1,v2,..." argument list, for the data presets.
struct Preset {
  std::string name;
  std::vector<double> args;
};

Preset parse_preset(const std::string& s) {
  Preset p;
  const size_t colon = s.find(':');
  p.name = trim(s.substr(0, colon));
  if (colon != std::string::npos) {
    for (const std::string& tok : split(s.substr(colon + 1), ',')) {
      double v = 0.0;
      if (!to_double(tok, v)) {
        throw std::runtime_error("bad preset argument '" + tok + "' in '" + s + "'");
      }
      p.args.push_back(v);
    }
  }
  return p;
}

// --- scenario building ------------------------------------------------------

std::shared_ptr<const Mesh> build_mesh(const ScenarioConfig& cfg) {
  if (cfg.kind == "counterexample-elliptic") {
    return std::make_shared<const Mesh>(interval_mesh(0.0, cfg.ell, cfg.cells > 0 ? cfg.cells : 256));
  }
  if (cfg.kind == "counterexample-parabolic") {
    return std::make_shared<const Mesh>(interval_mesh(0.0, kPi, cfg.cells > 0 ? cfg.cells : 256));
  }
  if (cfg.mesh_2d) {
    return std::make_shared<const Mesh>(rect_mesh(cfg.x0, cfg.x1, cfg.y0, cfg.y1,
                                                  cfg.cells_x > 0 ? cfg.cells_x : 16,
                                                  cfg.cells_y > 0 ? cfg.cells_y : 16));
  }
  return std::make_shared<const Mesh>(interval_mesh(cfg.a, cfg.b, cfg.cells > 0 ? cfg.cells : 128));
}

int resolve_components(const ScenarioConfig& cfg) {
  if (cfg.kind == "counterexample-elliptic" || cfg.kind == "counterexample-parabolic") {
    if (cfg.components > 0 && cfg.components != 2) {
      throw std::runtime_error("counterexample scenarios have two components");
    }
    return 2;
  }
  if (cfg.components > 0) return cfg.components;
  const Preset init = parse_preset(cfg.initial);
  if (init.name == "constant" && !init.args.empty()) return static_cast<int>(init.args.size());
  const Preset bc = parse_preset(cfg.boundary);
  if (bc.name == "constant" && !bc.args.empty()) return static_cast<int>(bc.args.size());
  if (bc.name == "harmonic-pair") return 2;
  return 1;
}

// Product sine bump vanishing on the boundary, the workhorse initial datum.
double sine_bump(const Mesh& mesh, std::array<double, 2> p) {
  double v = std::sin(kPi * (p[0] - mesh.x0) / (mesh.x1 - mesh.x0));
  if (mesh.dim == 2) v *= std::sin(kPi * (p[1] - mesh.y0) / (mesh.y1 - mesh.y0));
  return v;
}

NodalField build_initial(const ScenarioConfig& cfg, std::shared_ptr<const Mesh> mesh, int ncomp) {
  const Preset p = parse_preset(cfg.initial);
  if (p.name == "zero") return make_field(mesh, ncomp);
  if (p.name == "sine" || p.name == "sine-equal") {
    const bool equal = p.name == "sine-equal";
    const Mesh& m = *mesh;
    return sample_field(mesh, ncomp, [&m, ncomp, equal](std::array<double, 2> x) {
      const double base = sine_bump(m, x);
      std::vector<double> v(static_cast<size_t>(ncomp));
      for (int k = 0; k < ncomp; ++k) v[static_cast<size_t>(k)] = equal ? base : base / (1.0 + k);
      return v;
    });
  }
  if (p.name == "constant") {
    if (static_cast<int>(p.args.size()) != ncomp) {
      throw std::runtime_error("initial preset 'constant' needs one value per component");
    }
    NodalField u = make_field(mesh, ncomp);
    for (int i = 0; i < mesh->node_count(); ++i) {
      for (int k = 0; k < ncomp; ++k) u.values[static_cast<size_t>(i * ncomp + k)] = p.args[static_cast<size_t>(k)];
    }
    return u;
  }
  throw std::runtime_error("unknown initial preset '" + p.name + "'");
}

std::function<std::vector<double>(double, int)> build_parabolic_boundary(const ScenarioConfig& cfg,
                                                                         int ncomp) {
  const Preset p = parse_preset(cfg.boundary);
  if (p.name == "zero") {
    return [ncomp](double, int) { return std::vector<double>(static_cast<size_t>(ncomp), 0.0); };
  }
  if (p.name == "constant") {
    if (static_cast<int>(p.args.size()) != ncomp) {
      throw std::runtime_error("boundary preset 'constant' needs one value per component");
    }
    std::vector<double> vals = p.args;
    return [vals](double, int) { return vals; };
  }
  throw std::runtime_error("unknown boundary preset '" + p.name + "' for a parabolic run");
}

BoundaryValues build_elliptic_boundary(const ScenarioConfig& cfg, const Mesh& mesh, int ncomp) {
  const Preset p = parse_preset(cfg.boundary);
  std::function<std::vector<double>(std::array<double, 2>)> fn;
  if (p.name == "zero") {
    fn = [ncomp](std::array<double, 2>) {
      return std::vector<double>(static_cast<size_t>(ncomp), 0.0);
    };
  } else if (p.name == "constant") {
    if (static_cast<int>(p.args.size()) != ncomp) {
      throw std::runtime_error("boundary preset 'constant' needs one value per component");
    }
    std::vector<double> vals = p.args;
    fn = [vals](std::array<double, 2>) { return vals; };
  } else if (p.name == "linear") {
    const int dim = mesh.dim;
    fn = [ncomp, dim](std::array<double, 2> x) {
      std::vector<double> v(static_cast<size_t>(ncomp));
      for (int k = 0; k < ncomp; ++k) {
        v[static_cast<size_t>(k)] = x[0] + (dim == 2 ? 0.5 * x[1] : 0.0) - 0.25 * k;
      }
      return v;
    };
  } else if (p.name == "harmonic-pair") {
    if (mesh.dim != 2 || ncomp != 2) {
      throw std::runtime_error("boundary preset 'harmonic-pair' needs a 2D mesh and two components");
    }
    fn = [](std::array<double, 2> x) {
      return std::vector<double>{x[0] * x[0] - x[1] * x[1], 2.0 * x[0] * x[1]};
    };
  } else {
    throw std::runtime_error("unknown boundary preset '" + p.name + "' for an elliptic run");
  }

  BoundaryValues bc;
  for (int node : mesh.boundary_nodes) bc[node] = fn(mesh.node(node));
  return bc;
}

DenseMatrix matrix_from_rows(const std::vector<std::vector<double>>& rows, int ncomp) {
  DenseMatrix m(ncomp, ncomp);
  if (static_cast<int>(rows.size()) != ncomp) {
    throw std::runtime_error("metric must be square and match the component count");
  }
  for (int i = 0; i < ncomp; ++i) {
    if (static_cast<int>(rows[static_cast<size_t>(i)].size()) != ncomp) {
      throw std::runtime_error("metric must be square and match the component count");
    }
    for (int j = 0; j < ncomp; ++j) m(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
  }
  return m;
}

// Smooth uniformly elliptic tensor families for the generic scenarios; the
// floors below their preset lambda values hold by construction.
DenseMatrix smooth_spd_1d(std::array<double, 2> x) {
  DenseMatrix a(1, 1);
  a(0, 0) = 1.0 + 0.45 * std::sin(2.3 * x[0] + 0.7);  // stays in [0.55, 1.45]
  return a;
}

DenseMatrix smooth_spd_2d(std::array<double, 2> x) {
  const double mu1 = 1.2 + 0.5 * std::sin(2.1 * x[0]) * std::sin(1.9 * x[1]);  // [0.7, 1.7]
  const double mu2 = 0.8 + 0.3 * std::cos(1.5 * x[0] + 0.5 * x[1]);            // [0.5, 1.1]
  const double th = 1.1 * std::sin(1.7 * x[0] + 0.3) * std::cos(1.3 * x[1] - 0.4);
  const double cs = std::cos(th), sn = std::sin(th);
  DenseMatrix a(2, 2);
  a(0, 0) = cs * cs * mu1 + sn * sn * mu2;
  a(0, 1) = cs * sn * (mu1 - mu2);
  a(1, 0) = a(0, 1);
  a(1, 1) = sn * sn * mu1 + cs * cs * mu2;
  return a;
}

EllipticCoefficients build_elliptic_coefficients(const ScenarioConfig& cfg, const Mesh& mesh,
                                                 int ncomp) {
  EllipticCoefficients coeffs;
  coeffs.components = ncomp;
  const std::string preset = cfg.preset.empty() ? "laplace" : cfg.preset;
  if (preset == "laplace") {
    coeffs.lambda = cfg.lambda >= 0.0 ? cfg.lambda : 1.0;
  } else if (preset == "smooth-spd") {
    if (mesh.dim == 1) {
      coeffs.diffusion = smooth_spd_1d;
      coeffs.lambda = cfg.lambda >= 0.0 ? cfg.lambda : 0.5;
    } else {
      coeffs.diffusion = smooth_spd_2d;
      coeffs.lambda = cfg.lambda >= 0.0 ? cfg.lambda : 0.45;
    }
  } else {
    throw std::runtime_error("unknown elliptic preset '" + preset + "'");
  }
  if (!cfg.metric.empty()) {
    const DenseMatrix m = matrix_from_rows(cfg.metric, ncomp);
    coeffs.metric = [m](std::array<double, 2>) { return m; };
  }
  return coeffs;
}

ParabolicCoefficients build_parabolic_coefficients(const ScenarioConfig& cfg, const Mesh& mesh) {
  const std::string preset = cfg.preset.empty() ? "heat" : cfg.preset;
  ParabolicCoefficients coeffs;
  if (preset == "heat") {
    coeffs = heat_coefficients();
  } else if (preset == "p-laplace") {
    coeffs = p_laplace_coefficients(cfg.p, cfg.epsilon);
  } else {
    throw std::runtime_error("unknown parabolic preset '" + preset + "'");
  }
  if (!cfg.metric.empty()) {
    throw std::runtime_error("metric applies to elliptic scenarios only");
  }
  if (cfg.b_scale < 0.0) throw std::runtime_error("b_scale must be nonnegative");
  if (cfg.c < 0.0) throw std::runtime_error("c must be nonnegative");
  if (cfg.b_scale > 0.0) {
    const auto base_a0 = coeffs.a0;
    const double bs = cfg.b_scale;
    const int dim = mesh.dim;
    coeffs.advection = [base_a0, bs, dim](double t, std::array<double, 2> x,
                                          const std::vector<double>& u, const DenseMatrix& g) {
      const double a0 = std::max(0.0, base_a0(t, x, u, g));
      const double s = bs * std::sqrt(a0);
      if (dim == 1) return std::array<double, 2>{s, 0.0};
      const double r = s / std::sqrt(2.0);
      return std::array<double, 2>{r, r};
    };
    coeffs.growth_constant = bs;
  }
  if (cfg.c > 0.0) {
    const double cv = cfg.c;
    coeffs.reaction = [cv](double, std::array<double, 2>, const std::vector<double>&,
                           const DenseMatrix&) { return cv; };
  }
  return coeffs;
}

void write_elliptic_outputs(const NodalField& u, const ChpReport& rep, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_field_csv(u, dir + "/solution.csv");
  write_hull_csv(rep.hull, dir + "/hull.csv");
  write_report_json(rep, dir + "/report.json");
}

void write_parabolic_outputs(const Trajectory& traj, const ChpReport& rep,
                             const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_trajectory(traj, dir + "/trajectory");
  write_hull_csv(rep.hull, dir + "/hull.csv");
  write_report_json(rep, dir + "/report.json");
  write_eta_csv(rep.eta, dir + "/eta.csv");
}

int finish(const ChpReport& rep, const std::string& expect) {
  std::cout << report_json(rep);
  const bool expected_pass = expect == "pass";
  return rep.pass == expected_pass ? 0 : 1;
}

// Exact counterexample Dirichlet data on the interval (0, ell).
BoundaryValues counterexample_bc(const EllipticCounterexample& ex, const Mesh& mesh) {
  BoundaryValues bc;
  for (int node : mesh.boundary_nodes) {
    const std::array<double, 2> v = ex.value(mesh.node(node)[0]);
    bc[node] = {v[0], v[1]};
  }
  return bc;
}

NodalField solve_counterexample_elliptic(const ScenarioConfig& cfg,
                                         std::shared_ptr<const Mesh> mesh) {
  EllipticCounterexample ex;
  ex.ell = cfg.ell;
  EllipticCoefficients coeffs;
  coeffs.components = 2;
  coeffs.metric = [ex](std::array<double, 2> x) { return ex.metric(x[0]); };
  const BlockSparseSystem sys = assemble(mesh, coeffs);
  return solve_dirichlet(sys, counterexample_bc(ex, *mesh));
}

ParabolicScenario counterexample_parabolic_scenario(const ScenarioConfig& cfg,
                                                    std::shared_ptr<const Mesh> mesh) {
  if (!(cfg.a1 > 0.0) || !(cfg.a2 > 0.0) || cfg.a1 == cfg.a2) {
    throw std::runtime_error("rates a1, a2 must be positive and distinct");
  }
  ParabolicScenario sc;
  sc.mesh = mesh;
  sc.components = 2;
  sc.coeffs = heat_coefficients();
  sc.coeffs.component_diffusion = {cfg.a1, cfg.a2};
  sc.initial = sample_field(mesh, 2, [](std::array<double, 2> x) {
    const double s = std::sin(x[0]);
    return std::vector<double>{s, s};
  });
  sc.boundary = [](double, int) { return std::vector<double>{0.0, 0.0}; };
  sc.t_final = cfg.t_final;
  sc.dt = cfg.dt;
  return sc;
}

double resolve_tolerance(const ScenarioConfig& cfg, const RunOptions& opt,
                         double fallback) {
  if (opt.tolerance >= 0.0) return opt.tolerance;
  if (cfg.tolerance >= 0.0) return cfg.tolerance;
  return fallback;
}

// Max nodal error of a final state against a closed-form value(t, x).
double max_nodal_error(const NodalField& u, double t,
                       const std::function<std::array<double, 2>(double, double)>& exact) {
  double err = 0.0;
  for (int i = 0; i < u.mesh->node_count(); ++i) {
    const std::array<double, 2> v = exact(t, u.mesh->node(i)[0]);
    const std::span<const double> w = u.at(i);
    for (int c = 0; c < u.components; ++c) {
      err = std::max(err, std::abs(w[static_cast<size_t>(c)] - v[static_cast<size_t>(c)]));
    }
  }
  return err;
}

}  // namespace

ConfigError::ConfigError(const std::string& path, int line_no, const std::string& msg)
    : std::runtime_error(path + ":" + std::to_string(line_no) + ": " + msg), line(line_no) {}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  static const std::set<std::string> kSections = {"scenario", "mesh",   "coefficients",
                                                  "time",     "data",   "output",
                                                  "convergence"};
  ScenarioConfig cfg;
  cfg.path = path;
  std::string section;
  std::string line;
  int no = 0;

  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(path, no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!kSections.count(section)) {
        throw ConfigError(path, no, "unknown section '" + section + "'");
      }
      continue;
    }

    const size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(path, no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(path, no, "empty key");
    if (val.empty()) throw ConfigError(path, no, "empty value for " + key);
    if (section.empty()) throw ConfigError(path, no, "key outside any section");

    const std::string full = section + "." + key;
    const KeyContext kc{path, no, full};

    if (section == "scenario") {
      if (key == "kind") {
        if (val != "elliptic" && val != "parabolic" && val != "counterexample-elliptic" &&
            val != "counterexample-parabolic") {
          bad_value(kc, val);
        }
        cfg.kind = val;
      } else if (key == "expect") {
        if (val != "pass" && val != "fail") bad_value(kc, val);
        cfg.expect = val;
      } else if (key == "tolerance") {
        cfg.tolerance = get_double(kc, val);
        if (cfg.tolerance < 0.0) bad_value(kc, val);
      } else if (key == "include_zero") {
        cfg.include_zero = get_bool(kc, val);
      } else {
        throw ConfigError(path, no, "unknown key '" + full + "'");
      }
    } else if (section == "mesh") {
      if (key == "a" || key == "b" || key == "cells") {
        if (cfg.mesh_2d) throw ConfigError(path, no, "mixing 1D and 2D mesh keys");
        cfg.mesh_1d = true;
        if (key == "a") cfg.a = get_double(kc, val);
        else if (key == "b") cfg.b = get_double(kc, val);
        else cfg.cells = get_int(kc, val);
      } else if (key == "x0" || key == "x1" || key == "y0" || key == "y1" ||
                 key == "cells_x" || key == "cells_y") {
        if (cfg.mesh_1d) throw ConfigError(path, no, "mixing 1D and 2D mesh keys");
        cfg.mesh_2d = true;
        if (key == "x0") cfg.x0 = get_double(kc, val);
        else if (key == "x1") cfg.x1 = get_double(kc, val);
        else if (key == "y0") cfg.y0 = get_double(kc, val);
        else if (key == "y1") cfg.y1 = get_double(kc, val);
        else if (key == "cells_x") cfg.cells_x = get_int(kc, val);
        else cfg.cells_y = get_int(kc, val);
      } else {
        throw ConfigError(path, no, "unknown key '" + full + "'");
      }
    } else if (section == "coefficients") {
      if (key == "preset") cfg.preset = val;
      else if (key == "components") cfg.components = get_int(kc, val);
      else if (key == "p") cfg.p = get_double(kc, val);
      else if (key == "epsilon") cfg.epsilon = get_double(kc, val);
      else if (key == "lambda") cfg.lambda = get_double(kc, val);
      else if (key == "a1") cfg.a1 = get_double(kc, val);
      else if (key == "a2") cfg.a2 = get_double(kc, val);
      else if (key == "ell") cfg.ell = get_double(kc, val);
      else if (key == "c") cfg.c = get_double(kc, val);
      else if (key == "b_scale") cfg.b_scale = get_double(kc, val);
      else if (key == "metric") cfg.metric = get_matrix(kc, val);
      else throw ConfigError(path, no, "unknown key '" + full + "'");
    } else if (section == "time") {
      if (key == "t_final") cfg.t_final = get_double(kc, val);
      else if (key == "dt") cfg.dt = get_double(kc, val);
      else throw ConfigError(path, no, "unknown key '" + full + "'");
    } else if (section == "data") {
      if (key == "initial") cfg.initial = val;
      else if (key == "boundary") cfg.boundary = val;
      else throw ConfigError(path, no, "unknown key '" + full + "'");
    } else if (section == "output") {
      if (key == "dir") cfg.out_dir = val;
      else throw ConfigError(path, no, "unknown key '" + full + "'");
    } else {  // convergence
      if (key == "study") {
        if (val != "spatial" && val != "temporal") bad_value(kc, val);
        cfg.study = val;
      } else if (key == "cells") {
        cfg.cells_list = get_int_list(kc, val);
      } else if (key == "dts") {
        cfg.dt_list = get_double_list(kc, val);
      } else {
        throw ConfigError(path, no, "unknown key '" + full + "'");
      }
    }
  }
  if (cfg.kind.empty()) throw ConfigError(path, std::max(no, 1), "scenario.kind is required");
  return cfg;
}

int run_scenario(const ScenarioConfig& cfg, const RunOptions& opt) {
  const std::string out_dir = opt.out_dir.empty() ? cfg.out_dir : opt.out_dir;
  const std::shared_ptr<const Mesh> mesh = build_mesh(cfg);

  if (cfg.kind == "counterexample-elliptic") {
    const NodalField u = solve_counterexample_elliptic(cfg, mesh);
    const double tol = resolve_tolerance(cfg, opt, kChpTolLinear);
    const ChpReport rep = verify(u, boundary_hull(u), tol);
    write_elliptic_outputs(u, rep, out_dir);
    return finish(rep, cfg.expect);
  }

  if (cfg.kind == "counterexample-parabolic") {
    const ParabolicScenario sc = counterexample_parabolic_scenario(cfg, mesh);
    const Trajectory traj = run(sc);
    const bool zero = cfg.include_zero || opt.include_zero;
    const double tol = resolve_tolerance(cfg, opt, kChpTolLinear);
    const ChpReport rep = verify(traj, boundary_hull(traj, zero), tol);
    write_parabolic_outputs(traj, rep, out_dir);
    return finish(rep, cfg.expect);
  }

  if (cfg.kind == "elliptic") {
    const int ncomp = resolve_components(cfg);
    const EllipticCoefficients coeffs = build_elliptic_coefficients(cfg, *mesh, ncomp);
    const BlockSparseSystem sys = assemble(mesh, coeffs);
    const NodalField u = solve_dirichlet(sys, build_elliptic_boundary(cfg, *mesh, ncomp));
    const double tol = resolve_tolerance(cfg, opt, kChpTolLinear);
    const ChpReport rep = verify(u, boundary_hull(u), tol);
    write_elliptic_outputs(u, rep, out_dir);
    return finish(rep, cfg.expect);
  }

  if (cfg.kind == "parabolic") {
    const int ncomp = resolve_components(cfg);
    ParabolicScenario sc;
    sc.mesh = mesh;
    sc.components = ncomp;
    sc.coeffs = build_parabolic_coefficients(cfg, *mesh);
    sc.initial = build_initial(cfg, mesh, ncomp);
    sc.boundary = build_parabolic_boundary(cfg, ncomp);
    sc.t_final = cfg.t_final;
    sc.dt = cfg.dt;
    const Trajectory traj = run(sc);
    const bool zero = cfg.include_zero || opt.include_zero || cfg.c > 0.0;
    const double fallback =
        sc.coeffs.state_dependent ? chp_tolerance_nonlinear(sc.initial) : kChpTolLinear;
    const double tol = resolve_tolerance(cfg, opt, fallback);
    const ChpReport rep = verify(traj, boundary_hull(traj, zero), tol);
    write_parabolic_outputs(traj, rep, out_dir);
    return finish(rep, cfg.expect);
  }

  throw std::runtime_error("unknown scenario kind '" + cfg.kind + "'");
}

int run_convergence(const ScenarioConfig& cfg, const RunOptions& opt) {
  const std::string out_dir = opt.out_dir.empty() ? cfg.out_dir : opt.out_dir;

  std::vector<double> res;   // h or dt per row
  std::vector<double> errs;  // max nodal error per row

  std::string study = cfg.study;
  if (study.empty()) study = cfg.kind == "counterexample-elliptic" ? "spatial" : "temporal";

  if (cfg.kind == "counterexample-elliptic") {
    if (study != "spatial") {
      throw std::runtime_error("counterexample-elliptic supports spatial studies only");
    }
    if (cfg.cells_list.size() < 2) {
      throw std::runtime_error("convergence.cells needs at least two resolutions");
    }
    EllipticCounterexample ex;
    ex.ell = cfg.ell;
    for (int cells : cfg.cells_list) {
      ScenarioConfig one = cfg;
      one.cells = cells;
      const std::shared_ptr<const Mesh> mesh = build_mesh(one);
      const NodalField u = solve_counterexample_elliptic(one, mesh);
      res.push_back(ex.ell / cells);
      errs.push_back(max_nodal_error(
          u, 0.0, [&ex](double, double x) { return ex.value(x); }));
    }
  } else if (cfg.kind == "counterexample-parabolic") {
    if (study != "temporal") {
      throw std::runtime_error("counterexample-parabolic supports temporal studies only");
    }
    if (cfg.dt_list.size() < 2) {
      throw std::runtime_error("convergence.dts needs at least two resolutions");
    }
    ParabolicCounterexample ex;
    ex.a1 = cfg.a1;
    ex.a2 = cfg.a2;
    const std::shared_ptr<const Mesh> mesh = build_mesh(cfg);
    for (double dt : cfg.dt_list) {
      if (!(dt > 0.0)) throw std::runtime_error("convergence.dts must be positive");
      ScenarioConfig one = cfg;
      one.dt = dt;
      const Trajectory traj = run(counterexample_parabolic_scenario(one, mesh));
      res.push_back(dt);
      errs.push_back(max_nodal_error(
          traj.states.back(), traj.times.back(),
          [&ex](double t, double x) { return ex.value(t, x); }));
    }
  } else if (cfg.kind == "parabolic") {
    if (study != "temporal") {
      throw std::runtime_error("parabolic scenarios support temporal studies only");
    }
    const std::string preset = cfg.preset.empty() ? "heat" : cfg.preset;
    const Preset init = parse_preset(cfg.initial);
    if (preset != "heat" || (init.name != "sine" && init.name != "sine-equal") ||
        parse_preset(cfg.boundary).name != "zero" || cfg.b_scale != 0.0 || cfg.c != 0.0 ||
        cfg.mesh_2d) {
      throw std::runtime_error(
          "temporal studies need the 1D heat preset with sine data and zero boundary");
    }
    if (cfg.dt_list.size() < 2) {
      throw std::runtime_error("convergence.dts needs at least two resolutions");
    }
    const int ncomp = resolve_components(cfg);
    const std::shared_ptr<const Mesh> mesh = build_mesh(cfg);
    const double length = mesh->x1 - mesh->x0;
    const double rate = kPi * kPi / (length * length);
    const bool equal = init.name == "sine-equal";
    for (double dt : cfg.dt_list) {
      if (!(dt > 0.0)) throw std::runtime_error("convergence.dts must be positive");
      ScenarioConfig one = cfg;
      one.dt = dt;
      ParabolicScenario sc;
      sc.mesh = mesh;
      sc.components = ncomp;
      sc.coeffs = build_parabolic_coefficients(one, *mesh);
      sc.initial = build_initial(one, mesh, ncomp);
      sc.boundary = build_parabolic_boundary(one, ncomp);
      sc.t_final = one.t_final;
      sc.dt = dt;
      const Trajectory traj = run(sc);
      const NodalField& uT = traj.states.back();
      const double t = traj.times.back();
      double err = 0.0;
      for (int i = 0; i < mesh->node_count(); ++i) {
        const double base = sine_bump(*mesh, mesh->node(i));
        const std::span<const double> w = uT.at(i);
        for (int k = 0; k < ncomp; ++k) {
          const double amp = equal ? 1.0 : 1.0 / (1.0 + k);
          err = std::max(err, std::abs(w[static_cast<size_t>(k)] -
                                       amp * std::exp(-rate * t) * base));
        }
      }
      res.push_back(dt);
      errs.push_back(err);
    }
  } else {
    throw std::runtime_error("no closed-form solution for kind '" + cfg.kind + "'");
  }

  std::filesystem::create_directories(out_dir);
  const std::string csv_path = out_dir + "/convergence.csv";
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + csv_path + " for writing");
  out << "h_or_dt,error,eoc\n";
  std::printf("%14s %14s %8s\n", "h_or_dt", "error", "eoc");
  for (size_t i = 0; i < res.size(); ++i) {
    out << fmt17(res[i]) << "," << fmt17(errs[i]) << ",";
    if (i == 0) {
      out << "\n";
      std::printf("%14.6g %14.6g %8s\n", res[i], errs[i], "-");
    } else {
      const double eoc = std::log(errs[i - 1] / errs[i]) / std::log(res[i - 1] / res[i]);
      out << fmt17(eoc) << "\n";
      std::printf("%14.6g %14.6g %8.3f\n", res[i], errs[i], eoc);
    }
  }
  if (!out) throw std::runtime_error("write failed: " + csv_path);
  return 0;
}

int run_verify(const VerifyOptions& opt) {
  const bool has_field = !opt.field_csv.empty();
  const bool has_traj = !opt.trajectory_csv.empty();
  if (has_field == has_traj) {
    throw std::runtime_error("exactly one of a field CSV or a trajectory index is required");
  }
  if (opt.expect != "pass" && opt.expect != "fail") {
    throw std::runtime_error("expect must be 'pass' or 'fail'");
  }
  const double tol = opt.tolerance >= 0.0 ? opt.tolerance : kChpTolLinear;

  ChpReport rep;
  if (has_field) {
    const NodalField u = read_field_csv(opt.field_csv);
    const ConvexPolytope hull =
        opt.hull_csv.empty() ? boundary_hull(u) : read_hull_csv(opt.hull_csv);
    rep = verify(u, hull, tol);
  } else {
    const Trajectory traj = read_trajectory(opt.trajectory_csv);
    const ConvexPolytope hull = opt.hull_csv.empty() ? boundary_hull(traj, opt.include_zero)
                                                     : read_hull_csv(opt.hull_csv);
    rep = verify(traj, hull, tol);
  }
  std::cout << report_json(rep);
  return rep.pass == (opt.expect == "pass") ? 0 : 1;
}

}  // namespace chp
