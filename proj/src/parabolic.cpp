#include "chp/parabolic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "fem_common.hpp"

namespace chp {

namespace {

constexpr double kPicardTol = 1e-10;
constexpr int kPicardCap = 100;
constexpr double kSymTol = 1e-12;
constexpr double kStructureSlack = 1e-12;

[[noreturn]] void element_error(const char* what, int element) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s at element %d", what, element);
  throw std::invalid_argument(buf);
}

struct StepContext {
  const Mesh* mesh;
  const ParabolicCoefficients* coeffs;
  int ncomp;
  double t;  // time level being solved for
  bool has_advection;
  bool has_reaction;
  std::vector<double> dcomp;  // d_alpha, expanded
};

// Dense block of the spatial operator for one element, coefficients frozen
// at the current Picard iterate v.
void element_block(const StepContext& ctx, const NodalField& v, int e, double* blk) {
  const Mesh& mesh = *ctx.mesh;
  const ParabolicCoefficients& coeffs = *ctx.coeffs;
  const int nv = mesh.nodes_per_element();
  const int dim = mesh.dim;
  const int ncomp = ctx.ncomp;
  const int bs = nv * ncomp;

  const std::array<double, 2> mid = mesh.midpoint(e);
  const double vol = mesh.measure(e);
  const int* nd = mesh.element_nodes(e);

  std::vector<double> u_mid(static_cast<size_t>(ncomp), 0.0);
  for (int li = 0; li < nv; ++li) {
    const std::span<const double> uv = v.at(nd[li]);
    for (int c = 0; c < ncomp; ++c) u_mid[static_cast<size_t>(c)] += uv[static_cast<size_t>(c)] / nv;
  }
  const DenseMatrix grad_u = element_gradient(v, e);

  double a0 = coeffs.a0 ? coeffs.a0(ctx.t, mid, u_mid, grad_u) : 1.0;
  if (!std::isfinite(a0)) element_error("a0 sample is not finite", e);
  if (a0 < -kStructureSlack) element_error("a0 sample is negative", e);
  a0 = std::max(a0, 0.0);

  DenseMatrix a_diff = coeffs.diffusion ? coeffs.diffusion(ctx.t, mid) : DenseMatrix::identity(dim);
  if (a_diff.rows != dim || a_diff.cols != dim) {
    element_error("diffusion sample has the wrong shape", e);
  }
  if (!is_symmetric(a_diff, kSymTol)) element_error("diffusion sample is not symmetric", e);
  if (sym_eigen_min(a_diff) < coeffs.lambda - 1e-12 * (1.0 + max_abs(a_diff))) {
    element_error("diffusion sample falls below the ellipticity floor", e);
  }

  std::array<double, 2> b{0.0, 0.0};
  if (ctx.has_advection) {
    b = coeffs.advection(ctx.t, mid, u_mid, grad_u);
    double bn = 0.0;
    for (int r = 0; r < dim; ++r) bn += b[static_cast<size_t>(r)] * b[static_cast<size_t>(r)];
    bn = std::sqrt(bn);
    if (!(bn <= coeffs.growth_constant * std::sqrt(a0) + kStructureSlack)) {
      element_error("advection sample exceeds the growth bound", e);
    }
  }

  double c_reac = 0.0;
  if (ctx.has_reaction) {
    c_reac = coeffs.reaction(ctx.t, mid, u_mid, grad_u);
    if (!std::isfinite(c_reac)) element_error("reaction sample is not finite", e);
    if (c_reac < -kStructureSlack) element_error("reaction sample is negative", e);
    c_reac = std::max(c_reac, 0.0);
  }

  double grads[3 * 2];
  mesh.basis_gradients(e, grads);

  double geom[3 * 3];
  double adv[3];
  for (int lj = 0; lj < nv; ++lj) {
    double bg = 0.0;
    for (int r = 0; r < dim; ++r) bg += b[static_cast<size_t>(r)] * grads[lj * dim + r];
    adv[lj] = vol * bg / nv;  // one-point quadrature of phi_i b . grad phi_j
    for (int li = 0; li < nv; ++li) {
      double s = 0.0;
      for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) {
          s += grads[li * dim + r] * a_diff(r, c) * grads[lj * dim + c];
        }
      }
      geom[li * 3 + lj] = vol * s;
    }
  }
  const double reac = vol * c_reac / (nv * nv);  // consistent (not lumped) reaction

  for (int li = 0; li < nv; ++li) {
    for (int c = 0; c < ncomp; ++c) {
      for (int lj = 0; lj < nv; ++lj) {
        for (int d = 0; d < ncomp; ++d) {
          double vblk = 0.0;
          if (c == d) {
            vblk = ctx.dcomp[static_cast<size_t>(c)] * a0 * geom[li * 3 + lj] + adv[lj] + reac;
          }
          blk[(li * ncomp + c) * bs + (lj * ncomp + d)] = vblk;
        }
      }
    }
  }
}

Csr assemble_operator(const StepContext& ctx, const NodalField& v,
                      const std::vector<std::vector<int>>& adj) {
  const Mesh& mesh = *ctx.mesh;
  const int ne = mesh.element_count();
  const int bs = mesh.nodes_per_element() * ctx.ncomp;
  std::vector<double> locals(static_cast<size_t>(ne) * bs * bs);

  bool failed = false;
#pragma omp parallel for schedule(static)
  for (int e = 0; e < ne; ++e) {
    try {
      element_block(ctx, v, e, locals.data() + static_cast<size_t>(e) * bs * bs);
    } catch (...) {
#pragma omp atomic write
      failed = true;
    }
  }
  if (failed) {
    for (int e = 0; e < ne; ++e) {
      element_block(ctx, v, e, locals.data() + static_cast<size_t>(e) * bs * bs);
    }
  }

  Csr a = fem::block_pattern(mesh, ctx.ncomp, adj);
  fem::scatter_blocks(mesh, ctx.ncomp, adj, locals, a, /*parallel=*/true);
  return a;
}

std::vector<double> boundary_trace(const ParabolicScenario& scenario, double t) {
  const Mesh& mesh = *scenario.mesh;
  const int ncomp = scenario.components;
  std::vector<double> pinned(static_cast<size_t>(mesh.node_count() * ncomp), 0.0);
  for (int node : mesh.boundary_nodes) {
    const std::vector<double> g = scenario.boundary(t, node);
    if (static_cast<int>(g.size()) != ncomp) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "boundary value at node %d has the wrong size", node);
      throw std::invalid_argument(buf);
    }
    for (int c = 0; c < ncomp; ++c) {
      if (!std::isfinite(g[static_cast<size_t>(c)])) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "boundary value at node %d is not finite", node);
        throw std::invalid_argument(buf);
      }
      pinned[static_cast<size_t>(node * ncomp + c)] = g[static_cast<size_t>(c)];
    }
  }
  return pinned;
}

void validate_scenario(const ParabolicScenario& scenario) {
  if (!scenario.mesh) throw std::invalid_argument("scenario has no mesh");
  if (scenario.components < 1) throw std::invalid_argument("components must be positive");
  if (!scenario.boundary) throw std::invalid_argument("scenario has no boundary trace");
  if (scenario.initial.mesh.get() != scenario.mesh.get() ||
      scenario.initial.components != scenario.components) {
    throw std::invalid_argument("initial state does not match the scenario mesh");
  }
  if (!scenario.coeffs.component_diffusion.empty() &&
      static_cast<int>(scenario.coeffs.component_diffusion.size()) != scenario.components) {
    throw std::invalid_argument("component_diffusion size does not match components");
  }
  for (double d : scenario.coeffs.component_diffusion) {
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw std::invalid_argument("component_diffusion entries must be positive");
    }
  }
}

}  // namespace

NodalField step(const ParabolicScenario& scenario, const NodalField& u_old, double t_old,
                double dt) {
  validate_scenario(scenario);
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (u_old.mesh.get() != scenario.mesh.get() || u_old.components != scenario.components) {
    throw std::invalid_argument("state does not match the scenario mesh");
  }

  const Mesh& mesh = *scenario.mesh;
  const int ncomp = scenario.components;
  const int n = mesh.node_count() * ncomp;
  const double t_new = t_old + dt;

  StepContext ctx;
  ctx.mesh = &mesh;
  ctx.coeffs = &scenario.coeffs;
  ctx.ncomp = ncomp;
  ctx.t = t_new;
  ctx.has_advection = static_cast<bool>(scenario.coeffs.advection);
  ctx.has_reaction = static_cast<bool>(scenario.coeffs.reaction);
  ctx.dcomp = scenario.coeffs.component_diffusion;
  if (ctx.dcomp.empty()) ctx.dcomp.assign(static_cast<size_t>(ncomp), 1.0);

  const std::vector<std::vector<int>> adj = fem::node_elements(mesh);
  const std::vector<double> mass = lumped_mass(mesh);
  const std::vector<double> pinned = boundary_trace(scenario, t_new);

  std::vector<double> rhs(static_cast<size_t>(n));
  for (int i = 0; i < mesh.node_count(); ++i) {
    for (int c = 0; c < ncomp; ++c) {
      rhs[static_cast<size_t>(i * ncomp + c)] =
          mass[static_cast<size_t>(i)] / dt * u_old.values[static_cast<size_t>(i * ncomp + c)];
    }
  }

  NodalField v = u_old;  // Picard iterate carrying the frozen coefficients
  NodalField u_new = make_field(scenario.mesh, ncomp);
  double increment = 0.0;
  double prev_increment = 0.0;
  double theta = 1.0;  // relaxation; halved once the iteration stops contracting
  for (int it = 0; it < kPicardCap; ++it) {
    Csr a = assemble_operator(ctx, v, adj);
    for (int i = 0; i < mesh.node_count(); ++i) {
      const double md = mass[static_cast<size_t>(i)] / dt;
      for (int c = 0; c < ncomp; ++c) {
        const int row = i * ncomp + c;
        for (int k = a.ptr[static_cast<size_t>(row)]; k < a.ptr[static_cast<size_t>(row) + 1]; ++k) {
          if (a.col[k] == row) {
            a.val[k] += md;
            break;
          }
        }
      }
    }

    u_new.values = fem::solve_pinned(a, mesh, ncomp, rhs, pinned,
                                     /*symmetric=*/!ctx.has_advection);
    if (!scenario.coeffs.state_dependent) return u_new;

    // Defect of the freeze: once u_new sits on top of the state v its
    // coefficients were taken from, the step equation is solved.
    double diff = 0.0;
    double scale = 0.0;
    for (size_t k = 0; k < u_new.values.size(); ++k) {
      diff = std::max(diff, std::abs(u_new.values[k] - v.values[k]));
      scale = std::max(scale, std::abs(u_new.values[k]));
    }
    increment = diff / std::max(scale, 1e-30);
    if (increment <= kPicardTol) return u_new;
    if (it > 1 && theta == 1.0 && increment > 0.9 * prev_increment) {
      theta = 0.5;  // stalled or oscillating; relax
    }
    prev_increment = increment;
    for (size_t k = 0; k < v.values.size(); ++k) {
      v.values[k] += theta * (u_new.values[k] - v.values[k]);
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof buf,
                "picard iteration did not converge (relative increment %.3e)", increment);
  throw std::runtime_error(buf);
}

Trajectory run(const ParabolicScenario& scenario) {
  validate_scenario(scenario);
  if (!(scenario.dt > 0.0) || !std::isfinite(scenario.dt)) {
    throw std::invalid_argument("dt must be positive");
  }
  if (!(scenario.t_final >= scenario.dt * (1.0 - 1e-9))) {
    throw std::invalid_argument("final time is shorter than one step");
  }

  const double dt = scenario.dt;
  const double t_final = scenario.t_final;
  int steps = static_cast<int>(std::floor(t_final / dt + 1e-9));
  double tail = t_final - steps * dt;
  if (tail <= 1e-9 * dt) tail = 0.0;

  Trajectory traj;
  traj.mesh = scenario.mesh;
  traj.times.reserve(static_cast<size_t>(steps) + 2);
  traj.states.reserve(static_cast<size_t>(steps) + 2);
  traj.times.push_back(0.0);
  traj.states.push_back(scenario.initial);

  for (int k = 1; k <= steps; ++k) {
    const double t_old = (k - 1) * dt;
    traj.states.push_back(step(scenario, traj.states.back(), t_old, dt));
    traj.times.push_back(k * dt);
  }
  if (tail > 0.0) {
    traj.states.push_back(step(scenario, traj.states.back(), steps * dt, tail));
    traj.times.push_back(t_final);
  }
  return traj;
}

ParabolicCoefficients heat_coefficients() {
  ParabolicCoefficients c;
  c.a0 = [](double, std::array<double, 2>, const std::vector<double>&, const DenseMatrix&) {
    return 1.0;
  };
  c.state_dependent = false;
  return c;
}

ParabolicCoefficients p_laplace_coefficients(double p, double epsilon) {
  if (!(p > 1.0)) throw std::invalid_argument("p must exceed 1");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be nonnegative");
  if (p < 2.0 && !(epsilon > 0.0)) {
    throw std::invalid_argument("epsilon must be positive for p below 2");
  }
  ParabolicCoefficients c;
  c.a0 = [p, epsilon](double, std::array<double, 2>, const std::vector<double>&,
                      const DenseMatrix& grad) {
    double s = epsilon;
    for (double g : grad.a) s += g * g;
    return std::pow(s, 0.5 * (p - 2.0));
  };
  c.state_dependent = (p != 2.0);
  return c;
}

}  // namespace chp
