#include "wkam/minimizers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace wkam {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Single-source minimal discrete action between grid nodes.
double two_point_action(int y, int x, double s, double t, const OmegaPoint& omega,
                        const LagrangianModel& model, const SpaceGrid& grid, int n_t,
                        double v_cap, int threads) {
  double dt = 1.0 / n_t;
  int steps = static_cast<int>(std::round((t - s) * n_t));
  if (steps < 1 || std::abs(steps * dt - (t - s)) > 1e-9)
    throw InvalidInputError("two_point_action: t - s must be a positive multiple of dt");
  std::vector<double> cur(static_cast<std::size_t>(grid.num_nodes()), kInf);
  cur[static_cast<std::size_t>(y)] = 0.0;
  for (int j = 0; j < steps; ++j) {
    cur = lax_step(cur, grid, dt, s + dt * j, omega, model, v_cap, StepDirection::backward,
                   threads);
  }
  return cur[static_cast<std::size_t>(x)];
}

Vec centered_gradient(const GridField& field, int slice, int node) {
  const SpaceGrid& g = field.grid;
  double dx = g.spacing();
  Vec grad(g.dim());
  for (int axis = 0; axis < g.dim(); ++axis) {
    std::array<int, kMaxDim> up{0, 0}, dn{0, 0};
    up[static_cast<std::size_t>(axis)] = 1;
    dn[static_cast<std::size_t>(axis)] = -1;
    grad[axis] =
        (field.at(slice, g.shift_node(node, up)) - field.at(slice, g.shift_node(node, dn))) /
        (2.0 * dx);
  }
  return grad;
}

}  // namespace

BSet b_set(const WeakKamSolution& u, const WeakKamSolution& u_plus, double t0, double tol) {
  if (u.direction != Direction::backward || u_plus.direction != Direction::forward)
    throw InvalidInputError("b_set: need a backward and a forward solution");
  if (u.u.grid.dim() != u_plus.u.grid.dim() ||
      u.u.grid.n_per_dim() != u_plus.u.grid.n_per_dim() || u.u.n_t != u_plus.u.n_t)
    throw InvalidInputError("b_set: solutions live on different grids");
  if (std::abs(u.alpha - u_plus.alpha) > 1e-12)
    throw InvalidInputError("b_set: solutions were corrected with different alpha");

  BSet b;
  b.slice = u.u.slice_of_time(t0);
  b.t0 = t0;
  b.tol = tol;
  const int n_nodes = u.u.grid.num_nodes();
  double mn = kInf;
  for (int x = 0; x < n_nodes; ++x)
    mn = std::min(mn, u.u.at(b.slice, x) + u_plus.u.at(b.slice, x));
  b.min_value = mn;
  for (int x = 0; x < n_nodes; ++x)
    if (u.u.at(b.slice, x) + u_plus.u.at(b.slice, x) <= mn + tol) b.nodes.push_back(x);
  return b;
}

std::vector<std::pair<Vec, Vec>> integrate_el(const LagrangianModel& model,
                                              const OmegaPoint& omega, const Vec& x0,
                                              const Vec& v0, double t0, double t1, double dt) {
  if (dt == 0.0) throw InvalidInputError("integrate_el: dt must be nonzero");
  int steps = static_cast<int>(std::round((t1 - t0) / dt));
  if (steps < 0) throw InvalidInputError("integrate_el: dt has the wrong sign");
  std::vector<std::pair<Vec, Vec>> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  Vec x = x0, v = v0;
  out.emplace_back(x, v);
  auto accel = [&](const Vec& xx, const Vec& vv, double tt) {
    return model.el_acceleration(wrap(xx), vv, tt, omega);
  };
  for (int k = 0; k < steps; ++k) {
    double t = t0 + dt * k;
    Vec k1x = v, k1v = accel(x, v, t);
    Vec k2x = v + k1v * (dt / 2), k2v = accel(x + k1x * (dt / 2), v + k1v * (dt / 2), t + dt / 2);
    Vec k3x = v + k2v * (dt / 2), k3v = accel(x + k2x * (dt / 2), v + k2v * (dt / 2), t + dt / 2);
    Vec k4x = v + k3v * dt, k4v = accel(x + k3x * dt, v + k3v * dt, t + dt);
    x += (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (dt / 6.0);
    v += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (dt / 6.0);
    out.emplace_back(x, v);
  }
  return out;
}

int MinimizerOrbit::index_of_time(double t, double tol) const {
  double idx = (t - times.front()) / dt_int;
  double r = std::round(idx);
  if (std::abs(idx - r) > tol / dt_int || r < 0 ||
      r >= static_cast<double>(times.size()))
    throw InvalidInputError("orbit does not sample the requested time");
  return static_cast<int>(r);
}

double MinimizerOrbit::action_on(double a, double b, const LagrangianModel& model,
                                 const OmegaPoint& omega) const {
  int ia = index_of_time(a);
  int ib = index_of_time(b);
  if (ib <= ia) throw InvalidInputError("orbit action window is empty");
  double acc = 0.0;
  for (int k = ia; k < ib; ++k)
    acc += dt_int * model.eval(wrap(lifted[static_cast<std::size_t>(k)]),
                               vel[static_cast<std::size_t>(k)], times[static_cast<std::size_t>(k)],
                               omega);
  return acc;
}

MinimizerOrbit launch_minimizer(int x0_node, double t0, const WeakKamSolution& u,
                                const WeakKamSolution& u_plus, const BSet& bset,
                                const OmegaPoint& omega, const LagrangianModel& model,
                                double horizon, double dt_int) {
  (void)u_plus;
  if (!bset.contains(x0_node))
    throw InvalidInputError("launch_minimizer: x0 is not in the B-set");
  const SpaceGrid& grid = u.u.grid;
  int slice = u.u.slice_of_time(t0);
  double dx = grid.spacing();

  // Differentiability gate: centered and one-sided gradients must agree.
  Vec grad = centered_gradient(u.u, slice, x0_node);
  for (int axis = 0; axis < grid.dim(); ++axis) {
    std::array<int, kMaxDim> up{0, 0}, dn{0, 0};
    up[static_cast<std::size_t>(axis)] = 1;
    dn[static_cast<std::size_t>(axis)] = -1;
    double u0v = u.u.at(slice, x0_node);
    double fwd = (u.u.at(slice, grid.shift_node(x0_node, up)) - u0v) / dx;
    double bwd = (u0v - u.u.at(slice, grid.shift_node(x0_node, dn))) / dx;
    if (std::abs(fwd - grad[axis]) > 10.0 * dx || std::abs(bwd - grad[axis]) > 10.0 * dx) {
      std::ostringstream msg;
      msg << "launch_minimizer: u is not numerically differentiable at node " << x0_node
          << " (one-sided gradients " << bwd << " / " << fwd << ")";
      throw NondifferentiablePointError(msg.str());
    }
  }

  HamiltonianView H(model, model.has_closed_form() ? LegendreMode::closed_form
                                                   : LegendreMode::numeric_sup);
  TorusPoint x0_pt = grid.node_point(x0_node);
  Vec v0 = H.gradient_p(x0_pt, grad, t0, omega);

  int steps = static_cast<int>(std::round(horizon / dt_int));
  MinimizerOrbit orbit;
  orbit.t0 = t0;
  orbit.dt_int = dt_int;
  orbit.x0 = x0_pt.coords();
  orbit.v0 = v0;

  auto fwd = integrate_el(model, omega, orbit.x0, v0, t0, t0 + steps * dt_int, dt_int);
  auto bwd = integrate_el(model, omega, orbit.x0, v0, t0, t0 - steps * dt_int, -dt_int);
  orbit.times.reserve(2 * static_cast<std::size_t>(steps) + 1);
  orbit.lifted.reserve(orbit.times.capacity());
  orbit.vel.reserve(orbit.times.capacity());
  for (int k = steps; k >= 1; --k) {
    orbit.times.push_back(t0 - dt_int * k);
    orbit.lifted.push_back(bwd[static_cast<std::size_t>(k)].first);
    orbit.vel.push_back(bwd[static_cast<std::size_t>(k)].second);
  }
  for (int k = 0; k <= steps; ++k) {
    orbit.times.push_back(t0 + dt_int * k);
    orbit.lifted.push_back(fwd[static_cast<std::size_t>(k)].first);
    orbit.vel.push_back(fwd[static_cast<std::size_t>(k)].second);
  }
  return orbit;
}

double verify_global_minimizer(const MinimizerOrbit& orbit, const OmegaPoint& omega,
                               const LagrangianModel& model,
                               const std::vector<std::array<double, 2>>& windows,
                               const SpaceGrid& grid, int n_t, double v_cap, int threads) {
  double worst = -kInf;
  for (const auto& w : windows) {
    double a = w[0], b = w[1];
    double orbit_action = orbit.action_on(a, b, model, omega);
    int ya = grid.nearest_node(wrap(orbit.lifted[static_cast<std::size_t>(
        orbit.index_of_time(a))]));
    int xb = grid.nearest_node(wrap(orbit.lifted[static_cast<std::size_t>(
        orbit.index_of_time(b))]));
    double kernel = two_point_action(ya, xb, a, b, omega, model, grid, n_t, v_cap, threads);
    worst = std::max(worst, orbit_action - kernel);
  }
  return worst;
}

double interp_field(const GridField& field, double t, const TorusPoint& x) {
  int slice = field.slice_of_time(t);
  const SpaceGrid& g = field.grid;
  int n = g.n_per_dim();
  double fx = x[0] * n;
  int i0 = static_cast<int>(std::floor(fx)) % n;
  double w0 = fx - std::floor(fx);
  int i1 = (i0 + 1) % n;
  if (g.dim() == 1) {
    return (1 - w0) * field.at(slice, i0) + w0 * field.at(slice, i1);
  }
  double fy = x[1] * n;
  int j0 = static_cast<int>(std::floor(fy)) % n;
  double w1 = fy - std::floor(fy);
  int j1 = (j0 + 1) % n;
  auto node = [&](int i, int j) { return i + j * n; };
  return (1 - w0) * (1 - w1) * field.at(slice, node(i0, j0)) +
         w0 * (1 - w1) * field.at(slice, node(i1, j0)) +
         (1 - w0) * w1 * field.at(slice, node(i0, j1)) +
         w0 * w1 * field.at(slice, node(i1, j1));
}

OrbitCalibration calibration_of_orbit(const MinimizerOrbit& orbit, const WeakKamSolution& u,
                                      const WeakKamSolution& u_plus, const OmegaPoint& omega,
                                      const LagrangianModel& model, double alpha,
                                      const std::vector<std::array<double, 2>>& windows) {
  OrbitCalibration cal;
  for (const auto& w : windows) {
    double s = w[0], t = w[1];
    double action = orbit.action_on(s, t, model, omega);
    TorusPoint xs = wrap(orbit.lifted[static_cast<std::size_t>(orbit.index_of_time(s))]);
    TorusPoint xt = wrap(orbit.lifted[static_cast<std::size_t>(orbit.index_of_time(t))]);
    if (t <= orbit.t0 + 1e-9) {
      double defect = std::abs(interp_field(u.u, t, xt) - interp_field(u.u, s, xs) - action -
                               (t - s) * alpha);
      cal.backward_defect = std::max(cal.backward_defect, defect);
    }
    if (s >= orbit.t0 - 1e-9) {
      double defect = std::abs(interp_field(u_plus.u, s, xs) - interp_field(u_plus.u, t, xt) -
                               action - (t - s) * alpha);
      cal.forward_defect = std::max(cal.forward_defect, defect);
    }
  }
  return cal;
}

double theta_flow_check(const SkewProductSystem& sys, const OmegaPoint& omega, double s,
                        const LagrangianModel& model, double alpha,
                        const std::vector<double>& u0, const SpaceGrid& grid, int n_t,
                        const WeakKamParams& solver, const ThetaFlowParams& flow) {
  double dt = 1.0 / n_t;
  if (std::abs(std::round(s / dt) * dt - s) > 1e-9)
    throw InvalidInputError("theta_flow_check: s must be a multiple of dt");
  double dt_int = dt / flow.dt_substeps;

  WeakKamSolution u = weak_kam_solve(omega, model, alpha, u0, grid, n_t, solver,
                                     Direction::backward);
  WeakKamSolution up = weak_kam_solve(omega, model, alpha, u0, grid, n_t, solver,
                                      Direction::forward);
  BSet b = b_set(u, up, flow.t0, flow.bset_tol);
  // Deterministic representative: the argmin node.
  int x0 = b.nodes.front();
  double best = kInf;
  for (int node : b.nodes) {
    double v = u.u.at(b.slice, node) + up.u.at(b.slice, node);
    if (v < best) {
      best = v;
      x0 = node;
    }
  }
  MinimizerOrbit gamma =
      launch_minimizer(x0, flow.t0, u, up, b, omega, model, flow.horizon, dt_int);

  OmegaPoint omega_s = sys.theta(s, omega);
  WeakKamSolution u2 = weak_kam_solve(omega_s, model, alpha, u0, grid, n_t, solver,
                                      Direction::backward);
  WeakKamSolution up2 = weak_kam_solve(omega_s, model, alpha, u0, grid, n_t, solver,
                                       Direction::forward);
  double t0_shifted = flow.t0 - s;
  BSet b2 = b_set(u2, up2, t0_shifted, flow.bset_tol);
  if (!b2.contains(x0)) {
    std::ostringstream msg;
    msg << "theta_flow_check: B-set at theta(s)omega does not contain the launch node " << x0;
    throw DiagnosticError(msg.str());
  }
  MinimizerOrbit gamma_s =
      launch_minimizer(x0, t0_shifted, u2, up2, b2, omega_s, model, flow.horizon, dt_int);

  // gamma^{theta(s)w}(t) should equal gamma^w(t + s) on the overlap.
  double defect = 0.0;
  for (std::size_t k = 0; k < gamma_s.times.size(); ++k) {
    double t = gamma_s.times[k];
    double t_plus_s = t + s;
    if (t_plus_s < gamma.times.front() - 1e-12 || t_plus_s > gamma.times.back() + 1e-12)
      continue;
    int idx = gamma.index_of_time(t_plus_s);
    double dist = torus_distance(wrap(gamma_s.lifted[k]),
                                 wrap(gamma.lifted[static_cast<std::size_t>(idx)]));
    double dvel = (gamma_s.vel[k] - gamma.vel[static_cast<std::size_t>(idx)]).norm_inf();
    defect = std::max(defect, dist + dvel);
  }
  return defect;
}

}  // namespace wkam
