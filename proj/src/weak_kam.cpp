#include "wkam/weak_kam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace wkam {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

BoundConstants compute_bounds(const OmegaPoint& omega, const LagrangianModel& model,
                              const SpaceGrid& grid, int n_t) {
  BoundConstants b;
  double dt = 1.0 / n_t;
  double diam = 0.5 * std::sqrt(static_cast<double>(grid.dim()));
  Vec zero(grid.dim());
  const int v_samples = 9;
  for (int j = 0; j < n_t; ++j) {
    double t = dt * j;
    for (int node = 0; node < grid.num_nodes(); ++node) {
      TorusPoint x = grid.node_point(node);
      b.f_omega = std::max(b.f_omega, std::abs(model.eval(x, zero, t, omega)));
      for (int s = 0; s < v_samples; ++s) {
        double speed = diam * s / (v_samples - 1);
        for (int axis = 0; axis < grid.dim(); ++axis) {
          for (double sign : {-1.0, 1.0}) {
            Vec v(grid.dim());
            v[axis] = sign * speed;
            b.c_omega = std::max(b.c_omega, std::abs(model.eval(x, v, t, omega)));
          }
        }
      }
    }
  }
  return b;
}

std::vector<double> lax_oleinik(const std::vector<double>& u0, double lambda, double t,
                                const OmegaPoint& omega, const LagrangianModel& model,
                                double alpha, Direction direction, const SpaceGrid& grid, int n_t,
                                double v_cap, int threads) {
  if (lambda < 0) throw InvalidInputError("lax_oleinik: lambda must be >= 0");
  double dt = 1.0 / n_t;
  int steps = static_cast<int>(std::round(lambda * n_t));
  if (std::abs(steps * dt - lambda) > 1e-9)
    throw InvalidInputError("lax_oleinik: lambda must be a multiple of dt");
  std::vector<double> u = u0;
  double correction = dt * alpha;
  for (int j = 0; j < steps; ++j) {
    double t_k;
    StepDirection sd;
    if (direction == Direction::backward) {
      t_k = t - lambda + dt * j;  // slice time of the current values
      sd = StepDirection::backward;
    } else {
      t_k = t + lambda - dt * j;
      sd = StepDirection::forward;
    }
    u = lax_step(u, grid, dt, t_k, omega, model, v_cap, sd, threads);
    for (double& v : u) v += correction;
  }
  return u;
}

WeakKamSolution weak_kam_solve(const OmegaPoint& omega, const LagrangianModel& model, double alpha,
                               const std::vector<double>& u0, const SpaceGrid& grid, int n_t,
                               const WeakKamParams& params, Direction direction) {
  if (params.n_burn >= params.n_max)
    throw InvalidInputError("weak_kam_solve: need n_burn < n_max");
  if (static_cast<int>(u0.size()) != grid.num_nodes())
    throw InvalidInputError("weak_kam_solve: u0 size does not match the grid");

  const int n_nodes = grid.num_nodes();
  const std::size_t row = static_cast<std::size_t>(n_nodes);
  const double dt = 1.0 / n_t;
  const double correction = dt * alpha;

  WeakKamSolution sol{GridField(grid, 0.0, n_t), GridField(grid, 0.0, n_t), direction, alpha,
                      params.n_burn, params.n_max};
  sol.offsets = make_step_offsets(grid, dt, params.v_cap);
  sol.v_cap = params.v_cap;
  sol.argmin.assign(static_cast<std::size_t>(n_t) * row, 0);

  // Working field: one period of slices, all initialized to u0.
  std::vector<std::vector<double>> field(static_cast<std::size_t>(n_t), u0);
  std::vector<double> runmin;
  bool runmin_started = false;
  std::vector<std::uint16_t> step_arg(row);

  BoundConstants bounds = compute_bounds(omega, model, grid, n_t);
  double guard = 0.0;
  auto field_stats = [&]() {
    double lo = kInf, hi = -kInf, sum = 0.0;
    for (const auto& slice : field)
      for (double v : slice) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
      }
    return std::array<double, 3>{lo, hi, sum / (static_cast<double>(n_t) * n_nodes)};
  };
  double mean0 = 0.0;

  for (int sweep = 1; sweep <= params.n_max; ++sweep) {
    double sweep_delta = 0.0;
    for (int step = 1; step <= n_t; ++step) {
      int target, source;
      double t_k;
      StepDirection sd;
      if (direction == Direction::backward) {
        target = step % n_t;
        source = step - 1;
        t_k = dt * source;
        sd = StepDirection::backward;
      } else {
        target = (n_t - 1 - step % n_t) % n_t;
        source = (target + 1) % n_t;
        t_k = dt * source;
        sd = StepDirection::forward;
      }
      std::vector<double> out = lax_step(field[static_cast<std::size_t>(source)], grid, dt, t_k,
                                         omega, model, params.v_cap, sd, params.threads,
                                         &step_arg);
      for (double& v : out) v += correction;
      std::copy(step_arg.begin(), step_arg.end(),
                sol.argmin.begin() + static_cast<std::size_t>(target) * row);
      auto& dst = field[static_cast<std::size_t>(target)];
      for (std::size_t i = 0; i < row; ++i)
        sweep_delta = std::max(sweep_delta, std::abs(out[i] - dst[i]));
      dst.swap(out);
    }
    sol.final_sweep_delta = sweep_delta;

    auto [lo, hi, mean] = field_stats();
    if (sweep == 1) {
      guard = 10.0 * ((hi - lo) + bounds.f_omega + std::abs(alpha) + 1.0);
      mean0 = mean;
    } else if (hi - lo > guard || std::abs(mean - mean0) > guard) {
      std::ostringstream msg;
      msg << "weak_kam_solve: corrected iterates left the boundedness band "
          << "(oscillation " << hi - lo << ", drift " << mean - mean0
          << ") with alpha = " << alpha << "; the critical value is likely wrong";
      throw DiagnosticError(msg.str());
    }

    if (sweep >= params.n_burn) {
      if (!runmin_started) {
        runmin.assign(static_cast<std::size_t>(n_t) * row, kInf);
        runmin_started = true;
      }
      double fold_delta = 0.0;
      for (int j = 0; j < n_t; ++j) {
        const auto& slice = field[static_cast<std::size_t>(j)];
        double* rm = runmin.data() + static_cast<std::size_t>(j) * row;
        for (std::size_t i = 0; i < row; ++i) {
          double next = std::min(rm[i], slice[i]);
          if (std::isfinite(rm[i])) fold_delta = std::max(fold_delta, rm[i] - next);
          rm[i] = next;
        }
      }
      if (sweep > params.n_burn) sol.trace.push_back(fold_delta);
    }

    if (sweep_delta == 0.0 && sweep >= params.n_burn) {
      sol.exactly_converged = true;
      break;
    }
  }
  for (int j = 0; j < n_t; ++j) {
    const auto& slice = field[static_cast<std::size_t>(j)];
    for (int x = 0; x < n_nodes; ++x) {
      sol.u.at(j, x) = runmin[static_cast<std::size_t>(j) * row + static_cast<std::size_t>(x)];
      sol.final_field.at(j, x) = slice[static_cast<std::size_t>(x)];
    }
  }
  // Gauge: anchored at (node 0, t = 0).
  double anchor_u = sol.u.at(0, 0);
  double anchor_f = sol.final_field.at(0, 0);
  for (double& v : sol.u.values) v -= anchor_u;
  for (double& v : sol.final_field.values) v -= anchor_f;
  return sol;
}

ViscosityReport viscosity_check(const WeakKamSolution& sol, const OmegaPoint& omega,
                                const LagrangianModel& model, double alpha,
                                double convergence_threshold) {
  if (sol.direction != Direction::backward)
    throw InvalidInputError("viscosity_check: expects a backward solution");
  double tail = sol.trace.empty() ? kInf : sol.trace.back();
  if (!(sol.exactly_converged || tail <= convergence_threshold))
    throw InvalidStateError("viscosity_check: solution has not converged");

  const SpaceGrid& grid = sol.u.grid;
  const int n_t = sol.u.n_t;
  const int n_nodes = grid.num_nodes();
  const double dt = sol.dt();
  const double dx = grid.spacing();
  HamiltonianView H(model, model.has_closed_form() ? LegendreMode::closed_form
                                                   : LegendreMode::numeric_sup);

  ViscosityReport rep;
  rep.n_x = grid.n_per_dim();
  rep.n_t = n_t;

  for (int j = 0; j < n_t; ++j) {
    int jp = (j + 1) % n_t;
    int jm = (j - 1 + n_t) % n_t;
    double t = sol.u.time_of(j);
    for (int x = 0; x < n_nodes; ++x) {
      double ut = (sol.u.at(jp, x) - sol.u.at(jm, x)) / (2.0 * dt);
      Vec v_in = sol.incoming_velocity(j, x);
      Vec du(grid.dim());
      for (int axis = 0; axis < grid.dim(); ++axis) {
        std::array<int, kMaxDim> up{0, 0}, dn{0, 0};
        up[static_cast<std::size_t>(axis)] = 1;
        dn[static_cast<std::size_t>(axis)] = -1;
        double u0 = sol.u.at(j, x);
        double uup = sol.u.at(j, grid.shift_node(x, up));
        double udn = sol.u.at(j, grid.shift_node(x, dn));
        if (v_in[axis] > 0)
          du[axis] = (u0 - udn) / dx;
        else if (v_in[axis] < 0)
          du[axis] = (uup - u0) / dx;
        else
          du[axis] = (uup - udn) / (2.0 * dx);
      }
      double r = ut + H.value(grid.node_point(x), du, t, omega) - alpha;
      rep.subsolution_defect = std::max(rep.subsolution_defect, std::max(r, 0.0));
      rep.residual_sup = std::max(rep.residual_sup, std::abs(r));
    }
  }

  // Supersolution side: equality along the argmin chains of the final sweep,
  // one full period back from every node.
  double sum = 0.0;
  int count = 0;
  for (int j = 0; j < n_t; ++j) {
    for (int x = 0; x < n_nodes; ++x) {
      int node = x;
      int slice = j;
      double acc = 0.0;
      for (int step = 0; step < n_t; ++step) {
        std::uint16_t c = sol.argmin[static_cast<std::size_t>(slice) *
                                         static_cast<std::size_t>(n_nodes) +
                                     static_cast<std::size_t>(node)];
        const auto& k = sol.offsets.steps[c];
        int prev = grid.shift_node(node, {-k[0], -k[1]});
        int pslice = (slice - 1 + n_t) % n_t;
        double t_prev = sol.u.time_of(pslice);
        acc += dt * model.eval(grid.node_point(prev), sol.offsets.velocities[c], t_prev, omega) +
               dt * alpha;
        node = prev;
        slice = pslice;
      }
      double defect = std::abs(sol.u.at(j, x) - (sol.u.at(j, node) + acc));
      rep.calibration_max = std::max(rep.calibration_max, defect);
      sum += defect;
      ++count;
    }
  }
  rep.calibration_mean = count > 0 ? sum / count : 0.0;
  return rep;
}

CalibrationReport calibration_check(const WeakKamSolution& sol, const OmegaPoint& omega,
                                    const LagrangianModel& model, double alpha, int sample_slices,
                                    double s, int threads) {
  if (s <= 0) throw InvalidInputError("calibration_check: s must be positive");
  const SpaceGrid& grid = sol.u.grid;
  const int n_t = sol.u.n_t;
  const int n_nodes = grid.num_nodes();
  double dt = sol.dt();
  if (std::abs(std::round(s / dt) * dt - s) > 1e-9)
    throw InvalidInputError("calibration_check: s must be a multiple of dt");

  CalibrationReport rep;
  int stride = std::max(1, n_t / std::max(1, sample_slices));
  double v_cap = sol.v_cap;

  for (int j = 0; j < n_t; j += stride) {
    double t = sol.u.time_of(j);
    ActionKernel K = ActionKernel::compute(t - s, t, omega, model, grid, n_t, v_cap,
                                           /*with_backpointers=*/false, threads);
    int j_src = sol.u.slice_of_time(t - s);
    for (int x = 0; x < n_nodes; ++x) {
      double best = kInf;
      for (int y = 0; y < n_nodes; ++y) {
        double cand = sol.u.at(j_src, y) + K.value(y, x) + s * alpha;
        best = std::min(best, cand);
        double violation = sol.u.at(j, x) - cand;
        rep.max_domination_violation = std::max(rep.max_domination_violation, violation);
      }
      rep.max_equality_defect =
          std::max(rep.max_equality_defect, std::abs(sol.u.at(j, x) - best));
    }
    ++rep.slices_checked;
  }
  return rep;
}

double lipschitz_in_lambda_check(const std::vector<double>& u0, const OmegaPoint& omega,
                                 const LagrangianModel& model, double alpha,
                                 const std::vector<double>& lambdas, const SpaceGrid& grid,
                                 int n_t, double v_cap, int threads) {
  BoundConstants b = compute_bounds(omega, model, grid, n_t);
  double rate = b.f_omega + std::abs(alpha);
  std::vector<std::vector<double>> slices;
  slices.reserve(lambdas.size());
  for (double l : lambdas)
    slices.push_back(
        lax_oleinik(u0, l, 0.0, omega, model, alpha, Direction::backward, grid, n_t, v_cap,
                    threads));
  double worst = 0.0;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    for (std::size_t j = i + 1; j < lambdas.size(); ++j) {
      if (lambdas[i] == lambdas[j]) continue;  // degenerate pair excluded
      double diff = 0.0;
      for (std::size_t k = 0; k < slices[i].size(); ++k)
        diff = std::max(diff, std::abs(slices[i][k] - slices[j][k]));
      if (rate == 0.0) {
        if (diff > 0.0) return kInf;
        continue;
      }
      worst = std::max(worst, diff / (std::abs(lambdas[i] - lambdas[j]) * rate));
    }
  }
  return worst;
}

EquivarianceReport equivariance_check(const SkewProductSystem& sys, const OmegaPoint& omega,
                                      double s, const LagrangianModel& model, double alpha,
                                      const std::vector<double>& u0, const SpaceGrid& grid,
                                      int n_t, const WeakKamParams& params) {
  double dt = 1.0 / n_t;
  long long shift = std::llround(s * n_t);
  if (std::abs(shift * dt - s) > 1e-9)
    throw InvalidInputError("equivariance_check: s must be a multiple of dt");

  WeakKamSolution at_omega = weak_kam_solve(omega, model, alpha, u0, grid, n_t, params);
  WeakKamSolution at_shifted =
      weak_kam_solve(sys.theta(s, omega), model, alpha, u0, grid, n_t, params);

  const int n_nodes = grid.num_nodes();
  EquivarianceReport rep;
  // u^{theta(s)w}(x,t) = u^w(x, t+s) modulo the additive gauge.
  double mean_delta = 0.0;
  std::vector<double> delta(static_cast<std::size_t>(n_t) * static_cast<std::size_t>(n_nodes));
  for (int j = 0; j < n_t; ++j) {
    int j_shift = static_cast<int>(((j + shift) % n_t + n_t) % n_t);
    for (int x = 0; x < n_nodes; ++x) {
      double d = at_shifted.u.at(j, x) - at_omega.u.at(j_shift, x);
      delta[static_cast<std::size_t>(j) * static_cast<std::size_t>(n_nodes) +
            static_cast<std::size_t>(x)] = d;
      mean_delta += d;
    }
  }
  mean_delta /= static_cast<double>(delta.size());
  for (double d : delta)
    rep.shift_defect = std::max(rep.shift_defect, std::abs(d - mean_delta));
  rep.periodicity_defect = 0.0;  // single-period storage
  return rep;
}

}  // namespace wkam
