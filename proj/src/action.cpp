#include "wkam/action.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace wkam {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Relaxes out[x] over all candidate steps for x in [begin, end).
// `besty` tracks the source node of the incumbent for the tie-break and must
// be non-null whenever `arg` is.
void relax_range(const double* u, double* out, std::uint16_t* arg, int* besty,
                 const SpaceGrid& grid, const StepOffsets& off, const std::vector<double>& cost,
                 StepDirection dir, std::size_t begin, std::size_t end) {
  const int n = grid.n_per_dim();
  const int n_nodes = grid.num_nodes();
  const bool backward = dir == StepDirection::backward;
  for (std::size_t c = 0; c < off.steps.size(); ++c) {
    const double* costc = cost.data() + c * static_cast<std::size_t>(n_nodes);
    const auto& k = off.steps[c];
    if (grid.dim() == 1) {
      // Source node y = x -+ k mod n.
      int shift = ((backward ? k[0] : -k[0]) % n + n) % n;
      if (arg == nullptr) {
        for (std::size_t x = begin; x < end; ++x) {
          int y = static_cast<int>(x) - shift;
          if (y < 0) y += n;
          double cand = u[y] + (backward ? costc[y] : costc[x]);
          if (cand < out[x]) out[x] = cand;
        }
      } else {
        for (std::size_t x = begin; x < end; ++x) {
          int y = static_cast<int>(x) - shift;
          if (y < 0) y += n;
          double cand = u[y] + (backward ? costc[y] : costc[x]);
          if (cand < out[x] || (cand == out[x] && y < besty[x])) {
            out[x] = cand;
            arg[x] = static_cast<std::uint16_t>(c);
            besty[x] = y;
          }
        }
      }
    } else {
      std::array<int, kMaxDim> step = k;
      if (!backward) {
        step[0] = -step[0];
        step[1] = -step[1];
      }
      std::array<int, kMaxDim> neg{-step[0], -step[1]};
      for (std::size_t x = begin; x < end; ++x) {
        int y = grid.shift_node(static_cast<int>(x), neg);
        double cand = u[y] + (backward ? costc[y] : costc[x]);
        if (arg == nullptr) {
          if (cand < out[x]) out[x] = cand;
        } else if (cand < out[x] || (cand == out[x] && y < besty[x])) {
          out[x] = cand;
          arg[x] = static_cast<std::uint16_t>(c);
          besty[x] = y;
        }
      }
    }
  }
}

}  // namespace

StepOffsets make_step_offsets(const SpaceGrid& grid, double dt, double v_cap) {
  StepOffsets off;
  off.dim = grid.dim();
  double cell_reach = v_cap * dt * grid.n_per_dim();
  int K = static_cast<int>(std::floor(cell_reach + 1e-12));
  if (K < 1)
    throw ConfigError("grid.v_cap",
                      "empty candidate set: v_cap * dt must cover at least one grid cell");
  double dx = grid.spacing();
  double max_norm = v_cap * dt + 1e-12;
  auto push = [&](int k0, int k1) {
    double nx = k0 * dx, ny = k1 * dx;
    if (std::sqrt(nx * nx + ny * ny) > max_norm) return;
    off.steps.push_back({k0, k1});
    Vec v(grid.dim());
    v[0] = nx / dt;
    if (grid.dim() == 2) v[1] = ny / dt;
    off.velocities.push_back(v);
    off.reach = std::max({off.reach, std::abs(k0), std::abs(k1)});
  };
  if (grid.dim() == 1) {
    for (int k = -K; k <= K; ++k) push(k, 0);
  } else {
    for (int k0 = -K; k0 <= K; ++k0)
      for (int k1 = -K; k1 <= K; ++k1) push(k0, k1);
  }
  if (off.steps.size() > 65535)
    throw ConfigError("grid.v_cap", "candidate set too large for backpointer storage");
  return off;
}

int GridField::slice_of_time(double t) const {
  double rel = mod1(t - t0);
  double idx = rel * n_t;
  double rounded = std::round(idx);
  if (std::abs(idx - rounded) > 1e-6 * n_t)
    throw InvalidInputError("time is not aligned with the grid");
  return static_cast<int>(rounded) % n_t;
}

std::vector<double> build_step_costs(const SpaceGrid& grid, const StepOffsets& offsets, double dt,
                                     double t, const OmegaPoint& omega,
                                     const LagrangianModel& model) {
  const int n_nodes = grid.num_nodes();
  std::vector<double> cost(offsets.steps.size() * static_cast<std::size_t>(n_nodes));
  for (std::size_t c = 0; c < offsets.steps.size(); ++c) {
    double* row = cost.data() + c * static_cast<std::size_t>(n_nodes);
    const Vec& v = offsets.velocities[c];
    for (int node = 0; node < n_nodes; ++node)
      row[node] = dt * model.eval(grid.node_point(node), v, t, omega);
  }
  return cost;
}

std::vector<double> lax_step(const std::vector<double>& u, const SpaceGrid& grid, double dt,
                             double t_k, const OmegaPoint& omega, const LagrangianModel& model,
                             double v_cap, StepDirection direction, int threads,
                             std::vector<std::uint16_t>* argmin) {
  if (static_cast<int>(u.size()) != grid.num_nodes())
    throw InvalidInputError("lax_step: slice size does not match the grid");
  StepOffsets off = make_step_offsets(grid, dt, v_cap);
  double cost_time = direction == StepDirection::backward ? t_k : t_k - dt;
  std::vector<double> cost = build_step_costs(grid, off, dt, cost_time, omega, model);
  std::vector<double> out(u.size(), kInf);
  std::vector<int> besty;
  std::uint16_t* arg = nullptr;
  if (argmin != nullptr) {
    argmin->assign(u.size(), 0);
    besty.assign(u.size(), std::numeric_limits<int>::max());
    arg = argmin->data();
  }
  int* by = besty.empty() ? nullptr : besty.data();
  parallel_for(u.size(), threads, [&](std::size_t b, std::size_t e) {
    relax_range(u.data(), out.data(), arg, by, grid, off, cost, direction, b, e);
  });
  return out;
}

bool Curve::closed(double tol) const {
  if (points.empty()) return false;
  double span = dt * segments();
  if (std::abs(span - std::round(span)) > tol) return false;
  return torus_distance(points.front(), points.back()) <= tol;
}

double discrete_action(const std::vector<Vec>& lifted, double t_start, double dt,
                       const LagrangianModel& model, const OmegaPoint& omega) {
  double a = 0.0;
  for (std::size_t j = 0; j + 1 < lifted.size(); ++j) {
    Vec v = (lifted[j + 1] - lifted[j]) * (1.0 / dt);
    a += dt * model.eval(wrap(lifted[j]), v, t_start + dt * static_cast<double>(j), omega);
  }
  return a;
}

Curve make_curve(std::vector<Vec> lifted, double t_start, double dt,
                 const LagrangianModel& model, const OmegaPoint& omega) {
  if (lifted.size() < 2) throw InvalidInputError("make_curve: need at least one segment");
  Curve c;
  c.t_start = t_start;
  c.dt = dt;
  c.lifted = std::move(lifted);
  c.points.reserve(c.lifted.size());
  for (const Vec& z : c.lifted) c.points.push_back(wrap(z));
  c.velocities.reserve(c.lifted.size() - 1);
  for (std::size_t j = 0; j + 1 < c.lifted.size(); ++j)
    c.velocities.push_back((c.lifted[j + 1] - c.lifted[j]) * (1.0 / dt));
  c.action = discrete_action(c.lifted, t_start, dt, model, omega);
  c.p_start = model.partials(c.points.front(), c.velocities.front(), t_start, omega).second;
  c.p_end =
      model.partials(c.points.back(), c.velocities.back(), c.t_end(), omega).second;
  return c;
}

ActionKernel ActionKernel::compute(double s, double t, const OmegaPoint& omega,
                                   const LagrangianModel& model, const SpaceGrid& grid, int n_t,
                                   double v_cap, bool with_backpointers, int threads) {
  double dt = 1.0 / n_t;
  double span = t - s;
  int steps = static_cast<int>(std::round(span * n_t));
  if (steps < 1 || std::abs(steps * dt - span) > 1e-9)
    throw InvalidInputError("action_kernel: t - s must be a positive multiple of dt");

  ActionKernel k;
  k.s_ = s;
  k.t_ = t;
  k.steps_ = steps;
  k.grid_ = grid;
  k.offsets_ = make_step_offsets(grid, dt, v_cap);

  const int n_nodes = grid.num_nodes();
  const std::size_t row = static_cast<std::size_t>(n_nodes);
  std::vector<double> cur(row * row, kInf), nxt(row * row);
  for (int y = 0; y < n_nodes; ++y) cur[static_cast<std::size_t>(y) * row + y] = 0.0;
  if (with_backpointers)
    k.backptr_.assign(static_cast<std::size_t>(steps) * row * row, 0);

  std::vector<int> besty(with_backpointers ? row * row : 0);
  for (int j = 0; j < steps; ++j) {
    double tau = s + dt * j;
    std::vector<double> cost = build_step_costs(grid, k.offsets_, dt, tau, omega, model);
    std::uint16_t* bp =
        with_backpointers ? k.backptr_.data() + static_cast<std::size_t>(j) * row * row : nullptr;
    parallel_for(row, threads, [&](std::size_t yb, std::size_t ye) {
      for (std::size_t y = yb; y < ye; ++y) {
        double* out = nxt.data() + y * row;
        std::fill(out, out + row, kInf);
        std::uint16_t* arg = bp == nullptr ? nullptr : bp + y * row;
        int* by = nullptr;
        if (with_backpointers) {
          by = besty.data() + y * row;
          std::fill(by, by + row, std::numeric_limits<int>::max());
        }
        relax_range(cur.data() + y * row, out, arg, by, grid, k.offsets_, cost,
                    StepDirection::backward, 0, row);
      }
    });
    cur.swap(nxt);
  }
  k.values_ = std::move(cur);
  return k;
}

Curve ActionKernel::extract_minimizer(int y, int x, const LagrangianModel& model,
                                      const OmegaPoint& omega) const {
  if (!has_backpointers())
    throw InvalidStateError("extract_minimizer: kernel computed without backpointers");
  if (!std::isfinite(value(y, x)))
    throw InvalidInputError("extract_minimizer: target not reachable at this v_cap");
  const int n_nodes = grid_.num_nodes();
  const std::size_t row = static_cast<std::size_t>(n_nodes);
  double dx = grid_.spacing();
  double dt = (t_ - s_) / steps_;

  std::vector<int> nodes(static_cast<std::size_t>(steps_) + 1);
  std::vector<std::array<int, kMaxDim>> taken(static_cast<std::size_t>(steps_));
  nodes[static_cast<std::size_t>(steps_)] = x;
  for (int j = steps_ - 1; j >= 0; --j) {
    int here = nodes[static_cast<std::size_t>(j) + 1];
    std::uint16_t c = backptr_[static_cast<std::size_t>(j) * row * row +
                               static_cast<std::size_t>(y) * row + static_cast<std::size_t>(here)];
    if (c >= offsets_.steps.size()) throw InternalError("extract_minimizer: corrupted backpointer");
    const auto& k = offsets_.steps[c];
    taken[static_cast<std::size_t>(j)] = k;
    nodes[static_cast<std::size_t>(j)] = grid_.shift_node(here, {-k[0], -k[1]});
  }
  if (nodes[0] != y) throw InternalError("extract_minimizer: backtrack did not reach the source");

  std::vector<Vec> lifted(static_cast<std::size_t>(steps_) + 1, Vec(grid_.dim()));
  lifted[0] = grid_.node_point(y).coords();
  for (int j = 0; j < steps_; ++j) {
    Vec z = lifted[static_cast<std::size_t>(j)];
    for (int i = 0; i < grid_.dim(); ++i)
      z[i] += taken[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] * dx;
    lifted[static_cast<std::size_t>(j) + 1] = z;
  }
  return make_curve(std::move(lifted), s_, dt, model, omega);
}

ReverseActionField reverse_action(int target_node, double t_target, int steps,
                                  const OmegaPoint& omega, const LagrangianModel& model,
                                  const SpaceGrid& grid, int n_t, double v_cap, int threads) {
  if (steps < 1) throw InvalidInputError("reverse_action: steps must be >= 1");
  double dt = 1.0 / n_t;
  StepOffsets off = make_step_offsets(grid, dt, v_cap);
  const int n_nodes = grid.num_nodes();
  const std::size_t row = static_cast<std::size_t>(n_nodes);

  ReverseActionField field;
  field.grid = grid;
  field.t_target = t_target;
  field.n_t = n_t;
  field.steps = steps;
  field.values.assign((static_cast<std::size_t>(steps) + 1) * row, kInf);
  field.values[static_cast<std::size_t>(steps) * row + static_cast<std::size_t>(target_node)] =
      0.0;

  for (int j = steps - 1; j >= 0; --j) {
    double tau = t_target - dt * (steps - j);
    std::vector<double> cost = build_step_costs(grid, off, dt, tau, omega, model);
    const double* u = field.values.data() + (static_cast<std::size_t>(j) + 1) * row;
    double* out = field.values.data() + static_cast<std::size_t>(j) * row;
    parallel_for(row, threads, [&](std::size_t b, std::size_t e) {
      relax_range(u, out, nullptr, nullptr, grid, off, cost, StepDirection::forward, b, e);
    });
  }
  return field;
}

RefineResult refine_minimizer(const Curve& curve, const OmegaPoint& omega,
                              const LagrangianModel& model, int max_iters, double tol) {
  RefineResult res;
  std::vector<Vec> z = curve.lifted;
  const int n = static_cast<int>(z.size()) - 1;  // segments
  const double dt = curve.dt;
  const int d = model.dim();

  auto action_of = [&](const std::vector<Vec>& pts) {
    return discrete_action(pts, curve.t_start, dt, model, omega);
  };

  // Gradient of the discrete action with respect to the interior lifted
  // nodes. grad[i] corresponds to z[i], i = 1..n-1.
  auto gradient = [&](const std::vector<Vec>& pts, std::vector<Vec>& grad) {
    double sup_residual = 0.0;
    std::vector<std::pair<Vec, Vec>> pp(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      Vec v = (pts[static_cast<std::size_t>(j) + 1] - pts[static_cast<std::size_t>(j)]) *
              (1.0 / dt);
      pp[static_cast<std::size_t>(j)] =
          model.partials(wrap(pts[static_cast<std::size_t>(j)]), v, curve.t_start + dt * j, omega);
    }
    for (int i = 1; i < n; ++i) {
      Vec g(d);
      for (int c = 0; c < d; ++c)
        g[c] = dt * pp[static_cast<std::size_t>(i)].first[c] +
               pp[static_cast<std::size_t>(i) - 1].second[c] -
               pp[static_cast<std::size_t>(i)].second[c];
      grad[static_cast<std::size_t>(i)] = g;
      sup_residual = std::max(sup_residual, g.norm_inf() / dt);
    }
    return sup_residual;
  };

  double action = action_of(z);
  res.action_trace.push_back(action);
  std::vector<Vec> grad(z.size(), Vec(d));
  double sigma = dt;
  double sigma_stable = -1.0;  // last step accepted by an observable decrease

  for (int iter = 0; iter < max_iters; ++iter) {
    res.el_residual = gradient(z, grad);
    if (res.el_residual <= tol) {
      res.converged = true;
      res.iterations = iter;
      break;
    }
    double g2 = 0.0;
    for (int i = 1; i < n; ++i) g2 += grad[static_cast<std::size_t>(i)].norm2();
    res.iterations = iter + 1;

    // Once the predicted decrease is below the float resolution of the
    // action value the Armijo test is blind, but the gradient itself is
    // still accurate; free-run plain descent at a known-stable step.
    double noise = 1e-13 * (std::abs(action) + 1.0);
    if (sigma_stable > 0.0 && sigma_stable * g2 < noise) {
      double step = 0.5 * sigma_stable;
      for (int i = 1; i < n; ++i)
        z[static_cast<std::size_t>(i)] += grad[static_cast<std::size_t>(i)] * (-step);
      res.action_trace.push_back(action);
      continue;
    }

    bool accepted = false;
    double step = sigma;
    for (int ls = 0; ls < 60; ++ls) {
      std::vector<Vec> trial = z;
      for (int i = 1; i < n; ++i)
        trial[static_cast<std::size_t>(i)] =
            z[static_cast<std::size_t>(i)] - grad[static_cast<std::size_t>(i)] * step;
      double trial_action = action_of(trial);
      if (trial_action <= action - 1e-4 * step * g2 + noise) {
        z.swap(trial);
        if (trial_action <= action - 1e-4 * step * g2) sigma_stable = step;
        action = std::min(action, trial_action);
        sigma = std::min(step * 1.5, 1e6);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.line_search_failed = true;
      break;
    }
    res.action_trace.push_back(action);
  }
  res.curve = make_curve(std::move(z), curve.t_start, dt, model, omega);
  return res;
}

double semiconcavity_constant(const std::vector<double>& slice, const SpaceGrid& grid,
                              int h_nodes, bool cyclic) {
  if (h_nodes < 1) throw InvalidInputError("semiconcavity_constant: h must be >= 1 grid cell");
  double h = h_nodes * grid.spacing();
  double best = -kInf;
  int n = grid.n_per_dim();
  for (int node = 0; node < grid.num_nodes(); ++node) {
    auto mi = grid.node_multi_index(node);
    for (int axis = 0; axis < grid.dim(); ++axis) {
      if (!cyclic && (mi[static_cast<std::size_t>(axis)] - h_nodes < 0 ||
                      mi[static_cast<std::size_t>(axis)] + h_nodes >= n))
        continue;
      std::array<int, kMaxDim> up{0, 0}, dn{0, 0};
      up[static_cast<std::size_t>(axis)] = h_nodes;
      dn[static_cast<std::size_t>(axis)] = -h_nodes;
      double second = (slice[static_cast<std::size_t>(grid.shift_node(node, up))] +
                       slice[static_cast<std::size_t>(grid.shift_node(node, dn))] -
                       2.0 * slice[static_cast<std::size_t>(node)]) /
                      (h * h);
      best = std::max(best, second);
    }
  }
  return best;
}

double median_abs_second_difference(const std::vector<double>& slice, const SpaceGrid& grid,
                                    int h_nodes) {
  double h = h_nodes * grid.spacing();
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(grid.num_nodes()) * static_cast<std::size_t>(grid.dim()));
  for (int node = 0; node < grid.num_nodes(); ++node) {
    for (int axis = 0; axis < grid.dim(); ++axis) {
      std::array<int, kMaxDim> up{0, 0}, dn{0, 0};
      up[static_cast<std::size_t>(axis)] = h_nodes;
      dn[static_cast<std::size_t>(axis)] = -h_nodes;
      vals.push_back(std::abs(slice[static_cast<std::size_t>(grid.shift_node(node, up))] +
                              slice[static_cast<std::size_t>(grid.shift_node(node, dn))] -
                              2.0 * slice[static_cast<std::size_t>(node)]) /
                     (h * h));
    }
  }
  std::nth_element(vals.begin(), vals.begin() + vals.size() / 2, vals.end());
  return vals[vals.size() / 2];
}

bool is_kink_node(const std::vector<double>& slice, const SpaceGrid& grid, int node, int h_nodes,
                  double factor) {
  double med = median_abs_second_difference(slice, grid, h_nodes);
  double scale = 0.0;
  for (double v : slice) scale = std::max(scale, std::abs(v));
  double h = h_nodes * grid.spacing();
  // Guard against an exactly flat median (piecewise-linear slices).
  med = std::max(med, 1e-9 * (scale + 1.0) / (h * h));
  double most_negative = kInf;
  for (int axis = 0; axis < grid.dim(); ++axis) {
    std::array<int, kMaxDim> up{0, 0}, dn{0, 0};
    up[static_cast<std::size_t>(axis)] = h_nodes;
    dn[static_cast<std::size_t>(axis)] = -h_nodes;
    double second = (slice[static_cast<std::size_t>(grid.shift_node(node, up))] +
                     slice[static_cast<std::size_t>(grid.shift_node(node, dn))] -
                     2.0 * slice[static_cast<std::size_t>(node)]) /
                    (h * h);
    most_negative = std::min(most_negative, second);
  }
  return most_negative < -factor * med;
}

namespace {

// Single-source DP with backpointers; cheap path for minimizer restarts.
Curve dp_minimizer(int y, int x, double s, double t, const OmegaPoint& omega,
                   const LagrangianModel& model, const SpaceGrid& grid, int n_t, double v_cap,
                   int threads) {
  double dt = 1.0 / n_t;
  int steps = static_cast<int>(std::round((t - s) * n_t));
  StepOffsets off = make_step_offsets(grid, dt, v_cap);
  const std::size_t row = static_cast<std::size_t>(grid.num_nodes());
  std::vector<double> cur(row, kInf), nxt(row);
  cur[static_cast<std::size_t>(y)] = 0.0;
  std::vector<std::uint16_t> bp(static_cast<std::size_t>(steps) * row);
  std::vector<int> besty(row);
  for (int j = 0; j < steps; ++j) {
    std::vector<double> cost = build_step_costs(grid, off, dt, s + dt * j, omega, model);
    std::fill(nxt.begin(), nxt.end(), kInf);
    std::fill(besty.begin(), besty.end(), std::numeric_limits<int>::max());
    std::uint16_t* arg = bp.data() + static_cast<std::size_t>(j) * row;
    parallel_for(row, threads, [&](std::size_t b, std::size_t e) {
      relax_range(cur.data(), nxt.data(), arg, besty.data(), grid, off, cost,
                  StepDirection::backward, b, e);
    });
    cur.swap(nxt);
  }
  if (!std::isfinite(cur[static_cast<std::size_t>(x)]))
    throw InvalidInputError("superdifferential: DP target not reachable at this v_cap");

  std::vector<int> nodes(static_cast<std::size_t>(steps) + 1);
  std::vector<std::array<int, kMaxDim>> taken(static_cast<std::size_t>(steps));
  nodes[static_cast<std::size_t>(steps)] = x;
  for (int j = steps - 1; j >= 0; --j) {
    int here = nodes[static_cast<std::size_t>(j) + 1];
    std::uint16_t c = bp[static_cast<std::size_t>(j) * row + static_cast<std::size_t>(here)];
    const auto& k = off.steps[c];
    taken[static_cast<std::size_t>(j)] = k;
    nodes[static_cast<std::size_t>(j)] = grid.shift_node(here, {-k[0], -k[1]});
  }
  std::vector<Vec> lifted(static_cast<std::size_t>(steps) + 1, Vec(grid.dim()));
  lifted[0] = grid.node_point(y).coords();
  for (int j = 0; j < steps; ++j) {
    Vec z = lifted[static_cast<std::size_t>(j)];
    for (int i = 0; i < grid.dim(); ++i)
      z[i] += taken[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] * grid.spacing();
    lifted[static_cast<std::size_t>(j) + 1] = z;
  }
  return make_curve(std::move(lifted), s, dt, model, omega);
}

}  // namespace

std::vector<Vec> superdifferential_momenta(double s, int y, double t, int x,
                                           const OmegaPoint& omega, const LagrangianModel& model,
                                           const SpaceGrid& grid, int n_t, double v_cap,
                                           int restarts, double dedup_tol, int threads) {
  if (restarts < 1) throw InvalidInputError("superdifferential_momenta: restarts must be >= 1");
  double dt = 1.0 / n_t;
  int steps = static_cast<int>(std::round((t - s) * n_t));
  if (steps < 1) throw InvalidInputError("superdifferential_momenta: need t > s");
  const int d = grid.dim();
  TorusPoint py = grid.node_point(y);
  TorusPoint px = grid.node_point(x);
  Vec base = displacement(py, px);

  std::vector<Curve> candidates;
  // Straight lines per winding class |w| <= restarts.
  int span = 2 * restarts + 1;
  int count = d == 1 ? span : span * span;
  for (int flat = 0; flat < count; ++flat) {
    Vec disp = base;
    int rest = flat;
    for (int i = 0; i < d; ++i) {
      disp[i] += rest % span - restarts;
      rest /= span;
    }
    std::vector<Vec> lifted(static_cast<std::size_t>(steps) + 1, Vec(d));
    for (int j = 0; j <= steps; ++j)
      lifted[static_cast<std::size_t>(j)] =
          py.coords() + disp * (static_cast<double>(j) / steps);
    candidates.push_back(make_curve(std::move(lifted), s, dt, model, omega));
  }
  candidates.push_back(dp_minimizer(y, x, s, t, omega, model, grid, n_t, v_cap, threads));

  std::vector<Curve> refined;
  double best = kInf;
  for (const Curve& c : candidates) {
    RefineResult r = refine_minimizer(c, omega, model, 20000, 1e-9);
    best = std::min(best, r.curve.action);
    refined.push_back(std::move(r.curve));
  }

  double accept = best + 1e-6 * (1.0 + std::abs(best));
  std::vector<Vec> momenta;
  for (const Curve& c : refined) {
    if (c.action > accept) continue;
    bool dup = false;
    for (const Vec& p : momenta)
      if ((p - c.p_end).norm_inf() <= dedup_tol) {
        dup = true;
        break;
      }
    if (!dup) momenta.push_back(c.p_end);
  }
  std::sort(momenta.begin(), momenta.end(), [](const Vec& a, const Vec& b) {
    for (int i = 0; i < a.dim(); ++i) {
      if (a[i] != b[i]) return a[i] < b[i];
    }
    return false;
  });
  return momenta;
}

}  // namespace wkam
