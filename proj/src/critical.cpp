#include "wkam/critical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace wkam {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 6.283185307179586476925286766559;

// Winding-tracking DP state for loops. The state is the lifted node
// displacement r relative to the start node, clamped to |r_i| <= reach.
struct WindingDp {
  int dim;
  int n;        // nodes per axis
  int reach;    // max |r_i| in node units
  int side;     // 2*reach + 1
  int n_states;

  WindingDp(const SpaceGrid& grid, int w_max)
      : dim(grid.dim()), n(grid.n_per_dim()), reach((w_max + 1) * grid.n_per_dim()),
        side(2 * reach + 1) {
    n_states = side;
    if (dim == 2) n_states *= side;
  }

  int state_of(int r0, int r1) const {
    int s = r0 + reach;
    if (dim == 2) s += (r1 + reach) * side;
    return s;
  }
};

}  // namespace

CriticalValueEstimate alpha_closed_curves(const OmegaPoint& omega, const LagrangianModel& model,
                                          const SpaceGrid& grid, int n_t, double v_cap,
                                          int n_max, int w_max, int threads) {
  if (n_max < 1) throw InvalidInputError("alpha_closed_curves: n_max must be >= 1");
  if (w_max < 0) throw InvalidInputError("alpha_closed_curves: w_max must be >= 0");
  const double dt = 1.0 / n_t;
  const StepOffsets off = make_step_offsets(grid, dt, v_cap);
  const WindingDp wdp(grid, w_max);
  const int n_nodes = grid.num_nodes();
  const std::size_t st = static_cast<std::size_t>(wdp.n_states);

  // val[y * n_states + state]
  std::vector<double> cur(static_cast<std::size_t>(n_nodes) * st, kInf);
  std::vector<double> nxt(cur.size());
  for (int y = 0; y < n_nodes; ++y)
    cur[static_cast<std::size_t>(y) * st + static_cast<std::size_t>(wdp.state_of(0, 0))] = 0.0;

  CriticalValueEstimate est;
  est.method = "closed-curves";
  est.horizon = n_max;
  est.value = -kInf;

  const int span = 2 * w_max + 1;
  const int w_count = grid.dim() == 1 ? span : span * span;

  for (int period = 1; period <= n_max; ++period) {
    for (int j = 0; j < n_t; ++j) {
      double tau = (period - 1) + dt * j;
      std::vector<double> cost = build_step_costs(grid, off, dt, tau, omega, model);
      parallel_for(static_cast<std::size_t>(n_nodes), threads, [&](std::size_t yb, std::size_t ye) {
        for (std::size_t y = yb; y < ye; ++y) {
          const double* in = cur.data() + y * st;
          double* out = nxt.data() + y * st;
          std::fill(out, out + st, kInf);
          if (grid.dim() == 1) {
            for (std::size_t c = 0; c < off.steps.size(); ++c) {
              const int k = off.steps[c][0];
              const double* ck = cost.data() + c * static_cast<std::size_t>(n_nodes);
              int lo = std::max(-wdp.reach, -wdp.reach + k);
              int hi = std::min(wdp.reach, wdp.reach + k);
              if (lo > hi) continue;
              // Source node of the step at state r' is (y + r' - k) mod n.
              int src = static_cast<int>((static_cast<long long>(y) + lo - k) %
                                         static_cast<long long>(wdp.n));
              if (src < 0) src += wdp.n;
              const double* inp = in + (lo - k + wdp.reach);
              double* outp = out + (lo + wdp.reach);
              int len = hi - lo + 1;
              for (int i = 0; i < len; ++i) {
                double cand = inp[i] + ck[src];
                if (cand < outp[i]) outp[i] = cand;
                if (++src == wdp.n) src = 0;
              }
            }
          } else {
            for (std::size_t c = 0; c < off.steps.size(); ++c) {
              const int k0 = off.steps[c][0], k1 = off.steps[c][1];
              const double* ck = cost.data() + c * static_cast<std::size_t>(n_nodes);
              auto ymi = grid.node_multi_index(static_cast<int>(y));
              for (int r1 = -wdp.reach; r1 <= wdp.reach; ++r1) {
                int p1 = r1 - k1;
                if (p1 < -wdp.reach || p1 > wdp.reach) continue;
                for (int r0 = -wdp.reach; r0 <= wdp.reach; ++r0) {
                  int p0 = r0 - k0;
                  if (p0 < -wdp.reach || p0 > wdp.reach) continue;
                  double prev = in[wdp.state_of(p0, p1)];
                  if (!std::isfinite(prev)) continue;
                  int s0 = (ymi[0] + p0) % wdp.n;
                  if (s0 < 0) s0 += wdp.n;
                  int s1 = (ymi[1] + p1) % wdp.n;
                  if (s1 < 0) s1 += wdp.n;
                  double cand = prev + ck[s0 + s1 * wdp.n];
                  double& slot = out[wdp.state_of(r0, r1)];
                  if (cand < slot) slot = cand;
                }
              }
            }
          }
        }
      });
      cur.swap(nxt);
    }

    // Loop closes when the lifted displacement is an exact winding vector.
    double best_for_n = -kInf;
    for (int y = 0; y < n_nodes; ++y) {
      for (int wflat = 0; wflat < w_count; ++wflat) {
        int w0 = wflat % span - w_max;
        int w1 = grid.dim() == 2 ? wflat / span - w_max : 0;
        double k_loop =
            cur[static_cast<std::size_t>(y) * st +
                static_cast<std::size_t>(wdp.state_of(w0 * wdp.n, w1 * wdp.n))];
        if (!std::isfinite(k_loop)) continue;
        double cand = -k_loop / period;
        if (cand > best_for_n) best_for_n = cand;
        if (cand > est.value) {
          est.value = cand;
          est.best_base_node = y;
          est.best_period = period;
          est.best_winding = {w0, w1};
        }
      }
    }
    est.trace.push_back(best_for_n);
  }
  return est;
}

CriticalValueEstimate alpha_subadditive(const OmegaPoint& omega, const LagrangianModel& model,
                                        const SpaceGrid& grid, int n_t, double v_cap,
                                        int n_iters, int threads) {
  if (n_iters < 8) throw InvalidInputError("alpha_subadditive: need n_iters >= 8");
  const double dt = 1.0 / n_t;
  const int n_nodes = grid.num_nodes();

  // Uncorrected T_n(0) at the t = 0 slice; one cyclic Gauss-Seidel sweep per
  // period so the slice sees exactly n periods of history after n sweeps.
  std::vector<std::vector<double>> field(
      static_cast<std::size_t>(n_t), std::vector<double>(static_cast<std::size_t>(n_nodes), 0.0));

  CriticalValueEstimate est;
  est.method = "subadditive";
  est.horizon = n_iters;

  double divergence_guard = 0.0;
  for (int iter = 1; iter <= n_iters; ++iter) {
    for (int step = 1; step <= n_t; ++step) {
      int target = step % n_t;
      int source = step - 1;
      double t_src = dt * source;
      field[static_cast<std::size_t>(target)] =
          lax_step(field[static_cast<std::size_t>(source)], grid, dt, t_src, omega, model, v_cap,
                   StepDirection::backward, threads);
    }
    auto [mn_it, mx_it] = std::minmax_element(field[0].begin(), field[0].end());
    est.m_trace.push_back(*mn_it);
    est.M_trace.push_back(*mx_it);
    est.sandwich_width = std::max(est.sandwich_width, *mx_it - *mn_it);
    if (iter == 1) divergence_guard = 10.0 * (est.sandwich_width + 1.0);
    if (*mx_it - *mn_it > divergence_guard) {
      std::ostringstream msg;
      msg << "alpha_subadditive: M_n - m_n = " << (*mx_it - *mn_it)
          << " exceeded 10x the initial bound " << divergence_guard / 10.0 << " at n = " << iter;
      throw DiagnosticError(msg.str());
    }
    int k = iter / 2;
    if (k >= 1) {
      double m2k = est.M_trace[static_cast<std::size_t>(iter) - 1];
      double mk = est.M_trace[static_cast<std::size_t>(k) - 1];
      est.trace.push_back(-(m2k - mk) / (iter - k));
    } else {
      est.trace.push_back(-est.M_trace[0]);
    }
  }
  est.value = est.trace.back();
  return est;
}

Curve extract_closed_minimizer(const OmegaPoint& omega, const LagrangianModel& model,
                               const SpaceGrid& grid, int n_t, double v_cap, int base_node,
                               int period, std::array<int, kMaxDim> winding, int w_max,
                               int threads) {
  const double dt = 1.0 / n_t;
  const StepOffsets off = make_step_offsets(grid, dt, v_cap);
  const WindingDp wdp(grid, w_max);
  const std::size_t st = static_cast<std::size_t>(wdp.n_states);
  const int steps = period * n_t;
  const int n_nodes = grid.num_nodes();

  std::vector<double> cur(st, kInf), nxt(st);
  cur[static_cast<std::size_t>(wdp.state_of(0, 0))] = 0.0;
  std::vector<std::uint16_t> bp(static_cast<std::size_t>(steps) * st, 0);

  auto ymi = grid.node_multi_index(base_node);
  for (int j = 0; j < steps; ++j) {
    std::vector<double> cost = build_step_costs(grid, off, dt, dt * j, omega, model);
    std::fill(nxt.begin(), nxt.end(), kInf);
    std::uint16_t* arg = bp.data() + static_cast<std::size_t>(j) * st;
    for (std::size_t c = 0; c < off.steps.size(); ++c) {
      const int k0 = off.steps[c][0];
      const int k1 = grid.dim() == 2 ? off.steps[c][1] : 0;
      const double* ck = cost.data() + c * static_cast<std::size_t>(n_nodes);
      for (int r1 = grid.dim() == 2 ? -wdp.reach : 0; r1 <= (grid.dim() == 2 ? wdp.reach : 0);
           ++r1) {
        int p1 = r1 - k1;
        if (grid.dim() == 2 && (p1 < -wdp.reach || p1 > wdp.reach)) continue;
        for (int r0 = -wdp.reach; r0 <= wdp.reach; ++r0) {
          int p0 = r0 - k0;
          if (p0 < -wdp.reach || p0 > wdp.reach) continue;
          double prev = cur[static_cast<std::size_t>(wdp.state_of(p0, grid.dim() == 2 ? p1 : 0))];
          if (!std::isfinite(prev)) continue;
          int s0 = (ymi[0] + p0) % wdp.n;
          if (s0 < 0) s0 += wdp.n;
          int s1 = grid.dim() == 2 ? (ymi[1] + p1) % wdp.n : 0;
          if (s1 < 0) s1 += wdp.n;
          double cand = prev + ck[s0 + (grid.dim() == 2 ? s1 * wdp.n : 0)];
          int state = wdp.state_of(r0, grid.dim() == 2 ? r1 : 0);
          if (cand < nxt[static_cast<std::size_t>(state)]) {
            nxt[static_cast<std::size_t>(state)] = cand;
            arg[state] = static_cast<std::uint16_t>(c);
          }
        }
      }
    }
    cur.swap(nxt);
  }
  (void)threads;

  int r0 = winding[0] * wdp.n;
  int r1 = grid.dim() == 2 ? winding[1] * wdp.n : 0;
  if (!std::isfinite(cur[static_cast<std::size_t>(wdp.state_of(r0, r1))]))
    throw InvalidInputError("extract_closed_minimizer: loop class not reachable");

  std::vector<std::array<int, kMaxDim>> taken(static_cast<std::size_t>(steps));
  for (int j = steps - 1; j >= 0; --j) {
    int state = wdp.state_of(r0, r1);
    std::uint16_t c = bp[static_cast<std::size_t>(j) * st + static_cast<std::size_t>(state)];
    taken[static_cast<std::size_t>(j)] = off.steps[c];
    r0 -= off.steps[c][0];
    if (grid.dim() == 2) r1 -= off.steps[c][1];
  }
  if (r0 != 0 || r1 != 0)
    throw InternalError("extract_closed_minimizer: backtrack did not close");

  std::vector<Vec> lifted(static_cast<std::size_t>(steps) + 1, Vec(grid.dim()));
  lifted[0] = grid.node_point(base_node).coords();
  for (int j = 0; j < steps; ++j) {
    Vec z = lifted[static_cast<std::size_t>(j)];
    for (int i = 0; i < grid.dim(); ++i)
      z[i] += taken[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] * grid.spacing();
    lifted[static_cast<std::size_t>(j) + 1] = z;
  }
  return make_curve(std::move(lifted), 0.0, dt, model, omega);
}

EnsembleResult alpha_ensemble(const SkewProductSystem& sys, const LagrangianModel& model,
                              const std::vector<std::uint64_t>& omega_seeds,
                              const std::string& method, const SpaceGrid& grid, int n_t,
                              double v_cap, int n_max, int w_max, int n_iters, int threads) {
  if (omega_seeds.empty()) throw InvalidInputError("alpha_ensemble: need at least one seed");
  EnsembleResult res;
  for (std::uint64_t seed : omega_seeds) {
    OmegaPoint w = sample_omega(sys, seed);
    double value;
    if (method == "subadditive") {
      value = alpha_subadditive(w, model, grid, n_t, v_cap, n_iters, threads).value;
    } else if (method == "closed-curves" || method == "closed") {
      value = alpha_closed_curves(w, model, grid, n_t, v_cap, n_max, w_max, threads).value;
    } else {
      throw InvalidInputError("alpha_ensemble: unknown method '" + method + "'");
    }
    res.estimates.emplace_back(seed, value);
  }
  double lo = kInf, hi = -kInf, sum = 0.0;
  for (const auto& [seed, v] : res.estimates) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  res.spread = hi - lo;
  double mean = sum / static_cast<double>(res.estimates.size());
  double var = 0.0;
  for (const auto& [seed, v] : res.estimates) var += (v - mean) * (v - mean);
  res.stddev = std::sqrt(var / static_cast<double>(res.estimates.size()));
  return res;
}

BarrierField peierls_barrier(int base_node, double base_time, const OmegaPoint& omega,
                             const LagrangianModel& model, double alpha,
                             std::array<int, 2> n_window, const SpaceGrid& grid, int n_t,
                             double v_cap, int threads) {
  if (n_window[0] < 1 || n_window[1] < n_window[0])
    throw InvalidInputError("peierls_barrier: need 1 <= n_lo <= n_hi");
  if (std::abs(std::round(base_time * n_t) / n_t - base_time) > 1e-9)
    throw InvalidInputError("peierls_barrier: base time must sit on the grid");
  BarrierField field;
  field.base_node = base_node;
  field.base_time = base_time;
  field.grid = grid;
  field.n_t = n_t;
  field.n_lo = n_window[0];
  field.n_hi = n_window[1];
  const int n_nodes = grid.num_nodes();
  field.values.assign(static_cast<std::size_t>(n_t) * static_cast<std::size_t>(n_nodes), kInf);

  for (int n = n_window[0]; n <= n_window[1]; ++n) {
    double t_target = base_time + n;
    int steps = static_cast<int>(std::round(t_target * n_t));
    ReverseActionField rev =
        reverse_action(base_node, t_target, steps, omega, model, grid, n_t, v_cap, threads);
    for (int j = 0; j < n_t; ++j) {
      for (int x = 0; x < n_nodes; ++x) {
        double h_n = rev.at(j, x) + n * alpha;
        double& slot = field.values[static_cast<std::size_t>(j) * static_cast<std::size_t>(n_nodes) +
                                    static_cast<std::size_t>(x)];
        slot = std::min(slot, h_n);
      }
    }
  }
  return field;
}

namespace {

// cur <- cur (min-plus) P, both [n x n] row-major.
void minplus_matmul(std::vector<double>& cur, const std::vector<double>& P, int n, int threads) {
  std::vector<double> out(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), kInf);
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t rb, std::size_t re) {
    for (std::size_t r = rb; r < re; ++r) {
      const double* crow = cur.data() + r * static_cast<std::size_t>(n);
      double* orow = out.data() + r * static_cast<std::size_t>(n);
      for (int z = 0; z < n; ++z) {
        double base = crow[z];
        if (!std::isfinite(base)) continue;
        const double* prow = P.data() + static_cast<std::size_t>(z) * static_cast<std::size_t>(n);
        for (int x = 0; x < n; ++x) {
          double cand = base + prow[x];
          if (cand < orow[x]) orow[x] = cand;
        }
      }
    }
  });
  cur.swap(out);
}

}  // namespace

GridField peierls_diagonal(const OmegaPoint& omega, const LagrangianModel& model, double alpha,
                           std::array<int, 2> n_window, const SpaceGrid& grid, int n_t,
                           double v_cap, int threads) {
  if (n_window[0] < 1 || n_window[1] < n_window[0])
    throw InvalidInputError("peierls_diagonal: need 1 <= n_lo <= n_hi");
  const int n_nodes = grid.num_nodes();
  GridField diag(grid, 0.0, n_t);
  std::fill(diag.values.begin(), diag.values.end(), kInf);

  for (int j = 0; j < n_t; ++j) {
    double t0 = static_cast<double>(j) / n_t;
    ActionKernel P = ActionKernel::compute(t0, t0 + 1.0, omega, model, grid, n_t, v_cap,
                                           /*with_backpointers=*/false, threads);
    std::vector<double> cur(static_cast<std::size_t>(n_nodes) * static_cast<std::size_t>(n_nodes));
    for (int y = 0; y < n_nodes; ++y)
      for (int x = 0; x < n_nodes; ++x)
        cur[static_cast<std::size_t>(y) * static_cast<std::size_t>(n_nodes) +
            static_cast<std::size_t>(x)] = P.value(y, x);

    // cur holds A(t0, y; t0 + n, x); by time-periodicity composing with P
    // extends the horizon one period at a time.
    std::vector<double> Pmat = cur;
    for (int n = 1; n <= n_window[1]; ++n) {
      if (n > 1) minplus_matmul(cur, Pmat, n_nodes, threads);
      if (n >= n_window[0]) {
        for (int x = 0; x < n_nodes; ++x) {
          double h_n = cur[static_cast<std::size_t>(x) * static_cast<std::size_t>(n_nodes) +
                           static_cast<std::size_t>(x)] +
                       n * alpha;
          double& slot = diag.at(j, x);
          slot = std::min(slot, h_n);
        }
      }
    }
  }
  return diag;
}

std::vector<std::array<int, 2>> aubry_detect(const GridField& diagonal, double tol) {
  std::vector<std::array<int, 2>> nodes;
  for (int j = 0; j < diagonal.n_t; ++j)
    for (int x = 0; x < diagonal.grid.num_nodes(); ++x)
      if (diagonal.at(j, x) <= tol) nodes.push_back({j, x});
  return nodes;
}

std::vector<SpaceTimeHarmonic> default_test_functions(int dim) {
  std::vector<SpaceTimeHarmonic> fns;
  std::vector<std::array<int, 2>> modes;
  if (dim == 1)
    modes = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
  else
    modes = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};  // kx = (k, 0) in 2-d
  for (const auto& m : modes) {
    for (bool s : {false, true}) {
      SpaceTimeHarmonic f;
      f.kx = {m[0], 0};
      f.kt = m[1];
      f.use_sin = s;
      fns.push_back(f);
    }
  }
  return fns;
}

double closed_measure_defect(const Curve& curve, const std::vector<SpaceTimeHarmonic>& fns) {
  if (!curve.closed(1e-9))
    throw InvalidInputError("closed_measure_defect: curve is not closed with integer period");
  double period = curve.dt * curve.segments();
  double worst = 0.0;
  for (const auto& f : fns) {
    double integral = 0.0;
    for (int j = 0; j < curve.segments(); ++j) {
      const TorusPoint& x = curve.points[static_cast<std::size_t>(j)];
      const Vec& v = curve.velocities[static_cast<std::size_t>(j)];
      double t = curve.t_start + curve.dt * j;
      double theta = f.kt * t;
      double kv = f.kt;  // df.(v,1) accumulates kx.v + kt
      for (int i = 0; i < x.dim(); ++i) {
        theta += f.kx[static_cast<std::size_t>(i)] * x[i];
        kv += f.kx[static_cast<std::size_t>(i)] * v[i];
      }
      double deriv = f.use_sin ? kTwoPi * std::cos(kTwoPi * theta) * kv
                               : -kTwoPi * std::sin(kTwoPi * theta) * kv;
      integral += curve.dt * deriv;
    }
    worst = std::max(worst, std::abs(integral / period));
  }
  return worst;
}

}  // namespace wkam
