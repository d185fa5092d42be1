#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wkam/lagrangian.hpp"
#include "wkam/torus.hpp"

namespace wkam {

enum class StepDirection { backward, forward };

/// Candidate one-step displacements of the DP scheme: integer node steps k
/// with |k * spacing| <= v_cap * dt (Euclidean), in ascending lexicographic
/// order. The zero step is always present.
struct StepOffsets {
  int dim = 1;
  std::vector<std::array<int, kMaxDim>> steps;
  std::vector<Vec> velocities;  // step * spacing / dt
  int reach = 0;                // max |k_i|
};

/// Throws ConfigError when v_cap * dt covers less than one grid cell.
StepOffsets make_step_offsets(const SpaceGrid& grid, double dt, double v_cap);

/// Space-time grid function u(x, t_k), t_k = t0 + k dt, one time period per
/// field (dt = 1 / n_t).
struct GridField {
  SpaceGrid grid;
  double t0 = 0.0;
  int n_t = 1;
  std::vector<double> values;  // slice-major: values[k * num_nodes + node]

  GridField(SpaceGrid g, double t0_, int n_t_)
      : grid(g), t0(t0_), n_t(n_t_),
        values(static_cast<std::size_t>(n_t_) * static_cast<std::size_t>(g.num_nodes()), 0.0) {}

  double dt() const { return 1.0 / n_t; }
  double time_of(int k) const { return t0 + static_cast<double>(k) / n_t; }
  double at(int k, int node) const {
    return values[static_cast<std::size_t>(k) * static_cast<std::size_t>(grid.num_nodes()) +
                  static_cast<std::size_t>(node)];
  }
  double& at(int k, int node) {
    return values[static_cast<std::size_t>(k) * static_cast<std::size_t>(grid.num_nodes()) +
                  static_cast<std::size_t>(node)];
  }
  /// Slice index of a (mod-1) grid-aligned time; throws InvalidInputError if
  /// t is not aligned.
  int slice_of_time(double t) const;
};

/// Per-candidate step costs dt * L(node, velocity, t) for one time step.
std::vector<double> build_step_costs(const SpaceGrid& grid, const StepOffsets& offsets, double dt,
                                     double t, const OmegaPoint& omega,
                                     const LagrangianModel& model);

/// One discrete Lax-Oleinik relaxation step (no alpha correction).
///
///  backward: out(x) = min_y { u(y) + dt L(y, lift(x-y)/dt, t_k) }, the
///            output living at t_k + dt;
///  forward:  out(x) = min_y { u(y) + dt L(x, lift(y-x)/dt, t_k - dt) }, the
///            output living at t_k - dt.
///
/// Ties are broken toward the smallest source node index, then the smallest
/// step vector. If `argmin` is non-null it receives the chosen candidate
/// index per output node.
std::vector<double> lax_step(const std::vector<double>& u, const SpaceGrid& grid, double dt,
                             double t_k, const OmegaPoint& omega, const LagrangianModel& model,
                             double v_cap, StepDirection direction, int threads = 1,
                             std::vector<std::uint16_t>* argmin = nullptr);

/// A sampled trajectory with winding bookkeeping. `lifted` are unwrapped
/// coordinates; velocities are lifted differences over dt; the endpoint
/// momenta are dL/dv at the first and last segment.
struct Curve {
  double t_start = 0.0;
  double dt = 0.0;
  std::vector<TorusPoint> points;
  std::vector<Vec> lifted;
  std::vector<Vec> velocities;
  double action = 0.0;
  Vec p_start, p_end;

  int segments() const { return static_cast<int>(velocities.size()); }
  double t_end() const { return t_start + dt * segments(); }
  bool closed(double tol = 1e-9) const;
};

double discrete_action(const std::vector<Vec>& lifted, double t_start, double dt,
                       const LagrangianModel& model, const OmegaPoint& omega);

Curve make_curve(std::vector<Vec> lifted, double t_start, double dt,
                 const LagrangianModel& model, const OmegaPoint& omega);

/// Two-point minimal discrete action A(s, y; t, x) over all grid paths, for
/// every source node y and destination node x.
class ActionKernel {
 public:
  static ActionKernel compute(double s, double t, const OmegaPoint& omega,
                              const LagrangianModel& model, const SpaceGrid& grid, int n_t,
                              double v_cap, bool with_backpointers = true, int threads = 1);

  double s_time() const { return s_; }
  double t_time() const { return t_; }
  int steps() const { return steps_; }
  const SpaceGrid& grid() const { return grid_; }
  const StepOffsets& offsets() const { return offsets_; }

  double value(int y, int x) const {
    return values_[static_cast<std::size_t>(y) * static_cast<std::size_t>(grid_.num_nodes()) +
                   static_cast<std::size_t>(x)];
  }
  bool has_backpointers() const { return !backptr_.empty(); }

  /// Backtrack the argmin path from y to x into a Curve.
  Curve extract_minimizer(int y, int x, const LagrangianModel& model,
                          const OmegaPoint& omega) const;

 private:
  ActionKernel() : grid_(1, 1) {}
  double s_ = 0.0, t_ = 0.0;
  int steps_ = 0;
  SpaceGrid grid_;
  StepOffsets offsets_;
  std::vector<double> values_;          // [y][x]
  std::vector<std::uint16_t> backptr_;  // [step][y][x]
};

/// Minimal action from (node, tau) to the fixed target (target_node, t_target)
/// for every node and every grid time tau in [t_target - steps*dt, t_target].
struct ReverseActionField {
  SpaceGrid grid{1, 1};
  double t_target = 0.0;
  int n_t = 1;
  int steps = 0;
  std::vector<double> values;  // [slice][node], slice 0 = earliest time

  double time_of(int slice) const {
    return t_target - static_cast<double>(steps - slice) / n_t;
  }
  double at(int slice, int node) const {
    return values[static_cast<std::size_t>(slice) * static_cast<std::size_t>(grid.num_nodes()) +
                  static_cast<std::size_t>(node)];
  }
};

ReverseActionField reverse_action(int target_node, double t_target, int steps,
                                  const OmegaPoint& omega, const LagrangianModel& model,
                                  const SpaceGrid& grid, int n_t, double v_cap, int threads = 1);

struct RefineResult {
  Curve curve;
  bool converged = false;
  bool line_search_failed = false;
  int iterations = 0;
  double el_residual = 0.0;
  std::vector<double> action_trace;
};

/// Descends the discrete action over the interior lifted nodes (endpoints
/// fixed) with backtracking line search until the discrete Euler-Lagrange
/// residual drops below tol. The action never increases across iterations.
RefineResult refine_minimizer(const Curve& curve, const OmegaPoint& omega,
                              const LagrangianModel& model, int max_iters, double tol);

/// Max over nodes of the centered second difference (u(x+h)+u(x-h)-2u(x))/h^2
/// with h = h_nodes grid cells, over each axis. cyclic=false skips probe
/// pairs that cross the index boundary (for synthetic non-periodic slices).
double semiconcavity_constant(const std::vector<double>& slice, const SpaceGrid& grid,
                              int h_nodes = 1, bool cyclic = true);

/// Median of |centered second difference| over all nodes (kink detection
/// baseline).
double median_abs_second_difference(const std::vector<double>& slice, const SpaceGrid& grid,
                                    int h_nodes = 1);

/// A node is a kink when its centered second difference is more negative
/// than -factor * median_abs_second_difference.
bool is_kink_node(const std::vector<double>& slice, const SpaceGrid& grid, int node,
                  int h_nodes = 1, double factor = 10.0);

/// Endpoint momenta of the distinct action minimizers from (s, y) to (t, x),
/// found by refining winding-diverse straight lines plus the DP backtrack.
/// Deduplicated at `dedup_tol` in the sup norm; sorted by first component.
std::vector<Vec> superdifferential_momenta(double s, int y, double t, int x,
                                           const OmegaPoint& omega, const LagrangianModel& model,
                                           const SpaceGrid& grid, int n_t, double v_cap,
                                           int restarts = 1, double dedup_tol = 1e-4,
                                           int threads = 1);

}  // namespace wkam
