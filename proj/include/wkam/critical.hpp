#pragma once

#include <array>
#include <optional>
#include <string>

#include "wkam/action.hpp"

namespace wkam {

struct CriticalValueEstimate {
  double value = 0.0;
  std::string method;         // "closed-curves" or "subadditive"
  int horizon = 0;            // n_max (periods) or n_iters
  std::vector<double> trace;  // per-n estimates
  // Subadditive diagnostics (empty for the closed-curves method).
  std::vector<double> M_trace, m_trace;
  double sandwich_width = 0.0;  // max over n of M_n - m_n
  std::optional<double> discrepancy;
  // Closed-curves argmin, for loop extraction.
  int best_base_node = 0;
  int best_period = 1;
  std::array<int, kMaxDim> best_winding{0, 0};
};

/// alpha = max over periods n <= n_max, windings |w_i| <= w_max and base
/// nodes y of -K_loop(y, n, w)/n, where K_loop is the minimal discrete action
/// over closed grid loops through y with winding w (DP in lifted
/// coordinates, loops anchored at time 0).
CriticalValueEstimate alpha_closed_curves(const OmegaPoint& omega, const LagrangianModel& model,
                                          const SpaceGrid& grid, int n_t, double v_cap,
                                          int n_max, int w_max, int threads = 1);

/// Iterates the uncorrected one-period Lax-Oleinik map on u == 0 and
/// extrapolates: alpha = -(M_{2k} - M_k)/k at the largest available k, with
/// M_n, m_n the extrema of the n-th iterate at the t = 0 slice.
CriticalValueEstimate alpha_subadditive(const OmegaPoint& omega, const LagrangianModel& model,
                                        const SpaceGrid& grid, int n_t, double v_cap,
                                        int n_iters, int threads = 1);

/// The discretely-minimal closed loop behind a closed-curves estimate.
Curve extract_closed_minimizer(const OmegaPoint& omega, const LagrangianModel& model,
                               const SpaceGrid& grid, int n_t, double v_cap, int base_node,
                               int period, std::array<int, kMaxDim> winding, int w_max,
                               int threads = 1);

struct EnsembleResult {
  std::vector<std::pair<std::uint64_t, double>> estimates;  // (seed, alpha)
  double spread = 0.0;  // max - min
  double stddev = 0.0;
};

EnsembleResult alpha_ensemble(const SkewProductSystem& sys, const LagrangianModel& model,
                              const std::vector<std::uint64_t>& omega_seeds,
                              const std::string& method, const SpaceGrid& grid, int n_t,
                              double v_cap, int n_max, int w_max, int n_iters, int threads = 1);

/// Windowed Peierls barrier with a fixed base (y, s):
/// h((x,t),(y,s)) = min over n in [n_lo, n_hi] of A(t, x; s + n, y) + n alpha.
struct BarrierField {
  int base_node = 0;
  double base_time = 0.0;
  SpaceGrid grid;
  int n_t = 1;
  int n_lo = 1, n_hi = 1;
  std::vector<double> values;  // [t slice][x node], t in [0, 1)

  BarrierField() : grid(1, 1) {}
  double at(int slice, int node) const {
    return values[static_cast<std::size_t>(slice) * static_cast<std::size_t>(grid.num_nodes()) +
                  static_cast<std::size_t>(node)];
  }
};

BarrierField peierls_barrier(int base_node, double base_time, const OmegaPoint& omega,
                             const LagrangianModel& model, double alpha,
                             std::array<int, 2> n_window, const SpaceGrid& grid, int n_t,
                             double v_cap, int threads = 1);

/// Diagonal barrier h((x,t),(x,t)) for every grid node, via per-slice
/// one-period kernels composed in min-plus.
GridField peierls_diagonal(const OmegaPoint& omega, const LagrangianModel& model, double alpha,
                           std::array<int, 2> n_window, const SpaceGrid& grid, int n_t,
                           double v_cap, int threads = 1);

/// Nodes (t slice, x node) whose diagonal barrier is <= tol.
std::vector<std::array<int, 2>> aubry_detect(const GridField& diagonal, double tol);

/// Space-time test function c(2 pi (kx . x + kt t)), c in {cos, sin}.
struct SpaceTimeHarmonic {
  std::array<int, kMaxDim> kx{0, 0};
  int kt = 0;
  bool use_sin = false;
};

/// The default 8-function battery used by the closed-measure checks.
std::vector<SpaceTimeHarmonic> default_test_functions(int dim);

/// max over test functions f of | integral of df(x,t).(v,1) d mu | where mu
/// is the occupation measure of the closed curve (uniform weight per
/// segment, normalized to a probability).
double closed_measure_defect(const Curve& curve, const std::vector<SpaceTimeHarmonic>& fns);

}  // namespace wkam
