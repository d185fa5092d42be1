#pragma once

#include <optional>

#include "wkam/action.hpp"

namespace wkam {

enum class Direction { backward, forward };

/// Notation bounds: f = sup |L(x, 0, t)|, c = sup |L| over |v| <= diam(T^d),
/// both sampled on the grid over one period.
struct BoundConstants {
  double f_omega = 0.0;
  double c_omega = 0.0;
};

BoundConstants compute_bounds(const OmegaPoint& omega, const LagrangianModel& model,
                              const SpaceGrid& grid, int n_t);

/// T_lambda u0 at the output time `t` (slice values over the grid): composes
/// lambda/dt relaxation steps and adds the dt * alpha correction per step.
/// The forward direction realizes the time-reversed operator through the
/// kernel A(t, x; t + lambda, y).
std::vector<double> lax_oleinik(const std::vector<double>& u0, double lambda, double t,
                                const OmegaPoint& omega, const LagrangianModel& model,
                                double alpha, Direction direction, const SpaceGrid& grid, int n_t,
                                double v_cap, int threads = 1);

struct WeakKamParams {
  int n_burn = 16;
  int n_max = 128;
  double v_cap = 4.0;
  int threads = 1;
};

/// The liminf weak KAM surrogate: cyclic sweeps of the corrected one-step
/// operator over one stored period, with a pointwise running minimum over
/// sweeps n in [n_burn, n_max]. Anchored to 0 at (node 0, t = 0).
struct WeakKamSolution {
  GridField u;            // running-min field (the reported solution)
  GridField final_field;  // last executed sweep, same anchor
  Direction direction = Direction::backward;
  double alpha = 0.0;
  int n_burn = 0, n_max = 0;
  std::vector<double> trace;  // sup |runmin_n - runmin_{n-1}| per folded sweep
  std::vector<std::uint16_t> argmin;  // [slice][node], candidate of the final sweep
  StepOffsets offsets;
  double v_cap = 0.0;
  double final_sweep_delta = 0.0;
  bool exactly_converged = false;

  double dt() const { return u.dt(); }
  /// Incoming characteristic velocity of the final sweep at (slice, node).
  Vec incoming_velocity(int slice, int node) const {
    return offsets.velocities[argmin[static_cast<std::size_t>(slice) *
                                         static_cast<std::size_t>(u.grid.num_nodes()) +
                                     static_cast<std::size_t>(node)]];
  }
};

/// Throws DiagnosticError naming alpha when the corrected iterates leave the
/// boundedness band (wrong critical value).
WeakKamSolution weak_kam_solve(const OmegaPoint& omega, const LagrangianModel& model, double alpha,
                               const std::vector<double>& u0, const SpaceGrid& grid, int n_t,
                               const WeakKamParams& params,
                               Direction direction = Direction::backward);

struct ViscosityReport {
  double subsolution_defect = 0.0;   // sup of max(residual, 0)
  double residual_sup = 0.0;         // sup |residual|
  double calibration_max = 0.0;      // supersolution side, along backward curves
  double calibration_mean = 0.0;
  int n_x = 0, n_t = 0;
  std::optional<double> refinement_ratio;  // coarse/fine, filled by the caller
};

/// Upwind Hamilton-Jacobi residual r = du/dt + H(x, du/dx, t) - alpha on a
/// converged backward solution: centered time difference, one-sided space
/// difference against the incoming characteristic direction. The
/// supersolution side is verified as the calibration defect along the final
/// sweep's argmin chains (one full period).
ViscosityReport viscosity_check(const WeakKamSolution& sol, const OmegaPoint& omega,
                                const LagrangianModel& model, double alpha,
                                double convergence_threshold = 0.05);

struct CalibrationReport {
  double max_equality_defect = 0.0;
  double max_domination_violation = 0.0;  // positive part of u(x,t)-u(y,t-s)-K-s*alpha
  int slices_checked = 0;
};

/// Fixed-point identity u(., t) = T_s u(., t - s) checked through
/// a freshly computed kernel on `sample_slices` evenly spaced t-slices.
CalibrationReport calibration_check(const WeakKamSolution& sol, const OmegaPoint& omega,
                                    const LagrangianModel& model, double alpha, int sample_slices,
                                    double s, int threads = 1);

/// Max over lambda pairs and nodes of |T_l1 u0 - T_l2 u0| / (|l1-l2| (f+|alpha|)).
/// Pairs with l1 == l2 are skipped; a zero Lipschitz rate requires exactly
/// equal slices and reports 0.
double lipschitz_in_lambda_check(const std::vector<double>& u0, const OmegaPoint& omega,
                                 const LagrangianModel& model, double alpha,
                                 const std::vector<double>& lambdas, const SpaceGrid& grid,
                                 int n_t, double v_cap, int threads = 1);

struct EquivarianceReport {
  double shift_defect = 0.0;
  double periodicity_defect = 0.0;  // 0 by single-period storage
};

/// Solves at omega and theta(s, omega) and compares u^{theta(s)w}(x, t) with
/// u^w(x, t+s), modulo the additive gauge.
EquivarianceReport equivariance_check(const SkewProductSystem& sys, const OmegaPoint& omega,
                                      double s, const LagrangianModel& model, double alpha,
                                      const std::vector<double>& u0, const SpaceGrid& grid,
                                      int n_t, const WeakKamParams& params);

}  // namespace wkam
