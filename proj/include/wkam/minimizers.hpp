#pragma once

#include "wkam/weak_kam.hpp"

namespace wkam {

/// The differentiability gate failed: the solution has a semiconcave kink
/// at the requested launch point.
struct NondifferentiablePointError : DiagnosticError {
  using DiagnosticError::DiagnosticError;
};

/// Argmin set of u(., t0) + u_plus(., t0) within tol of the minimum.
struct BSet {
  int slice = 0;
  double t0 = 0.0;
  std::vector<int> nodes;
  double min_value = 0.0;
  double tol = 0.0;

  bool contains(int node) const {
    for (int n : nodes)
      if (n == node) return true;
    return false;
  }
};

BSet b_set(const WeakKamSolution& u, const WeakKamSolution& u_plus, double t0, double tol);

/// Integrated Euler-Lagrange trajectory (lifted coordinates) with its launch
/// data; sampled every dt_int over [t0 - horizon, t0 + horizon].
struct MinimizerOrbit {
  double t0 = 0.0;
  double dt_int = 0.0;
  std::vector<double> times;
  std::vector<Vec> lifted;
  std::vector<Vec> vel;  // integrator state velocities
  Vec x0, v0;            // launch data (lifted position, velocity)

  int index_of_time(double t, double tol = 1e-9) const;
  /// Left-endpoint discrete action along the orbit samples in [a, b].
  double action_on(double a, double b, const LagrangianModel& model,
                   const OmegaPoint& omega) const;
};

/// Classical 4th-order one-step integration of the EL dynamics from
/// (x0, v0, t0) to t1 with step dt (dt < 0 integrates backwards).
std::vector<std::pair<Vec, Vec>> integrate_el(const LagrangianModel& model,
                                              const OmegaPoint& omega, const Vec& x0,
                                              const Vec& v0, double t0, double t1, double dt);

/// Launch the global-minimizer candidate from a B-set node: velocity
/// dH/dp(x0, du(x0, t0), t0), then EL integration both ways over the horizon.
/// Throws NondifferentiablePointError when centered and one-sided gradients
/// of u disagree by more than 10 dx at x0.
MinimizerOrbit launch_minimizer(int x0_node, double t0, const WeakKamSolution& u,
                                const WeakKamSolution& u_plus, const BSet& bset,
                                const OmegaPoint& omega, const LagrangianModel& model,
                                double horizon, double dt_int);

/// Max over windows [s, t] of (orbit action on [s, t]) - A(s, x(s); t, x(t)),
/// with orbit endpoints snapped to the nearest grid nodes.
double verify_global_minimizer(const MinimizerOrbit& orbit, const OmegaPoint& omega,
                               const LagrangianModel& model,
                               const std::vector<std::array<double, 2>>& windows,
                               const SpaceGrid& grid, int n_t, double v_cap, int threads = 1);

struct OrbitCalibration {
  double backward_defect = 0.0;  // against u on windows with t <= t0
  double forward_defect = 0.0;   // against u_plus on windows with s >= t0
};

OrbitCalibration calibration_of_orbit(const MinimizerOrbit& orbit, const WeakKamSolution& u,
                                      const WeakKamSolution& u_plus, const OmegaPoint& omega,
                                      const LagrangianModel& model, double alpha,
                                      const std::vector<std::array<double, 2>>& windows);

/// Multilinear interpolation of a field slice at a (grid-aligned) time.
double interp_field(const GridField& field, double t, const TorusPoint& x);

struct ThetaFlowParams {
  double t0 = 0.0;
  double bset_tol = 0.02;
  double horizon = 2.0;
  int dt_substeps = 4;  // dt_int = dt / substeps
};

/// Launches the corresponding minimizer at theta(s, omega) from the shifted
/// B-set and returns max over the overlap of
/// distance(gamma'(t), gamma(t+s)) + |velocity difference|.
double theta_flow_check(const SkewProductSystem& sys, const OmegaPoint& omega, double s,
                        const LagrangianModel& model, double alpha,
                        const std::vector<double>& u0, const SpaceGrid& grid, int n_t,
                        const WeakKamParams& solver, const ThetaFlowParams& flow);

}  // namespace wkam
