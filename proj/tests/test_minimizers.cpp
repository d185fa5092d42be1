#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "wkam/critical.hpp"
#include "wkam/minimizers.hpp"

using namespace wkam;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

OmegaPoint iex_point(double x) {
  OmegaPoint w;
  w.kind = OmegaKind::interval_exchange;
  w.coords = {x};
  return w;
}

const OmegaPoint kOmega0 = iex_point(0.0);

LagrangianModel free_kinetic() { return LagrangianModel::free_kinetic(1); }
LagrangianModel pendulum() { return LagrangianModel::mechanical(1, {VTerm{{1, 0}, 0, 1.0}}); }
LagrangianModel sine_forcing() { return LagrangianModel::time_forced(1, {HTerm{1, 0.0, 1.0}}); }
// Traveling crest: V = cos(2 pi (x - tau)); the B-set moves one node per
// step when n_x = n_t.
LagrangianModel traveling() { return LagrangianModel::mechanical(1, {VTerm{{1, 0}, -1, 1.0}}); }

std::vector<double> zeros(const SpaceGrid& g) {
  return std::vector<double>(static_cast<std::size_t>(g.num_nodes()), 0.0);
}

struct Solved {
  WeakKamSolution u;
  WeakKamSolution up;
};

Solved solve_pair(const OmegaPoint& omega, const LagrangianModel& model, double alpha,
                  const SpaceGrid& g, int n_t, WeakKamParams params) {
  return {weak_kam_solve(omega, model, alpha, zeros(g), g, n_t, params, Direction::backward),
          weak_kam_solve(omega, model, alpha, zeros(g), g, n_t, params, Direction::forward)};
}

}  // namespace

TEST_CASE("B-set of an x-independent model is everything") {
  SpaceGrid g(1, 32);
  WeakKamParams params{8, 32, 4.0, 2};
  auto s = solve_pair(kOmega0, sine_forcing(), 0.0, g, 32, params);
  BSet b = b_set(s.u, s.up, 0.0, 0.02);
  CHECK(b.nodes.size() == 32);
  // Infinite tolerance keeps every node regardless of the model.
  auto s2 = solve_pair(kOmega0, pendulum(), 1.0, g, 32, params);
  BSet all = b_set(s2.u, s2.up, 0.0, std::numeric_limits<double>::infinity());
  CHECK(all.nodes.size() == 32);
}

TEST_CASE("B-set of the pendulum marks the unstable equilibrium") {
  // n_t = 16 keeps the velocity quantum fine enough for the gradient bounds.
  SpaceGrid g(1, 64);
  int n_t = 16;
  WeakKamParams params{16, 64, 4.0, 2};
  auto s = solve_pair(kOmega0, pendulum(), 1.0, g, n_t, params);
  BSet b = b_set(s.u, s.up, 0.0, 0.02);
  CHECK(b.contains(0));
  CHECK_FALSE(b.contains(32));
  // The backward and forward gradients cancel at interior B-set nodes.
  double dx = g.spacing();
  for (int node : b.nodes) {
    double grad_sum =
        std::abs((s.u.u.at(b.slice, g.shift_node(node, {1, 0})) -
                  s.u.u.at(b.slice, g.shift_node(node, {-1, 0}))) /
                     (2 * dx) +
                 (s.up.u.at(b.slice, g.shift_node(node, {1, 0})) -
                  s.up.u.at(b.slice, g.shift_node(node, {-1, 0}))) /
                     (2 * dx));
    CHECK(grad_sum <= 10.0 * (dx + 1.0 / n_t));
  }
}

TEST_CASE("b_set validates its inputs") {
  SpaceGrid g(1, 32);
  WeakKamParams params{4, 16, 4.0, 2};
  auto s = solve_pair(kOmega0, sine_forcing(), 0.0, g, 32, params);
  // Two backward solutions are not a valid pair.
  CHECK_THROWS_AS(b_set(s.u, s.u, 0.0, 0.02), InvalidInputError);
  // Mismatched grids are rejected.
  SpaceGrid g2(1, 16);
  auto small = solve_pair(kOmega0, sine_forcing(), 0.0, g2, 16, params);
  CHECK_THROWS_AS(b_set(s.u, small.up, 0.0, 0.02), InvalidInputError);
}

TEST_CASE("launch from the pendulum equilibrium stays put") {
  SpaceGrid g(1, 64);
  WeakKamParams params{16, 64, 4.0, 2};
  auto s = solve_pair(kOmega0, pendulum(), 1.0, g, 16, params);
  BSet b = b_set(s.u, s.up, 0.0, 0.02);
  MinimizerOrbit orbit =
      launch_minimizer(0, 0.0, s.u, s.up, b, kOmega0, pendulum(), 4.0, 1.0 / 256);
  CHECK(orbit.v0.norm_inf() <= 1e-9);
  for (std::size_t k = 0; k < orbit.times.size(); ++k) {
    CHECK(std::abs(orbit.lifted[k][0]) <= 1e-9);
    CHECK(std::abs(orbit.vel[k][0]) <= 1e-9);
  }
}

TEST_CASE("free and forced launches are constant orbits") {
  SpaceGrid g(1, 32);
  WeakKamParams params{8, 32, 4.0, 2};
  auto free_pair = solve_pair(kOmega0, free_kinetic(), 0.0, g, 32, params);
  BSet bf = b_set(free_pair.u, free_pair.up, 0.0, 0.02);
  MinimizerOrbit of = launch_minimizer(bf.nodes[5 % bf.nodes.size()], 0.0, free_pair.u,
                                       free_pair.up, bf, kOmega0, free_kinetic(), 2.0, 1.0 / 128);
  for (std::size_t k = 0; k < of.times.size(); ++k)
    CHECK(std::abs(of.lifted[k][0] - of.x0[0]) <= 1e-12);

  auto forced_pair = solve_pair(kOmega0, sine_forcing(), 0.0, g, 32, params);
  BSet bs = b_set(forced_pair.u, forced_pair.up, 0.0, 0.02);
  MinimizerOrbit os = launch_minimizer(bs.nodes[7], 0.0, forced_pair.u, forced_pair.up, bs,
                                       kOmega0, sine_forcing(), 2.0, 1.0 / 128);
  for (std::size_t k = 0; k < os.times.size(); ++k)
    CHECK(std::abs(os.lifted[k][0] - os.x0[0]) <= 1e-12);
}

TEST_CASE("launching at a semiconcave kink is refused") {
  SpaceGrid g(1, 64);
  WeakKamParams params{16, 64, 4.0, 2};
  auto s = solve_pair(kOmega0, pendulum(), 1.0, g, 16, params);
  BSet everything = b_set(s.u, s.up, 0.0, std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(launch_minimizer(32, 0.0, s.u, s.up, everything, kOmega0, pendulum(), 2.0,
                                   1.0 / 256),
                  NondifferentiablePointError);
  // Outside the B-set is an input error.
  BSet tight = b_set(s.u, s.up, 0.0, 0.02);
  CHECK_THROWS_AS(launch_minimizer(16, 0.0, s.u, s.up, tight, kOmega0, pendulum(), 2.0,
                                   1.0 / 256),
                  InvalidInputError);
}

TEST_CASE("energy is conserved along integrated pendulum orbits") {
  auto model = pendulum();
  auto states = integrate_el(model, kOmega0, Vec::of(0.25), Vec::of(0.5), 0.0, 8.0, 1.0 / 256);
  auto energy = [&](const std::pair<Vec, Vec>& s) {
    return 0.5 * s.second[0] * s.second[0] + std::cos(kTwoPi * s.first[0]);
  };
  double e0 = energy(states.front());
  for (const auto& s : states) CHECK(std::abs(energy(s) - e0) <= 1e-6 * 8.0);
}

TEST_CASE("the integrator is fourth order") {
  auto model = pendulum();
  Vec x0 = Vec::of(0.3), v0 = Vec::of(0.2);
  auto reference = integrate_el(model, kOmega0, x0, v0, 0.0, 2.0, (1.0 / 64) / 16);
  auto coarse = integrate_el(model, kOmega0, x0, v0, 0.0, 2.0, 1.0 / 64);
  auto fine = integrate_el(model, kOmega0, x0, v0, 0.0, 2.0, 0.5 / 64);
  double ref_x = reference.back().first[0];
  double e_coarse = std::abs(coarse.back().first[0] - ref_x);
  double e_fine = std::abs(fine.back().first[0] - ref_x);
  CHECK(e_coarse / e_fine >= 12.0);
}

TEST_CASE("pendulum equilibrium orbit verifies as a global minimizer") {
  SpaceGrid g(1, 64);
  int n_t = 16;
  WeakKamParams params{16, 64, 4.0, 2};
  auto s = solve_pair(kOmega0, pendulum(), 1.0, g, n_t, params);
  BSet b = b_set(s.u, s.up, 0.0, 0.02);
  MinimizerOrbit orbit =
      launch_minimizer(0, 0.0, s.u, s.up, b, kOmega0, pendulum(), 4.0, (1.0 / n_t) / 4);

  std::vector<std::array<double, 2>> windows;
  for (int k = -4; k < 4; ++k)
    windows.push_back({static_cast<double>(k), static_cast<double>(k) + 1.0});
  double defect =
      verify_global_minimizer(orbit, kOmega0, pendulum(), windows, g, n_t, 4.0, 2);
  CHECK(defect <= 0.05);

  OrbitCalibration cal =
      calibration_of_orbit(orbit, s.u, s.up, kOmega0, pendulum(), 1.0, windows);
  CHECK(cal.backward_defect <= 0.05);
  CHECK(cal.forward_defect <= 0.05);
}

TEST_CASE("free constant orbit has zero defects") {
  SpaceGrid g(1, 32);
  int n_t = 32;
  WeakKamParams params{8, 32, 4.0, 2};
  auto s = solve_pair(kOmega0, free_kinetic(), 0.0, g, n_t, params);
  BSet b = b_set(s.u, s.up, 0.0, 0.02);
  MinimizerOrbit orbit =
      launch_minimizer(0, 0.0, s.u, s.up, b, kOmega0, free_kinetic(), 2.0, (1.0 / n_t) / 4);
  std::vector<std::array<double, 2>> windows{{-1.0, 0.0}, {0.0, 1.0}};
  CHECK(verify_global_minimizer(orbit, kOmega0, free_kinetic(), windows, g, n_t, 4.0, 2) <=
        1e-10);
  OrbitCalibration cal =
      calibration_of_orbit(orbit, s.u, s.up, kOmega0, free_kinetic(), 0.0, windows);
  CHECK(cal.backward_defect <= 1e-12);
  CHECK(cal.forward_defect <= 1e-12);
}

TEST_CASE("a mid-segment bump is detected and breaks calibration") {
  SpaceGrid g(1, 64);
  int n_t = 16;
  WeakKamParams params{16, 64, 4.0, 2};
  auto s = solve_pair(kOmega0, pendulum(), 1.0, g, n_t, params);
  BSet b = b_set(s.u, s.up, 0.0, 0.02);
  MinimizerOrbit orbit =
      launch_minimizer(0, 0.0, s.u, s.up, b, kOmega0, pendulum(), 4.0, (1.0 / n_t) / 4);

  // Perturb one backward window with a smooth bump of height 0.1; the
  // independent excess-action oracle is the quadrature of the bump cost.
  MinimizerOrbit bumped = orbit;
  double bump_height = 0.1;
  double excess_oracle = 0.0;
  auto bump = [&](double t) {
    if (t < -2.0 || t > -1.0) return 0.0;
    double phase = std::sin(M_PI * (t + 2.0));
    return bump_height * phase * phase;
  };
  auto bump_rate = [&](double t) {
    if (t < -2.0 || t > -1.0) return 0.0;
    return bump_height * M_PI * std::sin(2.0 * M_PI * (t + 2.0));
  };
  for (std::size_t k = 0; k < bumped.times.size(); ++k) {
    double t = bumped.times[k];
    bumped.lifted[k][0] += bump(t);
    bumped.vel[k][0] += bump_rate(t);
  }
  for (std::size_t k = 0; k + 1 < bumped.times.size(); ++k) {
    double t = bumped.times[k];
    double kinetic = 0.5 * bump_rate(t) * bump_rate(t);
    double potential = 1.0 - std::cos(kTwoPi * bump(t));
    excess_oracle += bumped.dt_int * (kinetic + potential);
  }
  REQUIRE(excess_oracle > 0.02);

  std::vector<std::array<double, 2>> windows{{-2.0, -1.0}};
  double defect = verify_global_minimizer(bumped, kOmega0, pendulum(), windows, g, n_t, 4.0, 2);
  CHECK(defect > 0.004);
  CHECK(defect == doctest::Approx(excess_oracle).epsilon(0.25));

  OrbitCalibration cal =
      calibration_of_orbit(bumped, s.u, s.up, kOmega0, pendulum(), 1.0, windows);
  // The calibration defect carries at least the excess action: an orbit
  // that fails minimality must also fail one of its hypotheses.
  CHECK(cal.backward_defect >= 0.8 * excess_oracle);
}

TEST_CASE("minimizer data shifts with the flow") {
  auto sys = SkewProductSystem::interval_exchange();
  SpaceGrid g(1, 32);
  WeakKamParams params{8, 32, 4.0, 2};
  ThetaFlowParams flow;
  flow.t0 = 0.0;
  flow.bset_tol = 0.02;
  flow.horizon = 2.0;
  OmegaPoint w = sample_omega(sys, 12);

  // x-independent model: exact reindexing of a constant orbit.
  CHECK(theta_flow_check(sys, w, 0.25, sine_forcing(), 0.0, zeros(g), g, 32, params, flow) <=
        1e-8);
  CHECK(theta_flow_check(sys, w, 0.0, sine_forcing(), 0.0, zeros(g), g, 32, params, flow) ==
        0.0);
  // omega-independent model wrapped in the stochastic driver; n_t = 8 keeps
  // the launch gate clear of the velocity quantization.
  CHECK(theta_flow_check(sys, w, 0.25, pendulum(), 1.0, zeros(g), g, 8, params, flow) <= 1e-8);
}

TEST_CASE("B-sets are equivariant node for node") {
  auto sys = SkewProductSystem::interval_exchange();
  SpaceGrid g(1, 32);
  int n_t = 32;
  WeakKamParams params{16, 96, 4.0, 2};
  OmegaPoint w = sample_omega(sys, 4);
  auto model = traveling();
  // Riding the crest (winding-1 loop) realizes the critical value; on the
  // grid the rider sits at the node nearest the crest, so the oracle is
  // max over nodes c of cos(2 pi (c - phase)) - 1/2. Constant loops only
  // reach 0.
  double phase = model.phase(w);
  double oracle = -1e300;
  for (int c = 0; c < g.num_nodes(); ++c)
    oracle = std::max(oracle, std::cos(kTwoPi * (g.node_point(c)[0] - phase)) - 0.5);
  CHECK(oracle == doctest::Approx(0.5).epsilon(0.01));
  double alpha = alpha_closed_curves(w, model, g, n_t, 4.0, 2, 1, 2).value;
  CHECK(alpha == doctest::Approx(oracle).epsilon(1e-9));
  double s_shift = 0.25;
  OmegaPoint w_shift = sys.theta(s_shift, w);

  auto at_w = solve_pair(w, model, alpha, g, n_t, params);
  auto at_shift = solve_pair(w_shift, model, alpha, g, n_t, params);

  for (double t0 : {0.0, 0.5}) {
    BSet b_shifted = b_set(at_shift.u, at_shift.up, t0, 0.02);
    BSet b_base = b_set(at_w.u, at_w.up, mod1(t0 + s_shift), 0.02);
    CHECK(b_shifted.nodes == b_base.nodes);
  }
}
