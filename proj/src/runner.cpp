#include "wkam/runner.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace wkam {

namespace {

using nlohmann::json;

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void add_check(RunResult& res, const std::string& name, double value, double tol) {
  res.summary["defects"][name] = value;
  res.summary["tolerances"][name] = tol;
  if (!(value <= tol)) {
    res.pass = false;
    res.failures.push_back(name + " = " + format_double(value) + " > " + format_double(tol));
  }
}

double run_alpha(const ExperimentConfig& cfg, const OmegaPoint& omega,
                 const LagrangianModel& model, const SpaceGrid& grid, int threads) {
  return alpha_closed_curves(omega, model, grid, cfg.grid.n_t, cfg.grid.v_cap,
                             cfg.solver.alpha_n_max, cfg.grid.w_max, threads)
      .value;
}

std::vector<std::array<double, 2>> default_windows(double t0, double horizon) {
  int half = std::min(4, static_cast<int>(std::floor(horizon / 2.0)));
  half = std::max(1, half);
  std::vector<std::array<double, 2>> w;
  for (int k = -half; k < half; ++k)
    w.push_back({t0 + static_cast<double>(k), t0 + static_cast<double>(k) + 1.0});
  return w;
}

}  // namespace

OmegaPoint run_omega(const ExperimentConfig& cfg, std::uint64_t omega_seed) {
  SkewProductSystem sys = make_system(cfg.omega_space);
  std::uint64_t seed = omega_seed != 0 ? omega_seed : component_seed(cfg, "omega");
  return sample_omega(sys, seed);
}

RunResult run_validate(const ExperimentConfig& cfg) {
  Stopwatch clock;
  RunResult res;
  res.summary["config"] = cfg.echo;
  res.summary["command"] = "validate";
  SkewProductSystem sys = make_system(cfg.omega_space);
  LagrangianModel model = make_model(cfg.lagrangian, cfg.grid.dim);
  TonelliReport report =
      validate_tonelli(model, &sys, 256, component_seed(cfg, "validate"));
  json checks = json::array();
  for (const auto& c : report.checks) {
    checks.push_back(
        {{"name", c.name}, {"pass", c.pass}, {"worst", c.worst}, {"witness", c.witness}});
    if (!c.pass) {
      res.pass = false;
      res.failures.push_back("tonelli." + c.name);
    }
  }
  res.summary["tonelli"] = checks;
  res.summary["pass"] = res.pass;
  std::string out = cfg.output_prefix + ".validate.json";
  write_json_file(out, res.summary);
  write_sidecar(out, cfg.echo, "validate");
  res.files = {out};
  res.wall_seconds = clock.seconds();
  return res;
}

RunResult run_critical_value(const ExperimentConfig& cfg, const std::string& method,
                             std::uint64_t omega_seed, const std::string& out_csv) {
  Stopwatch clock;
  if (method != "closed" && method != "subadditive" && method != "both")
    throw ConfigError("method", "method must be closed|subadditive|both");
  RunResult res;
  res.summary["config"] = cfg.echo;
  res.summary["command"] = "critical-value";
  LagrangianModel model = make_model(cfg.lagrangian, cfg.grid.dim);
  SpaceGrid grid = make_grid(cfg.grid);
  OmegaPoint omega = run_omega(cfg, omega_seed);
  int threads = resolve_threads(cfg.threads);

  std::vector<std::vector<std::string>> rows;
  std::optional<CriticalValueEstimate> closed, sub;
  if (method == "closed" || method == "both") {
    closed = alpha_closed_curves(omega, model, grid, cfg.grid.n_t, cfg.grid.v_cap,
                                 cfg.solver.alpha_n_max, cfg.grid.w_max, threads);
    res.summary["alpha"]["closed_curves"] = closed->value;
    res.summary["alpha"]["closed_trace"] = closed->trace;
    for (std::size_t i = 0; i < closed->trace.size(); ++i)
      rows.push_back({"closed-curves", std::to_string(i + 1), format_double(closed->trace[i]),
                      "", ""});
  }
  if (method == "subadditive" || method == "both") {
    sub = alpha_subadditive(omega, model, grid, cfg.grid.n_t, cfg.grid.v_cap,
                            cfg.solver.alpha_n_iters, threads);
    res.summary["alpha"]["subadditive"] = sub->value;
    res.summary["alpha"]["sandwich_width"] = sub->sandwich_width;
    for (std::size_t i = 0; i < sub->trace.size(); ++i)
      rows.push_back({"subadditive", std::to_string(i + 1), format_double(sub->trace[i]),
                      format_double(sub->M_trace[i]), format_double(sub->m_trace[i])});
  }
  if (closed && sub) {
    double disc = std::abs(closed->value - sub->value);
    res.summary["alpha"]["discrepancy"] = disc;
    add_check(res, "cross_method_discrepancy", disc, cfg.solver.tolerances.cross_method);
  }

  std::string csv = out_csv.empty() ? cfg.output_prefix + ".critical.csv" : out_csv;
  write_csv(csv, {"method", "n", "estimate", "M_n", "m_n"}, rows);
  write_sidecar(csv, cfg.echo, "critical-value --method " + method);
  res.summary["pass"] = res.pass;
  std::string summary_path = cfg.output_prefix + ".critical.summary.json";
  write_json_file(summary_path, res.summary);
  write_sidecar(summary_path, cfg.echo, "critical-value --method " + method);
  res.files = {csv, summary_path};

  if (closed) {
    Curve loop =
        extract_closed_minimizer(omega, model, grid, cfg.grid.n_t, cfg.grid.v_cap,
                                 closed->best_base_node, closed->best_period,
                                 closed->best_winding, cfg.grid.w_max, threads);
    std::string loop_csv = cfg.output_prefix + ".loop.csv";
    write_csv(loop_csv, curve_csv_header(grid.dim()), curve_csv_rows(loop));
    write_sidecar(loop_csv, cfg.echo, "critical-value --method " + method);
    res.files.push_back(loop_csv);
  }
  res.wall_seconds = clock.seconds();
  return res;
}

RunResult run_weak_kam(const ExperimentConfig& cfg, std::uint64_t omega_seed,
                       Direction direction, bool export_kernel) {
  Stopwatch clock;
  RunResult res;
  res.summary["config"] = cfg.echo;
  res.summary["command"] = "weak-kam";
  LagrangianModel model = make_model(cfg.lagrangian, cfg.grid.dim);
  SpaceGrid grid = make_grid(cfg.grid);
  OmegaPoint omega = run_omega(cfg, omega_seed);
  int threads = resolve_threads(cfg.threads);

  double alpha = run_alpha(cfg, omega, model, grid, threads);
  res.summary["alpha"] = alpha;

  WeakKamParams params{cfg.solver.n_burn, cfg.solver.n_max, cfg.grid.v_cap, threads};
  WeakKamSolution sol =
      weak_kam_solve(omega, model, alpha, std::vector<double>(grid.num_nodes(), 0.0), grid,
                     cfg.grid.n_t, params, direction);
  res.summary["trace"] = sol.trace;
  double tail = sol.exactly_converged ? 0.0 : (sol.trace.empty() ? 1e300 : sol.trace.back());
  add_check(res, "convergence_tail", tail, cfg.solver.tolerances.convergence);

  json report;
  report["alpha"] = alpha;
  report["trace"] = sol.trace;
  if (direction == Direction::backward) {
    ViscosityReport visc =
        viscosity_check(sol, omega, model, alpha, cfg.solver.tolerances.convergence);
    CalibrationReport cal = calibration_check(sol, omega, model, alpha, 4, 1.0, threads);
    add_check(res, "subsolution_defect", visc.subsolution_defect,
              cfg.solver.tolerances.subsolution);
    add_check(res, "calibration_defect", cal.max_equality_defect,
              cfg.solver.tolerances.calibration);
    report["subsolution_defect"] = visc.subsolution_defect;
    report["calibration_defect"] = cal.max_equality_defect;
    report["domination_violation"] = cal.max_domination_violation;
  } else {
    report["subsolution_defect"] = nullptr;
    report["calibration_defect"] = nullptr;
  }

  std::string sol_csv = cfg.output_prefix + ".solution.csv";
  write_csv(sol_csv, field_csv_header(grid.dim()), field_csv_rows(sol.u));
  write_sidecar(sol_csv, cfg.echo, "weak-kam");
  std::string report_path = cfg.output_prefix + ".report.json";
  res.summary["pass"] = res.pass;
  write_json_file(report_path, report);
  write_sidecar(report_path, cfg.echo, "weak-kam");
  res.files = {sol_csv, report_path};

  if (export_kernel) {
    ActionKernel k = ActionKernel::compute(0.0, 1.0, omega, model, grid, cfg.grid.n_t,
                                           cfg.grid.v_cap, /*with_backpointers=*/false,
                                           threads);
    std::string kernel_csv = cfg.output_prefix + ".kernel.csv";
    write_csv(kernel_csv, {"y_index", "x_index", "action"}, kernel_csv_rows(k));
    write_sidecar(kernel_csv, cfg.echo, "weak-kam --export-kernel");
    res.files.push_back(kernel_csv);
  }
  res.wall_seconds = clock.seconds();
  return res;
}

RunResult run_minimizer(const ExperimentConfig& cfg, std::uint64_t omega_seed, double t0,
                        double horizon) {
  Stopwatch clock;
  RunResult res;
  res.summary["config"] = cfg.echo;
  res.summary["command"] = "minimizer";
  LagrangianModel model = make_model(cfg.lagrangian, cfg.grid.dim);
  SpaceGrid grid = make_grid(cfg.grid);
  OmegaPoint omega = run_omega(cfg, omega_seed);
  int threads = resolve_threads(cfg.threads);

  double alpha = run_alpha(cfg, omega, model, grid, threads);
  res.summary["alpha"] = alpha;
  WeakKamParams params{cfg.solver.n_burn, cfg.solver.n_max, cfg.grid.v_cap, threads};
  std::vector<double> u0(grid.num_nodes(), 0.0);
  WeakKamSolution u = weak_kam_solve(omega, model, alpha, u0, grid, cfg.grid.n_t, params,
                                     Direction::backward);
  WeakKamSolution up = weak_kam_solve(omega, model, alpha, u0, grid, cfg.grid.n_t, params,
                                      Direction::forward);
  BSet b = b_set(u, up, t0, cfg.solver.tolerances.bset);
  int x0 = b.nodes.front();
  double best = 1e300;
  for (int node : b.nodes) {
    double v = u.u.at(b.slice, node) + up.u.at(b.slice, node);
    if (v < best) {
      best = v;
      x0 = node;
    }
  }
  double dt_int = (1.0 / cfg.grid.n_t) / cfg.solver.dt_int_substeps;
  MinimizerOrbit orbit = launch_minimizer(x0, t0, u, up, b, omega, model, horizon, dt_int);
  auto windows = default_windows(t0, horizon);
  double defect =
      verify_global_minimizer(orbit, omega, model, windows, grid, cfg.grid.n_t, cfg.grid.v_cap,
                              threads);
  OrbitCalibration cal = calibration_of_orbit(orbit, u, up, omega, model, alpha, windows);
  add_check(res, "window_action_defect", defect, cfg.solver.tolerances.minimizer_defect);
  add_check(res, "backward_calibration", cal.backward_defect,
            cfg.solver.tolerances.minimizer_defect);
  add_check(res, "forward_calibration", cal.forward_defect,
            cfg.solver.tolerances.minimizer_defect);

  json report;
  report["alpha"] = alpha;
  report["launch_node"] = x0;
  report["b_set_size"] = b.nodes.size();
  report["window_action_defect"] = defect;
  report["backward_calibration"] = cal.backward_defect;
  report["forward_calibration"] = cal.forward_defect;

  // Orbit CSV: t, position, velocity at every integrator sample.
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < orbit.times.size(); ++k) {
    std::vector<std::string> row{format_double(orbit.times[k])};
    TorusPoint p = wrap(orbit.lifted[k]);
    for (int i = 0; i < grid.dim(); ++i) row.push_back(format_double(p[i]));
    for (int i = 0; i < grid.dim(); ++i) row.push_back(format_double(orbit.vel[k][i]));
    rows.push_back(std::move(row));
  }
  std::string orbit_csv = cfg.output_prefix + ".orbit.csv";
  write_csv(orbit_csv, curve_csv_header(grid.dim()), rows);
  write_sidecar(orbit_csv, cfg.echo, "minimizer");
  std::string report_path = cfg.output_prefix + ".minimizer.json";
  res.summary["pass"] = res.pass;
  write_json_file(report_path, report);
  write_sidecar(report_path, cfg.echo, "minimizer");
  res.files = {orbit_csv, report_path};
  res.wall_seconds = clock.seconds();
  return res;
}

RunResult run_equivariance(const ExperimentConfig& cfg, std::uint64_t omega_seed, double shift) {
  Stopwatch clock;
  RunResult res;
  res.summary["config"] = cfg.echo;
  res.summary["command"] = "equivariance";
  SkewProductSystem sys = make_system(cfg.omega_space);
  LagrangianModel model = make_model(cfg.lagrangian, cfg.grid.dim);
  SpaceGrid grid = make_grid(cfg.grid);
  OmegaPoint omega = run_omega(cfg, omega_seed);
  int threads = resolve_threads(cfg.threads);

  double alpha = run_alpha(cfg, omega, model, grid, threads);
  WeakKamParams params{cfg.solver.n_burn, cfg.solver.n_max, cfg.grid.v_cap, threads};
  EquivarianceReport rep = equivariance_check(sys, omega, shift, model, alpha,
                                              std::vector<double>(grid.num_nodes(), 0.0), grid,
                                              cfg.grid.n_t, params);
  add_check(res, "shift_defect", rep.shift_defect, cfg.solver.tolerances.equivariance);
  res.summary["alpha"] = alpha;
  res.summary["shift"] = shift;
  res.summary["shift_defect"] = rep.shift_defect;
  res.summary["periodicity_defect"] = rep.periodicity_defect;
  res.summary["pass"] = res.pass;
  std::string out = cfg.output_prefix + ".equivariance.json";
  write_json_file(out, res.summary);
  write_sidecar(out, cfg.echo, "equivariance");
  res.files = {out};
  res.wall_seconds = clock.seconds();
  return res;
}

RunResult run_sample_omega(const ExperimentConfig& cfg, int count) {
  Stopwatch clock;
  if (count < 1) throw ConfigError("count", "sample count must be positive");
  RunResult res;
  res.summary["config"] = cfg.echo;
  res.summary["command"] = "sample-omega";
  SkewProductSystem sys = make_system(cfg.omega_space);
  std::vector<std::string> header{"seed"};
  for (int i = 0; i < sys.dim(); ++i) header.push_back("omega" + std::to_string(i + 1));
  std::vector<std::vector<std::string>> rows;
  for (int i = 0; i < count; ++i) {
    std::uint64_t seed = component_seed(cfg, "sample-omega:" + std::to_string(i));
    OmegaPoint w = sample_omega(sys, seed);
    std::vector<std::string> row{std::to_string(seed)};
    for (double c : w.coords) row.push_back(format_double(c));
    rows.push_back(std::move(row));
  }
  std::string out = cfg.output_prefix + ".omega.csv";
  write_csv(out, header, rows);
  write_sidecar(out, cfg.echo, "sample-omega");
  res.summary["pass"] = true;
  res.files = {out};
  res.wall_seconds = clock.seconds();
  return res;
}

namespace {

ExperimentConfig suite_config(const std::string& name, const std::string& out_prefix,
                              int threads, const json& patch) {
  json j = {{"omega_space", {{"kind", "interval_exchange"}}},
            {"lagrangian", {{"kind", "free-kinetic"}}},
            {"grid", {{"dim", 1}, {"n_per_dim", 32}, {"n_t", 32}, {"v_cap", 4.0}, {"w_max", 1}}},
            {"solver",
             {{"n_burn", 8}, {"n_max", 32}, {"alpha_n_max", 2}, {"alpha_n_iters", 16}}},
            {"seeds", {{"root", 20240909}}},
            {"threads", threads}};
  for (auto it = patch.begin(); it != patch.end(); ++it) j[it.key()].update(*it);
  j["output_prefix"] = out_prefix + "." + name;
  return parse_config(j);
}

}  // namespace

RunResult run_reproduce(const std::string& suite, const std::string& out_prefix, int threads) {
  Stopwatch clock;
  if (suite != "smoke" && suite != "full")
    throw ConfigError("suite", "unknown suite \"" + suite + "\" (expected smoke or full)");
  RunResult res;
  res.summary["command"] = "reproduce";
  res.summary["suite"] = suite;
  json runs = json::array();

  auto absorb = [&](const std::string& name, const RunResult& r) {
    json entry;
    entry["name"] = name;
    entry["pass"] = r.pass;
    entry["failures"] = r.failures;
    entry["files"] = r.files;
    entry["summary"] = r.summary;
    runs.push_back(entry);
    if (!r.pass) {
      res.pass = false;
      for (const auto& f : r.failures) res.failures.push_back(name + ": " + f);
    }
    for (const auto& f : r.files) res.files.push_back(f);
  };

  json time_forced_patch = {
      {"lagrangian", {{"kind", "time-forced-kinetic"}, {"h_coeffs", {{1, 0.0, 1.0}}}}}};

  if (suite == "smoke") {
    ExperimentConfig free_cfg = suite_config("free", out_prefix, threads, {});
    absorb("validate.free", run_validate(free_cfg));
    absorb("critical.free", run_critical_value(free_cfg, "both", 0));
    absorb("weak_kam.free", run_weak_kam(free_cfg, 0, Direction::backward));
    absorb("minimizer.free", run_minimizer(free_cfg, 0, 0.0, 2.0));
    absorb("equivariance.free", run_equivariance(free_cfg, 0, 0.25));
    absorb("sample_omega.free", run_sample_omega(free_cfg, 8));

    // The sine subsolution residual scales like pi/n_t; n_t = 64 is the
    // resolution its 0.05 tolerance is calibrated for.
    json tf_smoke = time_forced_patch;
    tf_smoke["grid"] = {{"n_t", 64}};
    ExperimentConfig tf_cfg = suite_config("time_forced", out_prefix, threads, tf_smoke);
    absorb("validate.time_forced", run_validate(tf_cfg));
    absorb("critical.time_forced", run_critical_value(tf_cfg, "both", 0));
    absorb("weak_kam.time_forced", run_weak_kam(tf_cfg, 0, Direction::backward));
  } else {
    json tf64 = time_forced_patch;
    tf64["grid"] = {{"n_per_dim", 64}, {"n_t", 64}};
    tf64["solver"] = {{"alpha_n_max", 4}, {"alpha_n_iters", 64}, {"n_burn", 16}, {"n_max", 128}};
    ExperimentConfig tf_cfg = suite_config("time_forced", out_prefix, threads, tf64);
    absorb("validate.time_forced", run_validate(tf_cfg));
    absorb("critical.time_forced", run_critical_value(tf_cfg, "both", 0));
    absorb("weak_kam.time_forced", run_weak_kam(tf_cfg, 0, Direction::backward));
    absorb("equivariance.time_forced", run_equivariance(tf_cfg, 0, 0.25));

    json pendulum = {{"lagrangian",
                      {{"kind", "mechanical"}, {"V_coeffs", {{1, 0, 1.0}}}}},
                     {"grid", {{"n_per_dim", 256}, {"n_t", 64}}},
                     {"solver",
                      {{"alpha_n_max", 6},
                       {"alpha_n_iters", 128},
                       {"n_burn", 16},
                       {"n_max", 128}}}};
    ExperimentConfig pend_cfg = suite_config("pendulum", out_prefix, threads, pendulum);
    absorb("validate.pendulum", run_validate(pend_cfg));
    absorb("critical.pendulum", run_critical_value(pend_cfg, "both", 0));
    absorb("weak_kam.pendulum", run_weak_kam(pend_cfg, 0, Direction::backward));

    // Launches need n_t small enough that the velocity quantum does not
    // blur the differentiability gate at the hilltop.
    json pendulum_min = pendulum;
    pendulum_min["grid"] = {{"n_per_dim", 64}, {"n_t", 16}};
    pendulum_min["solver"] = {{"alpha_n_max", 2}, {"n_burn", 16}, {"n_max", 128}};
    ExperimentConfig pend_min_cfg =
        suite_config("pendulum_minimizer", out_prefix, threads, pendulum_min);
    absorb("minimizer.pendulum", run_minimizer(pend_min_cfg, 0, 0.0, 8.0));
  }

  res.summary["runs"] = runs;
  res.summary["pass"] = res.pass;
  std::string out = out_prefix + ".reproduce." + suite + ".json";
  write_json_file(out, res.summary);
  write_sidecar(out, nlohmann::json{{"suite", suite}}, "reproduce --suite " + suite);
  res.files.push_back(out);
  res.wall_seconds = clock.seconds();
  return res;
}

}  // namespace wkam
