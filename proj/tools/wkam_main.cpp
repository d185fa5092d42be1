#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "wkam/runner.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_prefix;
  std::uint64_t omega_seed = 0;
  int threads = 0;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required = true) {
  auto* c = cmd->add_option("--config", opts.config_path, "experiment config (JSON)");
  if (config_required) c->required();
  cmd->add_option("--out-prefix", opts.out_prefix, "output path prefix");
  cmd->add_option("--omega-seed", opts.omega_seed, "explicit omega sample seed");
  cmd->add_option("--threads", opts.threads, "worker threads (default: WKAM_THREADS or 1)");
  cmd->add_option("--override", opts.overrides, "config override key.path=value")
      ->take_all();
}

wkam::ExperimentConfig load(const CommonOpts& opts) {
  std::ifstream in(opts.config_path);
  if (!in) throw wkam::ConfigError("", "cannot open config file \"" + opts.config_path + "\"");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw wkam::ConfigError("", std::string("config parse error: ") + e.what());
  }
  for (const auto& o : opts.overrides) wkam::apply_override(j, o);
  wkam::ExperimentConfig cfg = wkam::parse_config(j);
  if (!opts.out_prefix.empty()) cfg.output_prefix = opts.out_prefix;
  if (opts.threads > 0) cfg.threads = opts.threads;
  return cfg;
}

int report(const wkam::RunResult& res) {
  std::cout << (res.pass ? "PASS" : "FAIL");
  std::cout << "  (" << res.wall_seconds << " s)\n";
  for (const auto& f : res.files) std::cout << "  wrote " << f << "\n";
  for (const auto& f : res.failures) std::cout << "  failed check: " << f << "\n";
  return res.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic weak KAM experiments on flat tori"};
  app.require_subcommand(1);

  CommonOpts validate_opts, critical_opts, weak_opts, minimizer_opts, equi_opts, sample_opts;

  auto* validate = app.add_subcommand("validate", "Tonelli and matching-condition checks");
  add_common(validate, validate_opts);

  auto* critical = app.add_subcommand("critical-value", "Mane critical value estimates");
  add_common(critical, critical_opts);
  std::string method = "both";
  std::string out_csv;
  critical->add_option("--method", method, "closed|subadditive|both");
  critical->add_option("--out", out_csv, "trace CSV path");

  auto* weak = app.add_subcommand("weak-kam", "liminf weak KAM solution and HJ checks");
  add_common(weak, weak_opts);
  std::string direction = "backward";
  bool export_kernel = false;
  weak->add_option("--direction", direction, "backward|forward");
  weak->add_flag("--export-kernel", export_kernel, "also write the one-period action kernel");

  auto* minimizer = app.add_subcommand("minimizer", "global minimizer launch and verification");
  add_common(minimizer, minimizer_opts);
  double t0 = 0.0, horizon = 8.0;
  minimizer->add_option("--t0", t0, "launch time (grid aligned)");
  minimizer->add_option("--horizon", horizon, "integration horizon per direction");

  auto* equi = app.add_subcommand("equivariance", "theta-shift equivariance of solutions");
  add_common(equi, equi_opts);
  double shift = 0.25;
  equi->add_option("--shift", shift, "flow time s (multiple of dt)");

  auto* sample = app.add_subcommand("sample-omega", "deterministic omega samples");
  add_common(sample, sample_opts);
  int count = 16;
  sample->add_option("--count", count, "number of samples");

  auto* reproduce = app.add_subcommand("reproduce", "run a benchmark suite");
  std::string suite = "smoke";
  std::string rep_prefix = "wkam_out";
  int rep_threads = 0;
  reproduce->add_option("--suite", suite, "smoke|full")->required();
  reproduce->add_option("--out-prefix", rep_prefix, "output path prefix");
  reproduce->add_option("--threads", rep_threads, "worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return report(wkam::run_validate(load(validate_opts)));
    if (critical->parsed())
      return report(wkam::run_critical_value(load(critical_opts), method,
                                             critical_opts.omega_seed, out_csv));
    if (weak->parsed()) {
      if (direction != "backward" && direction != "forward")
        throw wkam::ConfigError("direction", "--direction must be backward or forward");
      return report(wkam::run_weak_kam(load(weak_opts), weak_opts.omega_seed,
                                       direction == "backward" ? wkam::Direction::backward
                                                               : wkam::Direction::forward,
                                       export_kernel));
    }
    if (minimizer->parsed())
      return report(wkam::run_minimizer(load(minimizer_opts), minimizer_opts.omega_seed, t0,
                                        horizon));
    if (equi->parsed())
      return report(wkam::run_equivariance(load(equi_opts), equi_opts.omega_seed, shift));
    if (sample->parsed()) return report(wkam::run_sample_omega(load(sample_opts), count));
    if (reproduce->parsed())
      return report(wkam::run_reproduce(suite, rep_prefix, rep_threads));
  } catch (const wkam::ConfigError& e) {
    std::cerr << "config error";
    if (!e.key.empty()) std::cerr << " at \"" << e.key << "\"";
    std::cerr << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
