#pragma once

#include "wkam/config.hpp"
#include "wkam/io.hpp"

namespace wkam {

struct RunResult {
  nlohmann::json summary;  // artifact content: no wall times (bitwise stable)
  bool pass = true;
  std::vector<std::string> failures;
  std::vector<std::string> files;
  double wall_seconds = 0.0;  // console only
};

RunResult run_validate(const ExperimentConfig& cfg);

/// method: "closed" | "subadditive" | "both". out_csv empty = derived from
/// the output prefix. The closed-curves run also exports the extracted
/// minimizing loop as a curve CSV.
RunResult run_critical_value(const ExperimentConfig& cfg, const std::string& method,
                             std::uint64_t omega_seed, const std::string& out_csv = "");

/// export_kernel additionally writes the one-period action kernel
/// A(0, .; 1, .) as "y_index,x_index,action".
RunResult run_weak_kam(const ExperimentConfig& cfg, std::uint64_t omega_seed,
                       Direction direction, bool export_kernel = false);

RunResult run_minimizer(const ExperimentConfig& cfg, std::uint64_t omega_seed, double t0,
                        double horizon);

RunResult run_equivariance(const ExperimentConfig& cfg, std::uint64_t omega_seed, double shift);

RunResult run_sample_omega(const ExperimentConfig& cfg, int count);

/// suite: "smoke" | "full".
RunResult run_reproduce(const std::string& suite, const std::string& out_prefix, int threads);

/// Omega sample for a run: the explicit seed when nonzero, else the
/// root-derived component seed.
OmegaPoint run_omega(const ExperimentConfig& cfg, std::uint64_t omega_seed);

}  // namespace wkam
