#pragma once

#include <json.hpp>

#include "wkam/critical.hpp"
#include "wkam/minimizers.hpp"
#include "wkam/weak_kam.hpp"

namespace wkam {

struct OmegaConfig {
  OmegaKind kind = OmegaKind::interval_exchange;
  int dim = 1;
  std::vector<double> alpha;  // alpha_2..alpha_dim; empty = sqrt defaults
  int subdivision = 1;
  std::vector<int> permutation;  // empty = identity
};

struct LagrangianConfig {
  LagrangianKind kind = LagrangianKind::free_kinetic;
  double mass = 1.0;
  std::vector<HTerm> h_coeffs;
  std::vector<VTerm> v_coeffs;
  PhaseMap phase_map = PhaseMap::example1_f;
};

struct GridConfig {
  int dim = 1;
  int n_per_dim = 64;
  int n_t = 64;
  double v_cap = 4.0;
  int w_max = 2;
};

struct Tolerances {
  double subsolution = 0.05;
  double calibration = 0.02;
  double minimizer_defect = 0.05;
  double equivariance = 1e-10;
  double cross_method = 0.05;
  double bset = 0.02;
  double refine = 1e-8;
  double convergence = 0.05;
};

struct SolverConfig {
  int n_burn = 16;
  int n_max = 128;
  int alpha_n_max = 4;
  int alpha_n_iters = 64;
  std::array<int, 2> barrier_window{4, 12};
  double t0 = 0.0;
  double horizon = 8.0;
  int dt_int_substeps = 4;
  int refine_max_iters = 20000;
  Tolerances tolerances;
};

struct ExperimentConfig {
  OmegaConfig omega_space;
  LagrangianConfig lagrangian;
  GridConfig grid;
  SolverConfig solver;
  std::uint64_t root_seed = 1;
  std::string output_prefix = "wkam_out";
  int threads = 0;  // 0 = WKAM_THREADS env or 1

  nlohmann::json echo;  // fully defaulted config, for sidecars
};

/// Strict parse: unknown keys and invalid values raise ConfigError carrying
/// the dotted key path.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);

/// Apply "--override key.path=value" on the raw JSON before parsing.
void apply_override(nlohmann::json& j, const std::string& keyval);

SkewProductSystem make_system(const OmegaConfig& cfg);
LagrangianModel make_model(const LagrangianConfig& cfg, int dim);
SpaceGrid make_grid(const GridConfig& cfg);

/// Seed for a named component: root ^ fnv1a64(tag).
std::uint64_t component_seed(const ExperimentConfig& cfg, const std::string& tag);

}  // namespace wkam
