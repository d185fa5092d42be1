#include "wkam/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace wkam {

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(path, path + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (allowed.find(it.key()) == allowed.end())
      throw ConfigError(path + "." + it.key(), "unknown key \"" + path + "." + it.key() + "\"");
  }
}

template <typename T>
T get_or(const json& j, const std::string& path, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + "." + key, "invalid value for \"" + path + "." + key + "\"");
  }
}

void check_positive(int v, const std::string& key) {
  if (v <= 0) throw ConfigError(key, "\"" + key + "\" must be positive");
}

void check_positive(double v, const std::string& key) {
  if (!(v > 0)) throw ConfigError(key, "\"" + key + "\" must be positive");
}

OmegaConfig parse_omega(const json& j) {
  require_keys(j, "omega_space", {"kind", "dim", "alpha", "subdivision", "permutation"});
  OmegaConfig cfg;
  std::string kind = get_or<std::string>(j, "omega_space", "kind", "interval_exchange");
  if (kind == "interval_exchange") {
    cfg.kind = OmegaKind::interval_exchange;
    cfg.dim = 1;
  } else if (kind == "torus_rotation") {
    cfg.kind = OmegaKind::torus_rotation;
    cfg.dim = get_or<int>(j, "omega_space", "dim", 2);
    check_positive(cfg.dim, "omega_space.dim");
  } else {
    throw ConfigError("omega_space.kind", "unknown omega_space.kind \"" + kind + "\"");
  }
  cfg.alpha = get_or<std::vector<double>>(j, "omega_space", "alpha", {});
  cfg.subdivision = get_or<int>(j, "omega_space", "subdivision", 1);
  check_positive(cfg.subdivision, "omega_space.subdivision");
  cfg.permutation = get_or<std::vector<int>>(j, "omega_space", "permutation", {});
  return cfg;
}

LagrangianConfig parse_lagrangian(const json& j, int dim) {
  require_keys(j, "lagrangian", {"kind", "mass", "h_coeffs", "V_coeffs", "phase_map"});
  LagrangianConfig cfg;
  std::string kind = get_or<std::string>(j, "lagrangian", "kind", "free-kinetic");
  if (kind == "free-kinetic")
    cfg.kind = LagrangianKind::free_kinetic;
  else if (kind == "time-forced-kinetic")
    cfg.kind = LagrangianKind::time_forced_kinetic;
  else if (kind == "mechanical")
    cfg.kind = LagrangianKind::mechanical;
  else if (kind == "custom-trig")
    cfg.kind = LagrangianKind::custom_trig;
  else
    throw ConfigError("lagrangian.kind", "unknown lagrangian.kind \"" + kind + "\"");

  cfg.mass = get_or<double>(j, "lagrangian", "mass", 1.0);
  check_positive(cfg.mass, "lagrangian.mass");

  if (j.contains("h_coeffs")) {
    for (const auto& row : j.at("h_coeffs")) {
      if (!row.is_array() || row.size() != 3)
        throw ConfigError("lagrangian.h_coeffs", "h_coeffs rows are [k, a_k, b_k]");
      HTerm t;
      t.k = row[0].get<int>();
      t.a = row[1].get<double>();
      t.b = row[2].get<double>();
      cfg.h_coeffs.push_back(t);
    }
  }
  if (j.contains("V_coeffs")) {
    for (const auto& row : j.at("V_coeffs")) {
      if (!row.is_array() || static_cast<int>(row.size()) != dim + 2)
        throw ConfigError("lagrangian.V_coeffs",
                          "V_coeffs rows are [k_x per dimension..., k_t, c]");
      VTerm t;
      for (int i = 0; i < dim; ++i) t.kx[static_cast<std::size_t>(i)] = row[i].get<int>();
      t.kt = row[dim].get<int>();
      t.c = row[dim + 1].get<double>();
      cfg.v_coeffs.push_back(t);
    }
  }
  std::string pm = get_or<std::string>(j, "lagrangian", "phase_map", "example1");
  if (pm == "example1")
    cfg.phase_map = PhaseMap::example1_f;
  else if (pm == "example2_pi")
    cfg.phase_map = PhaseMap::example2_pi;
  else
    throw ConfigError("lagrangian.phase_map", "unknown phase_map \"" + pm + "\"");
  return cfg;
}

GridConfig parse_grid(const json& j) {
  require_keys(j, "grid", {"dim", "n_per_dim", "n_t", "v_cap", "w_max"});
  GridConfig cfg;
  cfg.dim = get_or<int>(j, "grid", "dim", 1);
  if (cfg.dim < 1 || cfg.dim > 2) throw ConfigError("grid.dim", "\"grid.dim\" must be 1 or 2");
  cfg.n_per_dim = get_or<int>(j, "grid", "n_per_dim", 64);
  check_positive(cfg.n_per_dim, "grid.n_per_dim");
  cfg.n_t = get_or<int>(j, "grid", "n_t", 64);
  check_positive(cfg.n_t, "grid.n_t");
  cfg.v_cap = get_or<double>(j, "grid", "v_cap", 4.0);
  check_positive(cfg.v_cap, "grid.v_cap");
  cfg.w_max = get_or<int>(j, "grid", "w_max", 2);
  if (cfg.w_max < 0) throw ConfigError("grid.w_max", "\"grid.w_max\" must be >= 0");
  return cfg;
}

Tolerances parse_tolerances(const json& j) {
  require_keys(j, "solver.tolerances",
               {"subsolution", "calibration", "minimizer_defect", "equivariance", "cross_method",
                "bset", "refine", "convergence"});
  Tolerances t;
  t.subsolution = get_or<double>(j, "solver.tolerances", "subsolution", t.subsolution);
  t.calibration = get_or<double>(j, "solver.tolerances", "calibration", t.calibration);
  t.minimizer_defect =
      get_or<double>(j, "solver.tolerances", "minimizer_defect", t.minimizer_defect);
  t.equivariance = get_or<double>(j, "solver.tolerances", "equivariance", t.equivariance);
  t.cross_method = get_or<double>(j, "solver.tolerances", "cross_method", t.cross_method);
  t.bset = get_or<double>(j, "solver.tolerances", "bset", t.bset);
  t.refine = get_or<double>(j, "solver.tolerances", "refine", t.refine);
  t.convergence = get_or<double>(j, "solver.tolerances", "convergence", t.convergence);
  return t;
}

SolverConfig parse_solver(const json& j) {
  require_keys(j, "solver",
               {"n_burn", "n_max", "alpha_n_max", "alpha_n_iters", "barrier_window", "t0",
                "horizon", "dt_int_substeps", "refine_max_iters", "tolerances"});
  SolverConfig cfg;
  cfg.n_burn = get_or<int>(j, "solver", "n_burn", cfg.n_burn);
  cfg.n_max = get_or<int>(j, "solver", "n_max", cfg.n_max);
  check_positive(cfg.n_burn, "solver.n_burn");
  check_positive(cfg.n_max, "solver.n_max");
  if (cfg.n_burn >= cfg.n_max)
    throw ConfigError("solver.n_burn", "\"solver.n_burn\" must be below solver.n_max");
  cfg.alpha_n_max = get_or<int>(j, "solver", "alpha_n_max", cfg.alpha_n_max);
  check_positive(cfg.alpha_n_max, "solver.alpha_n_max");
  cfg.alpha_n_iters = get_or<int>(j, "solver", "alpha_n_iters", cfg.alpha_n_iters);
  if (cfg.alpha_n_iters < 8)
    throw ConfigError("solver.alpha_n_iters", "\"solver.alpha_n_iters\" must be >= 8");
  if (j.contains("barrier_window")) {
    auto w = j.at("barrier_window").get<std::vector<int>>();
    if (w.size() != 2 || w[0] < 1 || w[1] < w[0])
      throw ConfigError("solver.barrier_window", "\"solver.barrier_window\" must be [n_lo, n_hi]");
    cfg.barrier_window = {w[0], w[1]};
  }
  cfg.t0 = get_or<double>(j, "solver", "t0", cfg.t0);
  cfg.horizon = get_or<double>(j, "solver", "horizon", cfg.horizon);
  check_positive(cfg.horizon, "solver.horizon");
  cfg.dt_int_substeps = get_or<int>(j, "solver", "dt_int_substeps", cfg.dt_int_substeps);
  check_positive(cfg.dt_int_substeps, "solver.dt_int_substeps");
  cfg.refine_max_iters = get_or<int>(j, "solver", "refine_max_iters", cfg.refine_max_iters);
  check_positive(cfg.refine_max_iters, "solver.refine_max_iters");
  if (j.contains("tolerances")) cfg.tolerances = parse_tolerances(j.at("tolerances"));
  return cfg;
}

json echo_config(const ExperimentConfig& cfg) {
  json j;
  j["omega_space"]["kind"] =
      cfg.omega_space.kind == OmegaKind::interval_exchange ? "interval_exchange" : "torus_rotation";
  j["omega_space"]["dim"] = cfg.omega_space.dim;
  j["omega_space"]["alpha"] = cfg.omega_space.alpha;
  j["omega_space"]["subdivision"] = cfg.omega_space.subdivision;
  j["omega_space"]["permutation"] = cfg.omega_space.permutation;
  switch (cfg.lagrangian.kind) {
    case LagrangianKind::free_kinetic: j["lagrangian"]["kind"] = "free-kinetic"; break;
    case LagrangianKind::time_forced_kinetic:
      j["lagrangian"]["kind"] = "time-forced-kinetic";
      break;
    case LagrangianKind::mechanical: j["lagrangian"]["kind"] = "mechanical"; break;
    default: j["lagrangian"]["kind"] = "custom-trig"; break;
  }
  j["lagrangian"]["mass"] = cfg.lagrangian.mass;
  auto& hrows = j["lagrangian"]["h_coeffs"] = json::array();
  for (const auto& t : cfg.lagrangian.h_coeffs) hrows.push_back({t.k, t.a, t.b});
  auto& vrows = j["lagrangian"]["V_coeffs"] = json::array();
  for (const auto& t : cfg.lagrangian.v_coeffs) {
    json row = json::array();
    for (int i = 0; i < cfg.grid.dim; ++i) row.push_back(t.kx[static_cast<std::size_t>(i)]);
    row.push_back(t.kt);
    row.push_back(t.c);
    vrows.push_back(row);
  }
  j["lagrangian"]["phase_map"] =
      cfg.lagrangian.phase_map == PhaseMap::example1_f ? "example1" : "example2_pi";
  j["grid"] = {{"dim", cfg.grid.dim},
               {"n_per_dim", cfg.grid.n_per_dim},
               {"n_t", cfg.grid.n_t},
               {"v_cap", cfg.grid.v_cap},
               {"w_max", cfg.grid.w_max}};
  j["solver"] = {{"n_burn", cfg.solver.n_burn},
                 {"n_max", cfg.solver.n_max},
                 {"alpha_n_max", cfg.solver.alpha_n_max},
                 {"alpha_n_iters", cfg.solver.alpha_n_iters},
                 {"barrier_window", {cfg.solver.barrier_window[0], cfg.solver.barrier_window[1]}},
                 {"t0", cfg.solver.t0},
                 {"horizon", cfg.solver.horizon},
                 {"dt_int_substeps", cfg.solver.dt_int_substeps},
                 {"refine_max_iters", cfg.solver.refine_max_iters},
                 {"tolerances",
                  {{"subsolution", cfg.solver.tolerances.subsolution},
                   {"calibration", cfg.solver.tolerances.calibration},
                   {"minimizer_defect", cfg.solver.tolerances.minimizer_defect},
                   {"equivariance", cfg.solver.tolerances.equivariance},
                   {"cross_method", cfg.solver.tolerances.cross_method},
                   {"bset", cfg.solver.tolerances.bset},
                   {"refine", cfg.solver.tolerances.refine},
                   {"convergence", cfg.solver.tolerances.convergence}}}};
  j["seeds"] = {{"root", cfg.root_seed}};
  j["output_prefix"] = cfg.output_prefix;
  // threads is an execution knob, not part of the experiment identity;
  // keeping it out of the echo keeps artifacts bitwise stable across runs
  // with different worker counts.
  return j;
}

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& j) {
  require_keys(j, "config",
               {"omega_space", "lagrangian", "grid", "solver", "seeds", "output_prefix",
                "threads"});
  ExperimentConfig cfg;
  if (j.contains("grid")) cfg.grid = parse_grid(j.at("grid"));
  if (j.contains("omega_space")) cfg.omega_space = parse_omega(j.at("omega_space"));
  if (j.contains("lagrangian")) cfg.lagrangian = parse_lagrangian(j.at("lagrangian"), cfg.grid.dim);
  if (j.contains("solver")) cfg.solver = parse_solver(j.at("solver"));
  if (j.contains("seeds")) {
    require_keys(j.at("seeds"), "seeds", {"root"});
    cfg.root_seed = get_or<std::uint64_t>(j.at("seeds"), "seeds", "root", 1);
  }
  cfg.output_prefix = get_or<std::string>(j, "config", "output_prefix", cfg.output_prefix);
  cfg.threads = get_or<int>(j, "config", "threads", 0);

  // Phase-map / omega-space compatibility is a configuration error, not a
  // runtime one.
  bool needs_interval = cfg.lagrangian.phase_map == PhaseMap::example1_f;
  bool is_interval = cfg.omega_space.kind == OmegaKind::interval_exchange;
  if (needs_interval != is_interval)
    throw ConfigError("lagrangian.phase_map",
                      "phase_map does not match omega_space.kind (example1 needs "
                      "interval_exchange, example2_pi needs torus_rotation)");

  cfg.echo = echo_config(cfg);
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file \"" + path + "\"");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("", std::string("config parse error: ") + e.what());
  }
  return parse_config(j);
}

void apply_override(nlohmann::json& j, const std::string& keyval) {
  auto eq = keyval.find('=');
  if (eq == std::string::npos)
    throw ConfigError("", "override must look like key.path=value: \"" + keyval + "\"");
  std::string path = keyval.substr(0, eq);
  std::string value = keyval.substr(eq + 1);
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(value);
  } catch (const nlohmann::json::exception&) {
    parsed = value;  // bare strings are allowed
  }
  nlohmann::json* node = &j;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  if (parts.empty()) throw ConfigError("", "empty override key");
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) node = &(*node)[parts[i]];
  (*node)[parts.back()] = parsed;
}

SkewProductSystem make_system(const OmegaConfig& cfg) {
  if (cfg.kind == OmegaKind::interval_exchange) return SkewProductSystem::interval_exchange();
  return SkewProductSystem::torus_rotation(cfg.dim, cfg.alpha, cfg.subdivision, cfg.permutation);
}

LagrangianModel make_model(const LagrangianConfig& cfg, int dim) {
  switch (cfg.kind) {
    case LagrangianKind::free_kinetic:
      return LagrangianModel::free_kinetic(dim, cfg.mass, cfg.phase_map);
    case LagrangianKind::time_forced_kinetic:
      return LagrangianModel::time_forced(dim, cfg.h_coeffs, cfg.mass, cfg.phase_map);
    case LagrangianKind::mechanical:
      return LagrangianModel::mechanical(dim, cfg.v_coeffs, cfg.mass, cfg.phase_map);
    default:
      return LagrangianModel::custom_trig(dim, cfg.h_coeffs, cfg.v_coeffs, cfg.mass,
                                          cfg.phase_map);
  }
}

SpaceGrid make_grid(const GridConfig& cfg) { return SpaceGrid(cfg.dim, cfg.n_per_dim); }

std::uint64_t component_seed(const ExperimentConfig& cfg, const std::string& tag) {
  return split_seed(cfg.root_seed, tag);
}

}  // namespace wkam
