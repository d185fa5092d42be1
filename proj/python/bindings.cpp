#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wkam/runner.hpp"

namespace py = pybind11;
using namespace wkam;

namespace {

Vec to_vec(const std::vector<double>& v) {
  if (v.empty() || v.size() > kMaxDim) throw InvalidInputError("expected a 1- or 2-vector");
  Vec out(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<int>(i)] = v[i];
  return out;
}

std::vector<double> from_vec(const Vec& v) {
  std::vector<double> out(static_cast<std::size_t>(v.dim()));
  for (int i = 0; i < v.dim(); ++i) out[static_cast<std::size_t>(i)] = v[i];
  return out;
}

std::vector<HTerm> to_h_terms(const std::vector<std::tuple<int, double, double>>& rows) {
  std::vector<HTerm> out;
  for (const auto& [k, a, b] : rows) out.push_back(HTerm{k, a, b});
  return out;
}

std::vector<VTerm> to_v_terms(int dim, const std::vector<std::vector<double>>& rows) {
  std::vector<VTerm> out;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != dim + 2)
      throw InvalidInputError("potential rows are [k_x per dimension..., k_t, c]");
    VTerm t;
    for (int i = 0; i < dim; ++i) t.kx[static_cast<std::size_t>(i)] = static_cast<int>(row[i]);
    t.kt = static_cast<int>(row[static_cast<std::size_t>(dim)]);
    t.c = row[static_cast<std::size_t>(dim) + 1];
    out.push_back(t);
  }
  return out;
}

PhaseMap to_phase_map(const std::string& name) {
  if (name == "example1") return PhaseMap::example1_f;
  if (name == "example2_pi") return PhaseMap::example2_pi;
  throw InvalidInputError("phase_map must be example1 or example2_pi");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "stochastic weak KAM experiments on flat tori";
  m.attr("__version__") = kVersion;

  py::register_exception<InvalidInputError>(m, "InvalidInputError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DiagnosticError>(m, "DiagnosticError", PyExc_RuntimeError);

  // --- torus geometry ------------------------------------------------------
  m.def(
      "wrap", [](const std::vector<double>& raw) { return from_vec(wrap(to_vec(raw)).coords()); },
      py::arg("raw"), "Componentwise reduction mod 1.");
  m.def(
      "displacement",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        return from_vec(displacement(wrap(to_vec(a)), wrap(to_vec(b))));
      },
      py::arg("a"), py::arg("b"), "Minimal-norm lift of b - a.");
  m.def(
      "winding_lifts",
      [](const std::vector<double>& a, const std::vector<double>& b, int w_max) {
        std::vector<std::vector<double>> out;
        for (const Vec& lift : winding_lifts(wrap(to_vec(a)), wrap(to_vec(b)), w_max))
          out.push_back(from_vec(lift));
        return out;
      },
      py::arg("a"), py::arg("b"), py::arg("w_max"));

  py::class_<SpaceGrid>(m, "SpaceGrid")
      .def(py::init<int, int>(), py::arg("dim"), py::arg("n_per_dim"))
      .def_property_readonly("dim", &SpaceGrid::dim)
      .def_property_readonly("n_per_dim", &SpaceGrid::n_per_dim)
      .def_property_readonly("num_nodes", &SpaceGrid::num_nodes)
      .def("node_point",
           [](const SpaceGrid& g, int i) { return from_vec(g.node_point(i).coords()); })
      .def("nearest_node", [](const SpaceGrid& g, const std::vector<double>& p) {
        return g.nearest_node(wrap(to_vec(p)));
      });

  // --- stochastic base -----------------------------------------------------
  py::class_<OmegaPoint>(m, "OmegaPoint")
      .def_property_readonly(
          "kind",
          [](const OmegaPoint& w) {
            return w.kind == OmegaKind::interval_exchange ? "interval_exchange"
                                                          : "torus_rotation";
          })
      .def_readonly("coords", &OmegaPoint::coords)
      .def("__repr__", [](const OmegaPoint& w) {
        std::string s = "OmegaPoint([";
        for (std::size_t i = 0; i < w.coords.size(); ++i)
          s += (i ? ", " : "") + std::to_string(w.coords[i]);
        return s + "])";
      });

  py::class_<SkewProductSystem>(m, "SkewProductSystem")
      .def_static("interval_exchange", &SkewProductSystem::interval_exchange)
      .def_static("torus_rotation", &SkewProductSystem::torus_rotation, py::arg("dim"),
                  py::arg("alpha") = std::vector<double>{}, py::arg("subdivision") = 1,
                  py::arg("permutation") = std::vector<int>{})
      .def_property_readonly("dim", &SkewProductSystem::dim)
      .def("theta", &SkewProductSystem::theta, py::arg("s"), py::arg("omega"))
      .def("f", &SkewProductSystem::f)
      .def("f_inverse", &SkewProductSystem::f_inverse)
      .def("sample", [](const SkewProductSystem& sys, std::uint64_t seed) {
        return sample_omega(sys, seed);
      });
  m.def("check_group_law", &check_group_law, py::arg("sys"), py::arg("trials"), py::arg("seed"));
  m.def("check_measure_preservation", &check_measure_preservation, py::arg("sys"), py::arg("t"),
        py::arg("samples"), py::arg("bins"), py::arg("seed"));

  // --- Lagrangian models ---------------------------------------------------
  py::class_<LagrangianModel>(m, "LagrangianModel")
      .def_static(
          "free_kinetic",
          [](int dim, double mass, const std::string& pm) {
            return LagrangianModel::free_kinetic(dim, mass, to_phase_map(pm));
          },
          py::arg("dim") = 1, py::arg("mass") = 1.0, py::arg("phase_map") = "example1")
      .def_static(
          "time_forced",
          [](int dim, const std::vector<std::tuple<int, double, double>>& h, double mass,
             const std::string& pm) {
            return LagrangianModel::time_forced(dim, to_h_terms(h), mass, to_phase_map(pm));
          },
          py::arg("dim"), py::arg("h_coeffs"), py::arg("mass") = 1.0,
          py::arg("phase_map") = "example1")
      .def_static(
          "mechanical",
          [](int dim, const std::vector<std::vector<double>>& v, double mass,
             const std::string& pm) {
            return LagrangianModel::mechanical(dim, to_v_terms(dim, v), mass, to_phase_map(pm));
          },
          py::arg("dim"), py::arg("V_coeffs"), py::arg("mass") = 1.0,
          py::arg("phase_map") = "example1")
      .def_static(
          "custom_trig",
          [](int dim, const std::vector<std::tuple<int, double, double>>& h,
             const std::vector<std::vector<double>>& v, double mass, const std::string& pm) {
            return LagrangianModel::custom_trig(dim, to_h_terms(h), to_v_terms(dim, v), mass,
                                                to_phase_map(pm));
          },
          py::arg("dim"), py::arg("h_coeffs"), py::arg("V_coeffs"), py::arg("mass") = 1.0,
          py::arg("phase_map") = "example1")
      .def_property_readonly("dim", &LagrangianModel::dim)
      .def("phase", &LagrangianModel::phase)
      .def("eval",
           [](const LagrangianModel& model, const std::vector<double>& x,
              const std::vector<double>& v, double t, const OmegaPoint& w) {
             return model.eval(wrap(to_vec(x)), to_vec(v), t, w);
           })
      .def("partials",
           [](const LagrangianModel& model, const std::vector<double>& x,
              const std::vector<double>& v, double t, const OmegaPoint& w) {
             auto [dx, dv] = model.partials(wrap(to_vec(x)), to_vec(v), t, w);
             return py::make_tuple(from_vec(dx), from_vec(dv));
           })
      .def("el_acceleration",
           [](const LagrangianModel& model, const std::vector<double>& x,
              const std::vector<double>& v, double t, const OmegaPoint& w) {
             return from_vec(model.el_acceleration(wrap(to_vec(x)), to_vec(v), t, w));
           })
      .def("hamiltonian",
           [](const LagrangianModel& model, const std::vector<double>& x,
              const std::vector<double>& p, double t, const OmegaPoint& w) {
             return HamiltonianView(model).value(wrap(to_vec(x)), to_vec(p), t, w);
           });

  m.def(
      "validate_tonelli",
      [](const LagrangianModel& model, const SkewProductSystem* sys, int budget,
         std::uint64_t seed) {
        TonelliReport rep = validate_tonelli(model, sys, budget, seed);
        py::list checks;
        for (const auto& c : rep.checks) {
          py::dict d;
          d["name"] = c.name;
          d["pass"] = c.pass;
          d["worst"] = c.worst;
          d["witness"] = c.witness;
          checks.append(d);
        }
        py::dict out;
        out["pass"] = rep.all_pass();
        out["checks"] = checks;
        return out;
      },
      py::arg("model"), py::arg("system") = nullptr, py::arg("sample_budget") = 128,
      py::arg("seed") = 1);

  // --- critical value ------------------------------------------------------
  py::class_<CriticalValueEstimate>(m, "CriticalValueEstimate")
      .def_readonly("value", &CriticalValueEstimate::value)
      .def_readonly("method", &CriticalValueEstimate::method)
      .def_readonly("trace", &CriticalValueEstimate::trace)
      .def_readonly("M_trace", &CriticalValueEstimate::M_trace)
      .def_readonly("m_trace", &CriticalValueEstimate::m_trace)
      .def_readonly("sandwich_width", &CriticalValueEstimate::sandwich_width);

  m.def("alpha_closed_curves", &alpha_closed_curves, py::arg("omega"), py::arg("model"),
        py::arg("grid"), py::arg("n_t"), py::arg("v_cap") = 4.0, py::arg("n_max") = 4,
        py::arg("w_max") = 2, py::arg("threads") = 1);
  m.def("alpha_subadditive", &alpha_subadditive, py::arg("omega"), py::arg("model"),
        py::arg("grid"), py::arg("n_t"), py::arg("v_cap") = 4.0, py::arg("n_iters") = 64,
        py::arg("threads") = 1);

  m.def(
      "peierls_diagonal",
      [](const OmegaPoint& omega, const LagrangianModel& model, double alpha,
         std::pair<int, int> window, const SpaceGrid& grid, int n_t, double v_cap, int threads) {
        GridField diag = peierls_diagonal(omega, model, alpha, {window.first, window.second},
                                          grid, n_t, v_cap, threads);
        std::vector<std::vector<double>> out(static_cast<std::size_t>(diag.n_t));
        for (int j = 0; j < diag.n_t; ++j)
          for (int x = 0; x < grid.num_nodes(); ++x)
            out[static_cast<std::size_t>(j)].push_back(diag.at(j, x));
        return out;
      },
      py::arg("omega"), py::arg("model"), py::arg("alpha"), py::arg("window"), py::arg("grid"),
      py::arg("n_t"), py::arg("v_cap") = 4.0, py::arg("threads") = 1);

  // --- weak KAM ------------------------------------------------------------
  py::class_<WeakKamSolution>(m, "WeakKamSolution")
      .def_readonly("alpha", &WeakKamSolution::alpha)
      .def_readonly("trace", &WeakKamSolution::trace)
      .def_readonly("exactly_converged", &WeakKamSolution::exactly_converged)
      .def_property_readonly("n_t", [](const WeakKamSolution& s) { return s.u.n_t; })
      .def("at",
           [](const WeakKamSolution& s, int slice, int node) { return s.u.at(slice, node); })
      .def("values", [](const WeakKamSolution& s) {
        std::vector<std::vector<double>> out(static_cast<std::size_t>(s.u.n_t));
        for (int j = 0; j < s.u.n_t; ++j)
          for (int x = 0; x < s.u.grid.num_nodes(); ++x)
            out[static_cast<std::size_t>(j)].push_back(s.u.at(j, x));
        return out;
      });

  m.def(
      "weak_kam_solve",
      [](const OmegaPoint& omega, const LagrangianModel& model, double alpha,
         const SpaceGrid& grid, int n_t, int n_burn, int n_max, double v_cap,
         const std::string& direction, int threads) {
        WeakKamParams params{n_burn, n_max, v_cap, threads};
        Direction dir = direction == "forward" ? Direction::forward : Direction::backward;
        return weak_kam_solve(omega, model, alpha, std::vector<double>(grid.num_nodes(), 0.0),
                              grid, n_t, params, dir);
      },
      py::arg("omega"), py::arg("model"), py::arg("alpha"), py::arg("grid"), py::arg("n_t"),
      py::arg("n_burn") = 16, py::arg("n_max") = 128, py::arg("v_cap") = 4.0,
      py::arg("direction") = "backward", py::arg("threads") = 1);

  m.def(
      "viscosity_check",
      [](const WeakKamSolution& sol, const OmegaPoint& omega, const LagrangianModel& model,
         double alpha) {
        ViscosityReport rep = viscosity_check(sol, omega, model, alpha);
        py::dict out;
        out["subsolution_defect"] = rep.subsolution_defect;
        out["residual_sup"] = rep.residual_sup;
        out["calibration_max"] = rep.calibration_max;
        out["calibration_mean"] = rep.calibration_mean;
        return out;
      },
      py::arg("solution"), py::arg("omega"), py::arg("model"), py::arg("alpha"));

  m.def(
      "calibration_check",
      [](const WeakKamSolution& sol, const OmegaPoint& omega, const LagrangianModel& model,
         double alpha, int sample_slices, double s, int threads) {
        CalibrationReport rep =
            calibration_check(sol, omega, model, alpha, sample_slices, s, threads);
        py::dict out;
        out["max_equality_defect"] = rep.max_equality_defect;
        out["max_domination_violation"] = rep.max_domination_violation;
        return out;
      },
      py::arg("solution"), py::arg("omega"), py::arg("model"), py::arg("alpha"),
      py::arg("sample_slices") = 4, py::arg("s") = 1.0, py::arg("threads") = 1);

  // --- experiment runner ---------------------------------------------------
  m.def(
      "run_reproduce",
      [](const std::string& suite, const std::string& out_prefix, int threads) {
        RunResult res = run_reproduce(suite, out_prefix, threads);
        py::dict out;
        out["pass"] = res.pass;
        out["files"] = res.files;
        out["failures"] = res.failures;
        return out;
      },
      py::arg("suite"), py::arg("out_prefix"), py::arg("threads") = 0);
}
