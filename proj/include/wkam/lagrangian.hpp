#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wkam/omega.hpp"
#include "wkam/torus.hpp"

namespace wkam {

enum class LagrangianKind { free_kinetic, time_forced_kinetic, mechanical, custom_trig, custom };

/// How omega shifts the time argument: tau = t + phase(omega).
enum class PhaseMap { example1_f, example2_pi };

/// One harmonic of the forcing h: a cos(2 pi k tau) + b sin(2 pi k tau).
struct HTerm {
  int k = 0;
  double a = 0.0;
  double b = 0.0;
};

/// One harmonic of the potential: c * cos(2 pi (kx . x + kt tau)).
struct VTerm {
  std::array<int, kMaxDim> kx{0, 0};
  int kt = 0;
  double c = 0.0;
};

/// 2x2-capable symmetric matrix for velocity Hessians.
struct SmallMat {
  double m[kMaxDim][kMaxDim] = {{0.0, 0.0}, {0.0, 0.0}};
  int dim = 1;
};

/// Evaluatable Tonelli Lagrangian
///
///   L(x, v, t, omega) = (m/2) |v|^2 + h(t + phase(omega)) - V(x, t + phase(omega))
///
/// for the built-in trig family; `custom` wraps an arbitrary callable
/// F(x, v, tau) of the shifted time and falls back to finite differences for
/// every derivative. The shifted time is reduced mod 1 before any evaluation,
/// so periodicity in t holds exactly.
class LagrangianModel {
 public:
  static LagrangianModel free_kinetic(int dim, double mass = 1.0,
                                      PhaseMap pm = PhaseMap::example1_f);
  static LagrangianModel time_forced(int dim, std::vector<HTerm> h, double mass = 1.0,
                                     PhaseMap pm = PhaseMap::example1_f);
  static LagrangianModel mechanical(int dim, std::vector<VTerm> potential, double mass = 1.0,
                                    PhaseMap pm = PhaseMap::example1_f);
  static LagrangianModel custom_trig(int dim, std::vector<HTerm> h, std::vector<VTerm> potential,
                                     double mass = 1.0, PhaseMap pm = PhaseMap::example1_f);
  /// Test hook: arbitrary F(x, v, tau). Derivatives by central differences.
  static LagrangianModel custom_callable(
      int dim, std::function<double(const TorusPoint&, const Vec&, double)> fn,
      PhaseMap pm = PhaseMap::example1_f);

  LagrangianKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double mass() const { return mass_; }
  PhaseMap phase_map() const { return phase_map_; }
  const std::vector<HTerm>& h_terms() const { return h_; }
  const std::vector<VTerm>& v_terms() const { return potential_; }
  bool has_closed_form() const { return kind_ != LagrangianKind::custom; }
  /// Largest harmonic index appearing in h or V (time direction).
  int max_time_harmonic() const;

  double phase(const OmegaPoint& omega) const;

  double eval(const TorusPoint& x, const Vec& v, double t, const OmegaPoint& omega) const;
  /// (dL/dx, dL/dv). dL/dv is the momentum conjugate to v.
  std::pair<Vec, Vec> partials(const TorusPoint& x, const Vec& v, double t,
                               const OmegaPoint& omega) const;
  SmallMat velocity_hessian(const TorusPoint& x, const Vec& v, double t,
                            const OmegaPoint& omega) const;

  /// Solves (d2L/dv2) a = dL/dx - (d2L/dxdv) v - (d2L/dtdv).
  Vec el_acceleration(const TorusPoint& x, const Vec& v, double t,
                      const OmegaPoint& omega) const;

  double h_value(double tau) const;
  double potential_value(const TorusPoint& x, double tau) const;

 private:
  LagrangianModel() = default;
  double eval_shifted(const TorusPoint& x, const Vec& v, double tau) const;

  LagrangianKind kind_ = LagrangianKind::free_kinetic;
  int dim_ = 1;
  double mass_ = 1.0;
  std::vector<HTerm> h_;
  std::vector<VTerm> potential_;
  PhaseMap phase_map_ = PhaseMap::example1_f;
  std::function<double(const TorusPoint&, const Vec&, double)> fn_;
};

enum class LegendreMode { closed_form, numeric_sup };

/// H(x, p, t, omega) = sup_v { p.v - L(x, v, t, omega) }.
class HamiltonianView {
 public:
  explicit HamiltonianView(const LagrangianModel& model,
                           LegendreMode mode = LegendreMode::closed_form,
                           double v_cap = 8.0);

  double value(const TorusPoint& x, const Vec& p, double t, const OmegaPoint& omega) const;
  /// The maximizing velocity, i.e. dH/dp.
  Vec gradient_p(const TorusPoint& x, const Vec& p, double t, const OmegaPoint& omega) const;

  LegendreMode mode() const { return mode_; }

 private:
  std::pair<double, Vec> numeric_sup(const TorusPoint& x, const Vec& p, double t,
                                     const OmegaPoint& omega) const;

  const LagrangianModel* model_;
  LegendreMode mode_;
  double v_cap_;
};

struct TonelliCheck {
  std::string name;
  bool pass = false;
  double worst = 0.0;
  std::string witness;
};

struct TonelliReport {
  std::vector<TonelliCheck> checks;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  const TonelliCheck* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

/// Samples periodicity, convexity (min velocity-Hessian eigenvalue),
/// superlinearity growth along |v| in {10, 20, 40}, and, when a system is
/// given, the L(x,v,t+s,omega) = L(x,v,t,theta(s)omega) matching residual.
TonelliReport validate_tonelli(const LagrangianModel& model, const SkewProductSystem* sys,
                               int sample_budget, std::uint64_t seed);

}  // namespace wkam
