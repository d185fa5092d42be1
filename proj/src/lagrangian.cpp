#include "wkam/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wkam {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kFdStep = 1e-5;

Vec solve_small(const SmallMat& A, const Vec& rhs) {
  if (A.dim == 1) {
    if (std::abs(A.m[0][0]) < 1e-10)
      throw DiagnosticError("Tonelli violation: singular velocity Hessian");
    return Vec::of(rhs[0] / A.m[0][0]);
  }
  double det = A.m[0][0] * A.m[1][1] - A.m[0][1] * A.m[1][0];
  if (std::abs(det) < 1e-10)
    throw DiagnosticError("Tonelli violation: singular velocity Hessian");
  return Vec::of((rhs[0] * A.m[1][1] - rhs[1] * A.m[0][1]) / det,
                 (rhs[1] * A.m[0][0] - rhs[0] * A.m[1][0]) / det);
}

double min_eigenvalue(const SmallMat& A) {
  if (A.dim == 1) return A.m[0][0];
  double tr = A.m[0][0] + A.m[1][1];
  double det = A.m[0][0] * A.m[1][1] - A.m[0][1] * A.m[1][0];
  double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  return tr / 2.0 - disc;
}

}  // namespace

LagrangianModel LagrangianModel::free_kinetic(int dim, double mass, PhaseMap pm) {
  LagrangianModel m;
  m.kind_ = LagrangianKind::free_kinetic;
  m.dim_ = dim;
  m.mass_ = mass;
  m.phase_map_ = pm;
  if (dim < 1 || dim > kMaxDim) throw InvalidInputError("LagrangianModel: dim must be 1 or 2");
  if (mass <= 0.0) throw InvalidInputError("LagrangianModel: mass must be positive");
  return m;
}

LagrangianModel LagrangianModel::time_forced(int dim, std::vector<HTerm> h, double mass,
                                             PhaseMap pm) {
  LagrangianModel m = free_kinetic(dim, mass, pm);
  m.kind_ = LagrangianKind::time_forced_kinetic;
  m.h_ = std::move(h);
  return m;
}

LagrangianModel LagrangianModel::mechanical(int dim, std::vector<VTerm> potential, double mass,
                                            PhaseMap pm) {
  LagrangianModel m = free_kinetic(dim, mass, pm);
  m.kind_ = LagrangianKind::mechanical;
  m.potential_ = std::move(potential);
  return m;
}

LagrangianModel LagrangianModel::custom_trig(int dim, std::vector<HTerm> h,
                                             std::vector<VTerm> potential, double mass,
                                             PhaseMap pm) {
  LagrangianModel m = free_kinetic(dim, mass, pm);
  m.kind_ = LagrangianKind::custom_trig;
  m.h_ = std::move(h);
  m.potential_ = std::move(potential);
  return m;
}

LagrangianModel LagrangianModel::custom_callable(
    int dim, std::function<double(const TorusPoint&, const Vec&, double)> fn, PhaseMap pm) {
  LagrangianModel m = free_kinetic(dim, 1.0, pm);
  m.kind_ = LagrangianKind::custom;
  m.fn_ = std::move(fn);
  return m;
}

int LagrangianModel::max_time_harmonic() const {
  int k = 0;
  for (const auto& t : h_) k = std::max(k, std::abs(t.k));
  for (const auto& t : potential_) k = std::max(k, std::abs(t.kt));
  return k;
}

double LagrangianModel::phase(const OmegaPoint& omega) const {
  switch (phase_map_) {
    case PhaseMap::example1_f:
      if (omega.kind != OmegaKind::interval_exchange)
        throw InvalidInputError("phase map example1 requires an interval-exchange omega");
      return interval_exchange_f(omega.first());
    case PhaseMap::example2_pi:
      if (omega.kind != OmegaKind::torus_rotation)
        throw InvalidInputError("phase map example2_pi requires a torus-rotation omega");
      return omega.first();
  }
  return 0.0;
}

double LagrangianModel::h_value(double tau) const {
  double s = 0.0;
  for (const auto& term : h_)
    s += term.a * std::cos(kTwoPi * term.k * tau) + term.b * std::sin(kTwoPi * term.k * tau);
  return s;
}

double LagrangianModel::potential_value(const TorusPoint& x, double tau) const {
  double s = 0.0;
  for (const auto& term : potential_) {
    double arg = term.kt * tau;
    for (int i = 0; i < dim_; ++i) arg += term.kx[static_cast<std::size_t>(i)] * x[i];
    s += term.c * std::cos(kTwoPi * arg);
  }
  return s;
}

double LagrangianModel::eval_shifted(const TorusPoint& x, const Vec& v, double tau) const {
  if (kind_ == LagrangianKind::custom) return fn_(x, v, tau);
  return 0.5 * mass_ * v.norm2() + h_value(tau) - potential_value(x, tau);
}

double LagrangianModel::eval(const TorusPoint& x, const Vec& v, double t,
                             const OmegaPoint& omega) const {
  if (x.dim() != dim_ || v.dim() != dim_)
    throw InvalidInputError("eval_L: dimension mismatch");
  return eval_shifted(x, v, mod1(t + phase(omega)));
}

std::pair<Vec, Vec> LagrangianModel::partials(const TorusPoint& x, const Vec& v, double t,
                                              const OmegaPoint& omega) const {
  double tau = mod1(t + phase(omega));
  Vec dx(dim_), dv(dim_);
  if (kind_ != LagrangianKind::custom) {
    for (int i = 0; i < dim_; ++i) dv[i] = mass_ * v[i];
    for (const auto& term : potential_) {
      double arg = term.kt * tau;
      for (int i = 0; i < dim_; ++i) arg += term.kx[static_cast<std::size_t>(i)] * x[i];
      double s = std::sin(kTwoPi * arg);
      // L contains -V, so dL/dx = +2 pi k c sin(arg).
      for (int i = 0; i < dim_; ++i)
        dx[i] += kTwoPi * term.kx[static_cast<std::size_t>(i)] * term.c * s;
    }
    return {dx, dv};
  }
  for (int i = 0; i < dim_; ++i) {
    Vec xp = x.coords(), xm = x.coords();
    xp[i] += kFdStep;
    xm[i] -= kFdStep;
    dx[i] = (eval_shifted(wrap(xp), v, tau) - eval_shifted(wrap(xm), v, tau)) / (2 * kFdStep);
    Vec vp = v, vm = v;
    vp[i] += kFdStep;
    vm[i] -= kFdStep;
    dv[i] = (eval_shifted(x, vp, tau) - eval_shifted(x, vm, tau)) / (2 * kFdStep);
  }
  return {dx, dv};
}

SmallMat LagrangianModel::velocity_hessian(const TorusPoint& x, const Vec& v, double t,
                                           const OmegaPoint& omega) const {
  SmallMat H;
  H.dim = dim_;
  if (kind_ != LagrangianKind::custom) {
    for (int i = 0; i < dim_; ++i) H.m[i][i] = mass_;
    return H;
  }
  double tau = mod1(t + phase(omega));
  double f0 = eval_shifted(x, v, tau);
  for (int i = 0; i < dim_; ++i) {
    for (int j = i; j < dim_; ++j) {
      if (i == j) {
        Vec vp = v, vm = v;
        vp[i] += kFdStep;
        vm[i] -= kFdStep;
        H.m[i][i] = (eval_shifted(x, vp, tau) - 2 * f0 + eval_shifted(x, vm, tau)) /
                    (kFdStep * kFdStep);
      } else {
        Vec vpp = v, vpm = v, vmp = v, vmm = v;
        vpp[i] += kFdStep; vpp[j] += kFdStep;
        vpm[i] += kFdStep; vpm[j] -= kFdStep;
        vmp[i] -= kFdStep; vmp[j] += kFdStep;
        vmm[i] -= kFdStep; vmm[j] -= kFdStep;
        H.m[i][j] = H.m[j][i] =
            (eval_shifted(x, vpp, tau) - eval_shifted(x, vpm, tau) -
             eval_shifted(x, vmp, tau) + eval_shifted(x, vmm, tau)) /
            (4 * kFdStep * kFdStep);
      }
    }
  }
  return H;
}

Vec LagrangianModel::el_acceleration(const TorusPoint& x, const Vec& v, double t,
                                     const OmegaPoint& omega) const {
  if (kind_ != LagrangianKind::custom) {
    // d2L/dxdv = d2L/dtdv = 0 for the trig family, so a = (dL/dx) / m.
    auto [dx, dv] = partials(x, v, t, omega);
    (void)dv;
    return dx * (1.0 / mass_);
  }
  double tau = mod1(t + phase(omega));
  Vec rhs = partials(x, v, t, omega).first;
  // Mixed second derivatives by differencing dL/dv.
  auto dv_at = [&](const TorusPoint& xx, const Vec& vv, double tt) {
    Vec g(dim_);
    for (int i = 0; i < dim_; ++i) {
      Vec vp = vv, vm = vv;
      vp[i] += kFdStep;
      vm[i] -= kFdStep;
      g[i] = (eval_shifted(xx, vp, tt) - eval_shifted(xx, vm, tt)) / (2 * kFdStep);
    }
    return g;
  };
  for (int j = 0; j < dim_; ++j) {
    Vec xp = x.coords(), xm = x.coords();
    xp[j] += kFdStep;
    xm[j] -= kFdStep;
    Vec col = (dv_at(wrap(xp), v, tau) - dv_at(wrap(xm), v, tau)) * (1.0 / (2 * kFdStep));
    for (int i = 0; i < dim_; ++i) rhs[i] -= col[i] * v[j];
  }
  Vec dt_col = (dv_at(x, v, mod1(tau + kFdStep)) - dv_at(x, v, mod1(tau - kFdStep))) *
               (1.0 / (2 * kFdStep));
  for (int i = 0; i < dim_; ++i) rhs[i] -= dt_col[i];
  return solve_small(velocity_hessian(x, v, t, omega), rhs);
}

HamiltonianView::HamiltonianView(const LagrangianModel& model, LegendreMode mode, double v_cap)
    : model_(&model), mode_(mode), v_cap_(v_cap) {}

std::pair<double, Vec> HamiltonianView::numeric_sup(const TorusPoint& x, const Vec& p, double t,
                                                    const OmegaPoint& omega) const {
  int d = model_->dim();
  auto g = [&](const Vec& v) { return p.dot(v) - model_->eval(x, v, t, omega); };
  // Coarse grid scan.
  const int n = 33;
  Vec best(d);
  double best_val = -std::numeric_limits<double>::infinity();
  int total = (d == 1) ? n : n * n;
  for (int flat = 0; flat < total; ++flat) {
    Vec v(d);
    v[0] = -v_cap_ + 2 * v_cap_ * (flat % n) / (n - 1);
    if (d == 2) v[1] = -v_cap_ + 2 * v_cap_ * (flat / n) / (n - 1);
    double val = g(v);
    if (val > best_val) {
      best_val = val;
      best = v;
    }
  }
  // Per-axis golden-section polish; g is strictly concave in v.
  const double gr = 0.6180339887498949;
  double bracket = 2 * v_cap_ / (n - 1);
  for (int iter = 0; iter < 200 && bracket > 1e-13; ++iter) {
    for (int axis = 0; axis < d; ++axis) {
      double lo = best[axis] - bracket, hi = best[axis] + bracket;
      double c1 = hi - gr * (hi - lo), c2 = lo + gr * (hi - lo);
      Vec v1 = best, v2 = best;
      for (int inner = 0; inner < 60; ++inner) {
        v1[axis] = c1;
        v2[axis] = c2;
        if (g(v1) > g(v2)) {
          hi = c2;
        } else {
          lo = c1;
        }
        c1 = hi - gr * (hi - lo);
        c2 = lo + gr * (hi - lo);
      }
      best[axis] = 0.5 * (lo + hi);
    }
    bracket *= 0.5;
    best_val = g(best);
  }
  if (best.norm_inf() > v_cap_ - 1e-9) {
    std::ostringstream msg;
    msg << "numeric Legendre sup did not converge: maximizer at the velocity cap, best value "
        << best_val << " (raise v_cap)";
    throw DiagnosticError(msg.str());
  }
  return {g(best), best};
}

double HamiltonianView::value(const TorusPoint& x, const Vec& p, double t,
                              const OmegaPoint& omega) const {
  if (!p.finite()) throw InvalidInputError("hamiltonian: non-finite momentum");
  if (mode_ == LegendreMode::closed_form && model_->has_closed_form()) {
    double tau = mod1(t + model_->phase(omega));
    return p.norm2() / (2.0 * model_->mass()) - model_->h_value(tau) +
           model_->potential_value(x, tau);
  }
  return numeric_sup(x, p, t, omega).first;
}

Vec HamiltonianView::gradient_p(const TorusPoint& x, const Vec& p, double t,
                                const OmegaPoint& omega) const {
  if (mode_ == LegendreMode::closed_form && model_->has_closed_form())
    return p * (1.0 / model_->mass());
  return numeric_sup(x, p, t, omega).second;
}

TonelliReport validate_tonelli(const LagrangianModel& model, const SkewProductSystem* sys,
                               int sample_budget, std::uint64_t seed) {
  Rng rng(seed);
  int d = model.dim();
  const int n = std::max(8, sample_budget);

  OmegaPoint omega;
  if (sys != nullptr) {
    omega = sample_omega(*sys, rng.bits());
  } else {
    omega.kind = model.phase_map() == PhaseMap::example2_pi ? OmegaKind::torus_rotation
                                                            : OmegaKind::interval_exchange;
    omega.coords = {0.0};
    if (omega.kind == OmegaKind::torus_rotation) omega.coords = {0.0, 0.0};
  }

  auto random_state = [&](double v_scale) {
    Vec xr(d), vr(d);
    for (int i = 0; i < d; ++i) {
      xr[i] = rng.uniform01();
      vr[i] = rng.uniform(-v_scale, v_scale);
    }
    return std::make_pair(wrap(xr), vr);
  };

  TonelliReport report;

  {
    TonelliCheck c{"periodicity", true, 0.0, ""};
    for (int i = 0; i < n; ++i) {
      auto [x, v] = random_state(3.0);
      double t = rng.uniform(0.0, 1.0);
      double r = std::abs(model.eval(x, v, t + 1.0, omega) - model.eval(x, v, t, omega));
      if (r > c.worst) {
        c.worst = r;
        std::ostringstream w;
        w << "|L(t+1)-L(t)| = " << r << " at t = " << t;
        c.witness = w.str();
      }
    }
    c.pass = c.worst <= 1e-9;
    report.checks.push_back(std::move(c));
  }

  {
    TonelliCheck c{"convexity", true, std::numeric_limits<double>::infinity(), ""};
    for (int i = 0; i < n; ++i) {
      auto [x, v] = random_state(3.0);
      double t = rng.uniform(0.0, 1.0);
      double eig = min_eigenvalue(model.velocity_hessian(x, v, t, omega));
      if (eig < c.worst) {
        c.worst = eig;
        std::ostringstream w;
        w << "min velocity-Hessian eigenvalue " << eig << " at x=" << x[0] << " v=" << v[0]
          << " t=" << t;
        c.witness = w.str();
      }
    }
    c.pass = c.worst > 1e-8;
    report.checks.push_back(std::move(c));
  }

  {
    // L(x,v,t)/|v| must grow along |v| = 10, 20, 40 in every sampled direction.
    TonelliCheck c{"superlinearity", true, 0.0, ""};
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      auto [x, v] = random_state(1.0);
      double t = rng.uniform(0.0, 1.0);
      double vn = v.norm();
      if (vn < 1e-9) continue;
      Vec dir = v * (1.0 / vn);
      double prev = -std::numeric_limits<double>::infinity();
      for (double speed : {10.0, 20.0, 40.0}) {
        double ratio = model.eval(x, dir * speed, t, omega) / speed;
        if (ratio <= prev + 1e-12) {
          ok = false;
          std::ostringstream w;
          w << "L/|v| not increasing at |v|=" << speed << " (ratio " << ratio << " after "
            << prev << ")";
          c.witness = w.str();
          c.worst = ratio - prev;
          break;
        }
        prev = ratio;
      }
    }
    c.pass = ok;
    report.checks.push_back(std::move(c));
  }

  if (sys != nullptr) {
    TonelliCheck c{"driver_matching", true, 0.0, ""};
    for (int i = 0; i < n; ++i) {
      auto [x, v] = random_state(3.0);
      double t = rng.uniform(0.0, 1.0);
      double s = rng.uniform(-2.0, 2.0);
      OmegaPoint w = sample_omega(*sys, rng.bits());
      double r = std::abs(model.eval(x, v, t + s, w) - model.eval(x, v, t, sys->theta(s, w)));
      if (r > c.worst) {
        c.worst = r;
        std::ostringstream msg;
        msg << "matching residual " << r << " at s = " << s;
        c.witness = msg.str();
      }
    }
    c.pass = c.worst <= 1e-12;
    report.checks.push_back(std::move(c));
  }

  return report;
}

}  // namespace wkam
