#include "wkam/omega.hpp"

#include <algorithm>
#include <cmath>

namespace wkam {

// Translate the middle third up and the top third down.
double interval_exchange_f(double x) {
  if (x < 1.0 / 3.0) return x;
  if (x < 2.0 / 3.0) return x + 1.0 / 3.0;
  return x - 1.0 / 3.0;
}

double interval_exchange_f_inverse(double y) {
  if (y < 1.0 / 3.0) return y;
  if (y < 2.0 / 3.0) return y + 1.0 / 3.0;
  return y - 1.0 / 3.0;
}

SkewProductSystem SkewProductSystem::interval_exchange() {
  SkewProductSystem sys;
  sys.kind_ = OmegaKind::interval_exchange;
  sys.dim_ = 1;
  sys.rotation_ = {1.0};
  return sys;
}

SkewProductSystem SkewProductSystem::torus_rotation(int dim, std::vector<double> alpha_tail,
                                                    int subdivision,
                                                    std::vector<int> permutation) {
  if (dim < 1) throw InvalidInputError("torus_rotation: dim must be >= 1");
  if (subdivision < 1) throw InvalidInputError("torus_rotation: subdivision must be >= 1");
  SkewProductSystem sys;
  sys.kind_ = OmegaKind::torus_rotation;
  sys.dim_ = dim;
  sys.rotation_.assign(static_cast<std::size_t>(dim), 1.0);
  if (alpha_tail.empty()) {
    // Rationally independent in exact arithmetic; square-free radicands.
    static const double defaults[] = {std::sqrt(2.0), std::sqrt(3.0), std::sqrt(5.0),
                                      std::sqrt(6.0), std::sqrt(7.0)};
    for (int i = 1; i < dim; ++i)
      sys.rotation_[static_cast<std::size_t>(i)] = defaults[(i - 1) % 5];
  } else {
    if (static_cast<int>(alpha_tail.size()) != dim - 1)
      throw InvalidInputError("torus_rotation: alpha must have dim-1 entries");
    for (int i = 1; i < dim; ++i)
      sys.rotation_[static_cast<std::size_t>(i)] = alpha_tail[static_cast<std::size_t>(i - 1)];
  }
  sys.subdivision_ = subdivision;
  int cubes = 1;
  for (int i = 0; i < dim; ++i) cubes *= subdivision;
  if (permutation.empty()) {
    sys.permutation_.resize(static_cast<std::size_t>(cubes));
    for (int i = 0; i < cubes; ++i) sys.permutation_[static_cast<std::size_t>(i)] = i;
  } else {
    if (static_cast<int>(permutation.size()) != cubes)
      throw InvalidInputError("torus_rotation: permutation must list subdivision^dim cubes");
    std::vector<bool> seen(static_cast<std::size_t>(cubes), false);
    for (int p : permutation) {
      if (p < 0 || p >= cubes || seen[static_cast<std::size_t>(p)])
        throw InvalidInputError("torus_rotation: permutation is not a bijection");
      seen[static_cast<std::size_t>(p)] = true;
    }
    sys.permutation_ = std::move(permutation);
  }
  sys.inverse_perm_.resize(sys.permutation_.size());
  for (std::size_t i = 0; i < sys.permutation_.size(); ++i)
    sys.inverse_perm_[static_cast<std::size_t>(sys.permutation_[i])] = static_cast<int>(i);
  return sys;
}

void SkewProductSystem::require_member(const OmegaPoint& w) const {
  if (w.kind != kind_ || static_cast<int>(w.coords.size()) != dim_)
    throw InvalidInputError("omega point does not belong to this system");
}

int SkewProductSystem::cube_of(const std::vector<double>& x) const {
  int cube = 0;
  int stride = 1;
  for (int i = 0; i < dim_; ++i) {
    int k = static_cast<int>(std::floor(x[static_cast<std::size_t>(i)] * subdivision_));
    k = std::clamp(k, 0, subdivision_ - 1);
    cube += k * stride;
    stride *= subdivision_;
  }
  return cube;
}

std::vector<double> SkewProductSystem::cube_corner(int cube) const {
  std::vector<double> corner(static_cast<std::size_t>(dim_));
  for (int i = 0; i < dim_; ++i) {
    corner[static_cast<std::size_t>(i)] =
        static_cast<double>(cube % subdivision_) / subdivision_;
    cube /= subdivision_;
  }
  return corner;
}

OmegaPoint SkewProductSystem::f(const OmegaPoint& w) const {
  require_member(w);
  OmegaPoint out = w;
  if (kind_ == OmegaKind::interval_exchange) {
    out.coords[0] = interval_exchange_f(w.coords[0]);
    return out;
  }
  int c = cube_of(w.coords);
  auto from = cube_corner(c);
  auto to = cube_corner(permutation_[static_cast<std::size_t>(c)]);
  for (int i = 0; i < dim_; ++i)
    out.coords[static_cast<std::size_t>(i)] =
        mod1(w.coords[static_cast<std::size_t>(i)] - from[static_cast<std::size_t>(i)] +
             to[static_cast<std::size_t>(i)]);
  return out;
}

OmegaPoint SkewProductSystem::f_inverse(const OmegaPoint& w) const {
  require_member(w);
  OmegaPoint out = w;
  if (kind_ == OmegaKind::interval_exchange) {
    out.coords[0] = interval_exchange_f_inverse(w.coords[0]);
    return out;
  }
  int c = cube_of(w.coords);
  auto from = cube_corner(c);
  auto to = cube_corner(inverse_perm_[static_cast<std::size_t>(c)]);
  for (int i = 0; i < dim_; ++i)
    out.coords[static_cast<std::size_t>(i)] =
        mod1(w.coords[static_cast<std::size_t>(i)] - from[static_cast<std::size_t>(i)] +
             to[static_cast<std::size_t>(i)]);
  return out;
}

OmegaPoint SkewProductSystem::theta(double s, const OmegaPoint& w) const {
  require_member(w);
  OmegaPoint y = f(w);
  if (kind_ == OmegaKind::interval_exchange) {
    // t + f(w) is read mod 1 so the flow stays in [0,1).
    y.coords[0] = mod1(s + y.coords[0]);
  } else {
    for (int i = 0; i < dim_; ++i)
      y.coords[static_cast<std::size_t>(i)] =
          mod1(y.coords[static_cast<std::size_t>(i)] +
               s * rotation_[static_cast<std::size_t>(i)]);
  }
  return f_inverse(y);
}

double SkewProductSystem::distance(const OmegaPoint& a, const OmegaPoint& b) const {
  require_member(a);
  require_member(b);
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) {
    double d = mod1(a.coords[static_cast<std::size_t>(i)] -
                    b.coords[static_cast<std::size_t>(i)]);
    d = std::min(d, 1.0 - d);
    s = std::max(s, d);
  }
  return s;
}

OmegaPoint sample_omega(const SkewProductSystem& sys, std::uint64_t seed) {
  Rng rng(seed);
  OmegaPoint w;
  w.kind = sys.kind();
  w.coords.resize(static_cast<std::size_t>(sys.dim()));
  for (int i = 0; i < sys.dim(); ++i)
    w.coords[static_cast<std::size_t>(i)] = rng.uniform01();
  return w;
}

double check_group_law(const SkewProductSystem& sys, int trials, std::uint64_t seed) {
  if (trials < 1) throw InvalidInputError("check_group_law: trials must be >= 1");
  Rng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    OmegaPoint w = sample_omega(sys, rng.bits());
    double s = rng.uniform(-2.0, 2.0);
    double t = rng.uniform(-2.0, 2.0);
    OmegaPoint lhs = sys.theta(s, sys.theta(t, w));
    OmegaPoint rhs = sys.theta(s + t, w);
    worst = std::max(worst, sys.distance(lhs, rhs));
  }
  return worst;
}

double check_measure_preservation(const SkewProductSystem& sys, double t, int samples,
                                  int bins, std::uint64_t seed) {
  if (bins < 1) throw InvalidInputError("check_measure_preservation: bins must be >= 1");
  if (samples < bins * 100)
    throw InvalidInputError("check_measure_preservation: need samples >= bins * 100");
  Rng rng(seed);
  std::vector<std::vector<int>> counts(
      static_cast<std::size_t>(sys.dim()),
      std::vector<int>(static_cast<std::size_t>(bins), 0));
  for (int i = 0; i < samples; ++i) {
    OmegaPoint w = sample_omega(sys, rng.bits());
    OmegaPoint pushed = sys.theta(t, w);
    for (int dpos = 0; dpos < sys.dim(); ++dpos) {
      int b = std::min(bins - 1, static_cast<int>(pushed.coords[static_cast<std::size_t>(dpos)] * bins));
      counts[static_cast<std::size_t>(dpos)][static_cast<std::size_t>(b)]++;
    }
  }
  double worst = 0.0;
  for (const auto& hist : counts)
    for (int c : hist)
      worst = std::max(worst, std::abs(static_cast<double>(c) / samples - 1.0 / bins));
  return worst;
}

}  // namespace wkam
