#pragma once

#include <cstdint>
#include <vector>

#include "wkam/core.hpp"

namespace wkam {

enum class OmegaKind { interval_exchange, torus_rotation };

/// The fixed piecewise translation with breakpoints 1/3 and 2/3, and its
/// inverse. Also used by the "example1" Lagrangian phase map.
double interval_exchange_f(double x);
double interval_exchange_f_inverse(double y);

/// A sample point of the probability space Omega. Payload coordinates are
/// kept in [0, 1).
struct OmegaPoint {
  OmegaKind kind = OmegaKind::interval_exchange;
  std::vector<double> coords;  // 1 entry for interval_exchange, dim entries otherwise

  double first() const { return coords.empty() ? 0.0 : coords[0]; }
};

/// The measure-preserving skew-product flow theta(s, .) on Omega, in the two
/// explicit constructions:
///
///  * interval_exchange: Omega = [0,1), f the piecewise translation with
///    breakpoints 1/3 and 2/3, theta(s, w) = f^{-1}((s + f(w)) mod 1).
///  * torus_rotation: Omega = T^dim, f a permutation of the n^dim subdivision
///    cubes by translations, phi(s) the linear translation by
///    s * (1, alpha_2, ..., alpha_dim), theta(s, w) = f^{-1}(phi(s)(f(w))).
///
/// P is Lebesgue in both cases.
class SkewProductSystem {
 public:
  /// Example with the fixed 1/3, 2/3 interval exchange.
  static SkewProductSystem interval_exchange();

  /// Torus rotation driven system. `alpha_tail` lists alpha_2..alpha_dim
  /// (dim-1 entries); empty selects the default sqrt(2), sqrt(3), ...
  /// `permutation` permutes the subdivision^dim cubes; empty = identity.
  static SkewProductSystem torus_rotation(int dim, std::vector<double> alpha_tail = {},
                                          int subdivision = 1,
                                          std::vector<int> permutation = {});

  OmegaKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const std::vector<double>& rotation_vector() const { return rotation_; }

  /// The one-to-one measurable map f of the construction.
  OmegaPoint f(const OmegaPoint& w) const;
  OmegaPoint f_inverse(const OmegaPoint& w) const;

  OmegaPoint theta(double s, const OmegaPoint& w) const;

  /// Distance used by the statistical checks (componentwise torus metric).
  double distance(const OmegaPoint& a, const OmegaPoint& b) const;

  void require_member(const OmegaPoint& w) const;

 private:
  SkewProductSystem() = default;

  int cube_of(const std::vector<double>& x) const;
  std::vector<double> cube_corner(int cube) const;

  OmegaKind kind_ = OmegaKind::interval_exchange;
  int dim_ = 1;
  std::vector<double> rotation_;     // (1, alpha_2, ..., alpha_dim)
  int subdivision_ = 1;
  std::vector<int> permutation_;     // cube -> cube
  std::vector<int> inverse_perm_;
};

/// Uniform (Lebesgue) sample, deterministic in the seed.
OmegaPoint sample_omega(const SkewProductSystem& sys, std::uint64_t seed);

/// Max over random (s, t, omega) of distance(theta(s, theta(t, w)), theta(s+t, w)).
double check_group_law(const SkewProductSystem& sys, int trials, std::uint64_t seed);

/// Push `samples` uniform points through theta(t, .) and histogram each
/// coordinate into `bins` equal bins; returns the max absolute deviation of a
/// bin frequency from 1/bins.
double check_measure_preservation(const SkewProductSystem& sys, double t, int samples,
                                  int bins, std::uint64_t seed);

}  // namespace wkam
