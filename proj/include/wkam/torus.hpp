#pragma once

#include <vector>

#include "wkam/core.hpp"

namespace wkam {

/// A point on the flat torus T^d, d in {1, 2}. Coordinates are always kept
/// in [0, 1).
class TorusPoint {
 public:
  TorusPoint() = default;
  explicit TorusPoint(const Vec& raw);

  int dim() const { return coords_.dim(); }
  double operator[](int i) const { return coords_[i]; }
  const Vec& coords() const { return coords_; }

 private:
  Vec coords_;
};

/// Velocity on the flat torus (the metric is the identity).
using TangentVector = Vec;

/// Componentwise reduction mod 1. Idempotent; rejects non-finite input.
TorusPoint wrap(const Vec& raw);

/// Minimal-norm lift of b - a. Each component lies in (-1/2, 1/2]; an exact
/// half-distance is represented as +1/2.
Vec displacement(const TorusPoint& a, const TorusPoint& b);

double torus_distance(const TorusPoint& a, const TorusPoint& b);

/// All lifts displacement(a, b) + w with w integer, |w_i| <= w_max.
/// Enumeration order: w ascending lexicographically, so the list is
/// deterministic. Length (2*w_max + 1)^d.
std::vector<Vec> winding_lifts(const TorusPoint& a, const TorusPoint& b, int w_max);

/// Uniform node-aligned grid {k / n_per_dim}^d with row-major node indices.
class SpaceGrid {
 public:
  SpaceGrid(int dim, int n_per_dim);

  int dim() const { return dim_; }
  int n_per_dim() const { return n_; }
  int num_nodes() const { return num_nodes_; }
  double spacing() const { return 1.0 / n_; }

  TorusPoint node_point(int index) const;
  /// Inverse of node_point on exact node coordinates; nearest node otherwise.
  int nearest_node(const TorusPoint& p) const;

  /// Node reached from `index` by an integer step vector (wraps around).
  int shift_node(int index, const std::array<int, kMaxDim>& step) const;

  std::array<int, kMaxDim> node_multi_index(int index) const;

 private:
  int dim_ = 1;
  int n_ = 1;
  int num_nodes_ = 1;
};

}  // namespace wkam
