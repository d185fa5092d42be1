#include "wkam/torus.hpp"

namespace wkam {

TorusPoint::TorusPoint(const Vec& raw) {
  if (!raw.finite()) throw InvalidInputError("TorusPoint: non-finite coordinate");
  coords_ = raw;
  for (int i = 0; i < coords_.dim(); ++i) coords_[i] = mod1(coords_[i]);
}

TorusPoint wrap(const Vec& raw) { return TorusPoint(raw); }

Vec displacement(const TorusPoint& a, const TorusPoint& b) {
  if (a.dim() != b.dim()) throw InvalidInputError("displacement: dimension mismatch");
  Vec d(a.dim());
  for (int i = 0; i < a.dim(); ++i) {
    double delta = mod1(b[i] - a[i]);  // in [0, 1)
    // Half-distance tie-break: exactly 1/2 stays +1/2.
    d[i] = (delta > 0.5) ? delta - 1.0 : delta;
  }
  return d;
}

double torus_distance(const TorusPoint& a, const TorusPoint& b) {
  return displacement(a, b).norm();
}

std::vector<Vec> winding_lifts(const TorusPoint& a, const TorusPoint& b, int w_max) {
  if (w_max < 0) throw InvalidInputError("winding_lifts: w_max must be >= 0");
  Vec base = displacement(a, b);
  int d = a.dim();
  std::vector<Vec> lifts;
  int span = 2 * w_max + 1;
  int count = 1;
  for (int i = 0; i < d; ++i) count *= span;
  lifts.reserve(static_cast<std::size_t>(count));
  for (int flat = 0; flat < count; ++flat) {
    Vec lift = base;
    int rest = flat;
    for (int i = 0; i < d; ++i) {
      int w = rest % span - w_max;
      rest /= span;
      lift[i] += w;
    }
    lifts.push_back(lift);
  }
  return lifts;
}

SpaceGrid::SpaceGrid(int dim, int n_per_dim) : dim_(dim), n_(n_per_dim) {
  if (dim < 1 || dim > kMaxDim) throw InvalidInputError("SpaceGrid: dim must be 1 or 2");
  if (n_per_dim < 1) throw InvalidInputError("SpaceGrid: n_per_dim must be positive");
  num_nodes_ = n_;
  if (dim_ == 2) num_nodes_ *= n_;
}

TorusPoint SpaceGrid::node_point(int index) const {
  Vec v(dim_);
  v[0] = static_cast<double>(index % n_) / n_;
  if (dim_ == 2) v[1] = static_cast<double>(index / n_) / n_;
  return TorusPoint(v);
}

int SpaceGrid::nearest_node(const TorusPoint& p) const {
  int idx[kMaxDim] = {0, 0};
  for (int i = 0; i < dim_; ++i) {
    int k = static_cast<int>(std::lround(p[i] * n_)) % n_;
    if (k < 0) k += n_;
    idx[i] = k;
  }
  return idx[0] + (dim_ == 2 ? idx[1] * n_ : 0);
}

int SpaceGrid::shift_node(int index, const std::array<int, kMaxDim>& step) const {
  auto wrap_i = [this](int k) {
    int r = k % n_;
    return r < 0 ? r + n_ : r;
  };
  int i0 = wrap_i(index % n_ + step[0]);
  if (dim_ == 1) return i0;
  int i1 = wrap_i(index / n_ + step[1]);
  return i0 + i1 * n_;
}

std::array<int, kMaxDim> SpaceGrid::node_multi_index(int index) const {
  std::array<int, kMaxDim> m{0, 0};
  m[0] = index % n_;
  if (dim_ == 2) m[1] = index / n_;
  return m;
}

}  // namespace wkam
