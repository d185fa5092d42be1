#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace wkam {

inline constexpr const char* kVersion = "0.1.0";

/// Configuration space dimension is 1 or 2 throughout.
inline constexpr int kMaxDim = 2;

// ---------------------------------------------------------------------------
// Error types
// ---------------------------------------------------------------------------

/// Bad arguments at an operation boundary (dimension mismatch, non-finite
/// input, variant mismatch, ...).
struct InvalidInputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Invalid experiment configuration. `key` is the dotted path of the
/// offending entry, e.g. "grid.n_t".
struct ConfigError : std::runtime_error {
  std::string key;
  ConfigError(std::string key_, const std::string& message)
      : std::runtime_error(message), key(std::move(key_)) {}
};

/// A numerical check detected a violated hypothesis (diverging iterates,
/// singular velocity Hessian, non-convergent sup search, ...).
struct DiagnosticError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Operation called on an object in the wrong state (e.g. viscosity check on
/// a non-converged solution).
struct InvalidStateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InternalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Small vectors (d = 1 or 2)
// ---------------------------------------------------------------------------

class Vec {
 public:
  Vec() = default;
  explicit Vec(int dim, double fill = 0.0) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim) throw InvalidInputError("Vec: dim must be 1 or 2");
    c_.fill(0.0);
    for (int i = 0; i < dim_; ++i) c_[i] = fill;
  }
  static Vec of(double x) {
    Vec v(1);
    v.c_[0] = x;
    return v;
  }
  static Vec of(double x, double y) {
    Vec v(2);
    v.c_[0] = x;
    v.c_[1] = y;
    return v;
  }

  int dim() const { return dim_; }
  double operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }

  Vec operator+(const Vec& o) const {
    Vec r = *this;
    for (int i = 0; i < dim_; ++i) r.c_[i] += o.c_[i];
    return r;
  }
  Vec operator-(const Vec& o) const {
    Vec r = *this;
    for (int i = 0; i < dim_; ++i) r.c_[i] -= o.c_[i];
    return r;
  }
  Vec operator*(double s) const {
    Vec r = *this;
    for (int i = 0; i < dim_; ++i) r.c_[i] *= s;
    return r;
  }
  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < dim_; ++i) c_[i] += o.c_[i];
    return *this;
  }

  double dot(const Vec& o) const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += c_[i] * o.c_[i];
    return s;
  }
  double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }
  double norm_inf() const {
    double m = 0.0;
    for (int i = 0; i < dim_; ++i) m = std::max(m, std::abs(c_[i]));
    return m;
  }
  bool finite() const {
    for (int i = 0; i < dim_; ++i)
      if (!std::isfinite(c_[i])) return false;
    return true;
  }

 private:
  std::array<double, kMaxDim> c_{};
  int dim_ = 1;
};

inline Vec operator*(double s, const Vec& v) { return v * s; }

// ---------------------------------------------------------------------------
// Scalar helpers
// ---------------------------------------------------------------------------

/// Reduce to [0, 1). Guards against the y == 1.0 result that floor-based
/// reduction produces for tiny negative inputs.
inline double mod1(double x) {
  double y = x - std::floor(x);
  if (y >= 1.0) y -= 1.0;
  if (y < 0.0) y += 1.0;
  return y;
}

// ---------------------------------------------------------------------------
// Deterministic RNG and seed splitting
// ---------------------------------------------------------------------------

/// 64-bit FNV-1a. Used to derive per-component seeds from the root seed:
/// seed(component) = root ^ fnv1a64(tag).
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t split_seed(std::uint64_t root, const std::string& tag) {
  return root ^ fnv1a64(tag);
}

/// mt19937_64 with explicit double conversion so streams are reproducible
/// independent of the standard library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform01(); }
  std::uint64_t bits() { return gen_(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection-free modulo is fine here; bias is irrelevant at these sizes.
    return gen_() % n;
  }

 private:
  std::mt19937_64 gen_;
};

// ---------------------------------------------------------------------------
// Deterministic parallel map
// ---------------------------------------------------------------------------

/// Number of worker threads: `requested` if positive, else WKAM_THREADS,
/// else 1.
int resolve_threads(int requested);

/// Run fn(begin, end) over a partition of [0, n). Each index must be
/// processed independently (disjoint writes), which makes the result
/// identical for every thread count.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace wkam
