#pragma once

// Finite-range symmetric random-walk kernels p(.) on Z^d.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qdi {

inline constexpr int kMaxDim = 4;

/// Lattice vector in Z^d; components beyond the dimension are zero.
using Coord = std::array<int, kMaxDim>;

inline Coord unit_vector(int axis, int sign = 1) {
  Coord c{};
  c[axis] = sign;
  return c;
}

inline Coord negate(const Coord& v) {
  Coord r{};
  for (int k = 0; k < kMaxDim; ++k) r[k] = -v[k];
  return r;
}

inline Coord add(const Coord& a, const Coord& b) {
  Coord r{};
  for (int k = 0; k < kMaxDim; ++k) r[k] = a[k] + b[k];
  return r;
}

inline int sup_norm(const Coord& v) {
  int m = 0;
  for (int x : v) m = std::max(m, std::abs(x));
  return m;
}

struct Kernel {
  int dim = 0;
  std::vector<Coord> offsets;
  std::vector<double> weights;

  /// p(+-e_nu) = 1/(2d).
  static Kernel nearest_neighbor(int d) {
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("kernel dimension out of range");
    Kernel k;
    k.dim = d;
    for (int a = 0; a < d; ++a) {
      for (int s : {1, -1}) {
        k.offsets.push_back(unit_vector(a, s));
        k.weights.push_back(1.0 / (2.0 * d));
      }
    }
    return k;
  }

  /// Axial kernel with unit and double steps:
  /// p(+-e_nu) = (1 - w)/(2d), p(+-2 e_nu) = w/(2d).
  static Kernel axial_range2(int d, double w) {
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("kernel dimension out of range");
    if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("axial_range2 weight must lie in [0,1]");
    Kernel k;
    k.dim = d;
    for (int a = 0; a < d; ++a) {
      for (int s : {1, -1}) {
        k.offsets.push_back(unit_vector(a, s));
        k.weights.push_back((1.0 - w) / (2.0 * d));
        k.offsets.push_back(unit_vector(a, 2 * s));
        k.weights.push_back(w / (2.0 * d));
      }
    }
    return k;
  }

  double weight(const Coord& v) const {
    double w = 0.0;
    for (std::size_t n = 0; n < offsets.size(); ++n)
      if (offsets[n] == v) w += weights[n];
    return w;
  }

  /// max sup-norm over the support (entries with positive weight).
  int range() const {
    int r = 0;
    for (std::size_t n = 0; n < offsets.size(); ++n)
      if (weights[n] > 0.0) r = std::max(r, sup_norm(offsets[n]));
    return r;
  }
};

enum class KernelViolation {
  none,
  empty,
  dimension,
  negative_weight,
  origin_weight,
  duplicate_offset,
  asymmetry,
  normalization,
};

struct KernelReport {
  KernelViolation violation = KernelViolation::none;
  std::string message;

  bool ok() const { return violation == KernelViolation::none; }
};

inline const char* to_string(KernelViolation v) {
  switch (v) {
    case KernelViolation::none: return "ok";
    case KernelViolation::empty: return "empty";
    case KernelViolation::dimension: return "dimension";
    case KernelViolation::negative_weight: return "negative_weight";
    case KernelViolation::origin_weight: return "origin_weight";
    case KernelViolation::duplicate_offset: return "duplicate_offset";
    case KernelViolation::asymmetry: return "symmetry";
    case KernelViolation::normalization: return "normalization";
  }
  return "unknown";
}

/// Checks the kernel invariants in a fixed order and reports the first
/// one that fails.
inline KernelReport validate_kernel(const Kernel& k) {
  auto fail = [](KernelViolation v, std::string msg) { return KernelReport{v, std::move(msg)}; };
  if (k.offsets.empty() || k.offsets.size() != k.weights.size())
    return fail(KernelViolation::empty, "kernel has no support or mismatched offset/weight lists");
  if (k.dim < 1 || k.dim > kMaxDim) return fail(KernelViolation::dimension, "dimension out of range");
  for (std::size_t n = 0; n < k.offsets.size(); ++n) {
    for (int a = k.dim; a < kMaxDim; ++a)
      if (k.offsets[n][a] != 0) return fail(KernelViolation::dimension, "offset has components beyond dimension");
    if (!(k.weights[n] >= 0.0) || !std::isfinite(k.weights[n]))
      return fail(KernelViolation::negative_weight, "weight must be finite and non-negative");
    if (k.offsets[n] == Coord{} && k.weights[n] != 0.0)
      return fail(KernelViolation::origin_weight, "p(0) must vanish");
    for (std::size_t m = 0; m < n; ++m)
      if (k.offsets[m] == k.offsets[n]) return fail(KernelViolation::duplicate_offset, "offset listed twice");
  }
  for (std::size_t n = 0; n < k.offsets.size(); ++n) {
    const double mirror = k.weight(negate(k.offsets[n]));
    if (std::abs(mirror - k.weights[n]) > 1e-15) {
      std::ostringstream os;
      os << "p(v) != p(-v) for offset index " << n;
      return fail(KernelViolation::asymmetry, os.str());
    }
  }
  double total = 0.0;
  for (double w : k.weights) total += w;
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "weights sum to " << total << ", expected 1";
    return fail(KernelViolation::normalization, os.str());
  }
  return {};
}

}  // namespace qdi
