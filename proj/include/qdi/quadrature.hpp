#pragma once

// Thin contract layer over Boost.Math quadrature rules: tolerance
// bookkeeping, breakpoints, and failure reporting.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace qdi {

struct QuadratureConfig {
  double abs_tolerance = 1e-10;
  double rel_tolerance = 1e-8;
  /// Depth limit of the recursive bisection.
  unsigned max_subdivisions = 20;
  /// Upper limit substituted for infinity, in units of the problem's own scale.
  double cutoff = 1e5;

  void validate() const {
    if (!(abs_tolerance > 0.0) || !(rel_tolerance > 0.0)) throw std::invalid_argument("quadrature tolerances must be > 0");
    if (!(cutoff > 0.0)) throw std::invalid_argument("quadrature cutoff must be > 0");
  }

  QuadratureConfig tightened(double factor) const {
    QuadratureConfig c = *this;
    c.abs_tolerance *= factor;
    c.rel_tolerance *= factor;
    return c;
  }
};

struct QuadratureResult {
  double value = 0.0;
  /// Estimated discretization error plus any tail bound.
  double error = 0.0;
  /// Part of `error` that bounds the neglected tail beyond the cutoff.
  double tail_bound = 0.0;
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_tolerance(const QuadratureResult& r, const QuadratureConfig& cfg, const char* what) {
  const double allowed = std::max(cfg.abs_tolerance, cfg.rel_tolerance * std::abs(r.value));
  if (!std::isfinite(r.value) || !(r.error <= allowed)) {
    std::ostringstream os;
    os << what << ": tolerance not met (estimate " << r.value << ", error " << r.error << ", allowed " << allowed << ")";
    throw QuadratureError(os.str());
  }
}

namespace quadrature_detail {

template <typename F>
QuadratureResult bisect(F& f, double a, double b, unsigned depth, const QuadratureConfig& cfg) {
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &err);
  const double target = 0.1 * std::max(cfg.abs_tolerance * 1e-3, cfg.rel_tolerance * std::abs(v));
  if (err <= target || depth >= cfg.max_subdivisions || !(b - a > 4.0 * std::abs(a + b) * 1e-16))
    return {v, err, 0.0};
  const double m = 0.5 * (a + b);
  const auto l = bisect(f, a, m, depth + 1, cfg);
  const auto r = bisect(f, m, b, depth + 1, cfg);
  return {l.value + r.value, l.error + r.error, 0.0};
}

}  // namespace quadrature_detail

/// Gauss-Kronrod 15/7 pair with recursive bisection on [a, b]; the error is
/// the summed |K15 - G7| over the leaves. Does not check the contract;
/// callers combine pieces and then call require_tolerance.
template <typename F>
QuadratureResult gauss_kronrod(F&& f, double a, double b, const QuadratureConfig& cfg) {
  return quadrature_detail::bisect(f, a, b, 0, cfg);
}

/// Sum of adaptive pieces between consecutive breakpoints.
template <typename F>
QuadratureResult integrate_pieces(F&& f, const std::vector<double>& breakpoints, const QuadratureConfig& cfg) {
  QuadratureResult total;
  for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
    if (breakpoints[k + 1] <= breakpoints[k]) continue;
    const auto piece = gauss_kronrod(f, breakpoints[k], breakpoints[k + 1], cfg);
    total.value += piece.value;
    total.error += piece.error;
  }
  return total;
}

/// Double-exponential rule for integrable endpoint singularities on [a, b].
template <typename F>
QuadratureResult tanh_sinh(F&& f, double a, double b, const QuadratureConfig& cfg) {
  boost::math::quadrature::tanh_sinh<double> rule;
  double err = 0.0;
  double l1 = 0.0;
  const double v = rule.integrate(f, a, b, cfg.rel_tolerance * 1e-2, &err, &l1);
  return {v, err, 0.0};
}

/// Geometric breakpoints a, a + s, a + 2s, a + 4s, ... up to b.
inline std::vector<double> geometric_breakpoints(double a, double b, double first_step) {
  std::vector<double> pts{a};
  double step = first_step;
  while (a + step < b) {
    pts.push_back(a + step);
    step *= 2.0;
  }
  pts.push_back(b);
  return pts;
}

}  // namespace qdi
