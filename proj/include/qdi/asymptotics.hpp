#pragma once

// Continuum integrals behind the d = 3 decay estimates:
//   J(R)    = int_0^inf (du/u) log[(R^-2 + (u+1)^2) / (R^-2 + (u-1)^2)]  -> pi^2
//   I(R)    = 2 pi int_0^inf dz int_0^inf dr r / ((1+(z-R)^2+r^2)(1+(z+R)^2+r^2))
//           = (pi / 4R) J(R)
//   S(L, q) = int_{S^2} (1 + L^2 |z - e|^2)^-q dlambda(z)
//
// Improper integrals are cut off and the tails replaced by analytic
// estimates whose uncertainty is added to the reported error.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "qdi/quadrature.hpp"

namespace qdi {

/// Integrand of J in the substituted variable, written as
/// log1p(4u / (R^-2 + (u-1)^2)) / u so it stays finite as u -> 0.
inline double j_integrand(double u, double R) {
  const double eps = 1.0 / (R * R);
  const double d = eps + (u - 1.0) * (u - 1.0);
  if (u == 0.0) return 4.0 / (eps + 1.0);
  return std::log1p(4.0 * u / d) / u;
}

inline QuadratureResult j_of_r_detailed(double R, const QuadratureConfig& cfg = {}) {
  if (!(R > 0.0) || !std::isfinite(R)) throw std::invalid_argument("J(R) needs R > 0");
  cfg.validate();
  const double cutoff = std::max(cfg.cutoff, 10.0);
  auto f = [R](double u) { return j_integrand(u, R); };

  // The log peak at u = 1 has width ~ 1/R.
  const double w = std::min(0.5, 1.0 / R);
  std::vector<double> pts{0.0, 1.0};
  for (double s = w / 16.0; s < 1.0; s *= 2.0) pts.push_back(1.0 - s);
  for (double s = w / 16.0; 1.0 + s < cutoff; s *= 2.0) pts.push_back(1.0 + s);
  pts.push_back(cutoff);
  std::sort(pts.begin(), pts.end());

  auto body = integrate_pieces(f, pts, cfg);

  // Tail u > C: with x = 4u / (eps + (u-1)^2), x - x^2/2 <= log1p(x) <= x.
  const double c1 = cutoff - 1.0;
  const double upper = 4.0 * R * (std::numbers::pi / 2.0 - std::atan(R * c1));
  const double quad = 8.0 * (1.0 / (2.0 * c1 * c1) + 1.0 / (3.0 * c1 * c1 * c1));
  const double lower = upper - quad;
  QuadratureResult r;
  r.value = body.value + 0.5 * (upper + lower);
  r.tail_bound = 0.5 * (upper - lower);
  r.error = body.error + r.tail_bound;
  require_tolerance(r, cfg, "J(R)");
  return r;
}

inline double j_of_r(double R, const QuadratureConfig& cfg = {}) { return j_of_r_detailed(R, cfg).value; }

/// 8 log(x) / (x^2 - 1), extended continuously by 4 at x = 1.
inline double j_limit_integrand(double x) {
  const double h = x - 1.0;
  if (std::abs(h) < 1e-4) return 8.0 * (1.0 - h / 2.0 + h * h / 3.0 - h * h * h / 4.0) / (2.0 + h);
  return 8.0 * std::log(x) / ((x - 1.0) * (x + 1.0));
}

/// 8 int_0^1 log x / (x^2 - 1) dx; the log singularity at 0 is handled by the
/// double-exponential rule.
inline QuadratureResult j_limit_reference_detailed(const QuadratureConfig& cfg = {}) {
  cfg.validate();
  auto r = tanh_sinh(j_limit_integrand, 0.0, 1.0, cfg);
  require_tolerance(r, cfg, "J limit");
  return r;
}

inline double j_limit_reference(const QuadratureConfig& cfg = {}) { return j_limit_reference_detailed(cfg).value; }

namespace detail {

/// int_0^inf r dr / ((a + r^2)(b + r^2)) by quadrature plus an r^-3 tail.
inline QuadratureResult radial_integral(double a, double b, const QuadratureConfig& cfg) {
  const double sa = std::sqrt(std::min(a, b));
  const double sb = std::sqrt(std::max(a, b));
  const double S = cfg.cutoff * sb;
  auto f = [a, b](double r) { return r / ((a + r * r) * (b + r * r)); };
  std::vector<double> pts{0.0};
  for (double p : geometric_breakpoints(0.0, S, sa / 4.0)) if (p > 0.0) pts.push_back(p);
  auto body = integrate_pieces(f, pts, cfg);
  // r/((a+r^2)(b+r^2)) = r^-3 (1 - (a+b)/r^2 + ...), so the tail lies within
  // [1/(2S^2) - (a+b)/(4S^4), 1/(2S^2)].
  const double upper = 1.0 / (2.0 * S * S);
  const double lower = upper - (a + b) / (4.0 * S * S * S * S);
  QuadratureResult r;
  r.value = body.value + 0.5 * (upper + lower);
  r.tail_bound = 0.5 * (upper - lower);
  r.error = body.error + r.tail_bound;
  return r;
}

}  // namespace detail

/// Half-space cylindrical form, z in [0, inf). Integrating z over the whole
/// line gives the full-space integral, which is twice this value.
inline QuadratureResult i_of_r_detailed(double R, const QuadratureConfig& cfg = {}) {
  cfg.validate();
  R = std::abs(R);
  if (!(R > 0.0) || !std::isfinite(R)) throw std::invalid_argument("I(R) needs R != 0");
  const auto inner_cfg = cfg.tightened(1e-2);
  double worst_inner_rel = 0.0;
  auto h = [&](double z) {
    const double a = 1.0 + (z - R) * (z - R);
    const double b = 1.0 + (z + R) * (z + R);
    const auto in = detail::radial_integral(a, b, inner_cfg);
    if (in.value > 0.0) worst_inner_rel = std::max(worst_inner_rel, in.error / in.value);
    return 2.0 * std::numbers::pi * in.value;
  };
  const double Z = cfg.cutoff * std::max(R, 1.0);
  std::vector<double> pts{0.0};
  for (double s = R / 2.0; s > 0.5; s /= 2.0) pts.push_back(R - s);
  pts.push_back(R);
  for (double p : geometric_breakpoints(R, Z, 0.5)) if (p > R) pts.push_back(p);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  auto body = integrate_pieces(h, pts, cfg);

  // For z > Z: 2 pi * inner = (pi / 4zR) log1p(4zR / a), a = 1 + (z-R)^2, which
  // lies between pi/a - 2 pi zR / a^2 and pi / a.
  const double zr = Z - R;
  const double upper = std::numbers::pi * (std::numbers::pi / 2.0 - std::atan(zr));
  const double quad = 2.0 * std::numbers::pi * R * (1.0 / (2.0 * zr * zr) + R / (3.0 * zr * zr * zr));
  const double lower = upper - quad;
  QuadratureResult r;
  r.value = body.value + 0.5 * (upper + lower);
  r.tail_bound = 0.5 * (upper - lower);
  r.error = body.error + r.tail_bound + worst_inner_rel * std::abs(body.value);
  require_tolerance(r, cfg, "I(R)");
  return r;
}

inline double i_of_r(double R, const QuadratureConfig& cfg = {}) { return i_of_r_detailed(R, cfg).value; }

inline void check_sphere_args(double L, double q) {
  if (!(q > 0.0)) throw std::invalid_argument("sphere integral needs q > 0");
  if (q == 1.0) throw std::domain_error("sphere integral at q = 1 (logarithmic case) is not supported");
  if (!(L >= 0.0) || !std::isfinite(L)) throw std::invalid_argument("sphere integral needs L >= 0");
}

/// Closed form 2 pi [(1 + 4L^2)^(1-q) - 1] / ((1-q) 2L^2); 4 pi at L = 0.
inline double sphere_integral(double L, double q) {
  check_sphere_args(L, q);
  if (L == 0.0) return 4.0 * std::numbers::pi;
  const double num = std::expm1((1.0 - q) * std::log1p(4.0 * L * L));
  return 2.0 * std::numbers::pi * num / ((1.0 - q) * 2.0 * L * L);
}

/// 2 pi int_0^2 (1 + 2 L^2 t)^-q dt by adaptive quadrature, t = 1 - s.
inline QuadratureResult sphere_integral_quadrature(double L, double q, const QuadratureConfig& cfg = {}) {
  check_sphere_args(L, q);
  cfg.validate();
  auto f = [L, q](double t) { return 2.0 * std::numbers::pi * std::pow(1.0 + 2.0 * L * L * t, -q); };
  // Mass concentrates within ~1/L^2 of the pole t = 0.
  const auto pts = geometric_breakpoints(0.0, 2.0, std::min(1.0, 1.0 / (2.0 * L * L + 1.0)));
  auto r = integrate_pieces(f, pts, cfg);
  require_tolerance(r, cfg, "sphere integral");
  return r;
}

/// 2 pi 2^(1-q) / (1-q) * (1 + 2 L^2)^-q; agrees with sphere_integral to
/// leading order in L.
inline double sphere_integral_asymptotic(double L, double q) {
  check_sphere_args(L, q);
  return 2.0 * std::numbers::pi * std::pow(2.0, 1.0 - q) / (1.0 - q) * std::pow(1.0 + 2.0 * L * L, -q);
}

/// Leading large-L coefficient: S(L, q) L^(2q) -> pi 2^(2-2q) / (1-q), q < 1.
inline double sphere_leading_coefficient(double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("leading coefficient needs 0 < q < 1");
  return std::numbers::pi * std::pow(2.0, 2.0 - 2.0 * q) / (1.0 - q);
}

/// Surface double sum L^4 S(L, q) relative to the volume L^3.
inline double surface_to_volume_ratio(double L, double q) {
  if (!(L > 0.0)) throw std::invalid_argument("ratio needs L > 0");
  return L * sphere_integral(L, q);
}

}  // namespace qdi
