#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qdi/geometry.hpp"
#include "qdi/rng.hpp"

namespace qdi {

enum class DisorderFamily { gaussian, rademacher, uniform };

inline DisorderFamily parse_disorder_family(std::string_view name) {
  if (name == "gaussian") return DisorderFamily::gaussian;
  if (name == "rademacher") return DisorderFamily::rademacher;
  if (name == "uniform") return DisorderFamily::uniform;
  throw std::invalid_argument("unknown disorder family '" + std::string(name) + "'");
}

inline const char* to_string(DisorderFamily f) {
  switch (f) {
    case DisorderFamily::gaussian: return "gaussian";
    case DisorderFamily::rademacher: return "rademacher";
    case DisorderFamily::uniform: return "uniform";
  }
  return "unknown";
}

struct DisorderSpec {
  DisorderFamily family = DisorderFamily::gaussian;
  double eta2 = 1.0;  ///< second moment E eta^2
  std::uint64_t seed = 0;
  std::uint64_t realization = 0;
};

/// Random field on the interior, indexed by interior ordinal.
struct DisorderField {
  DisorderSpec spec;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

/// eta at one site. Depends only on (seed, realization, coordinates), so the
/// same site carries the same value in every box size.
inline double disorder_value(const DisorderSpec& spec, const Coord& site) {
  if (!(spec.eta2 > 0.0) || !std::isfinite(spec.eta2)) throw std::invalid_argument("disorder second moment must be > 0");
  std::uint64_t key = 0;
  for (int c : site) key = (key << 16) ^ static_cast<std::uint64_t>(static_cast<std::uint16_t>(c + 32768));
  const std::uint64_t h = derive_seed(spec.seed, {spec.realization, key});
  const double sigma = std::sqrt(spec.eta2);
  switch (spec.family) {
    case DisorderFamily::gaussian: {
      // Box-Muller on two independent hash draws.
      const double u1 = to_open_unit(h);
      const double u2 = to_open_unit(splitmix64(h ^ 0xd1b54a32d192ed03ULL));
      return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
    case DisorderFamily::rademacher:
      return (h >> 63) ? sigma : -sigma;
    case DisorderFamily::uniform: {
      const double half_width = std::sqrt(3.0) * sigma;
      return half_width * (2.0 * to_open_unit(h) - 1.0);
    }
  }
  throw std::invalid_argument("unknown disorder family");
}

inline DisorderField sample_disorder(const DisorderSpec& spec, const BoxGeometry& geometry) {
  DisorderField f{spec, std::vector<double>(geometry.interior_count())};
  for (std::size_t ord = 0; ord < geometry.interior_count(); ++ord)
    f.values[ord] = disorder_value(spec, geometry.coord(geometry.interior_site(ord)));
  return f;
}

/// Field with explicit values, for tests and single-site oracles.
inline DisorderField disorder_from_values(std::vector<double> values, double eta2 = 1.0) {
  DisorderField f;
  f.spec.eta2 = eta2;
  f.values = std::move(values);
  return f;
}

}  // namespace qdi
