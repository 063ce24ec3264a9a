#pragma once

// Measurable statements built on the Gaussian solver and the sampler:
// divergence residuals, discrete Stokes sums, ergodic boundary averages,
// CLT scans, finite-size variance scaling and covariance decay.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdi/disorder.hpp"
#include "qdi/gaussian_exact.hpp"
#include "qdi/lattice.hpp"
#include "qdi/parallel.hpp"
#include "qdi/stats.hpp"

namespace qdi {

struct ScanRow {
  double control = 0.0;
  double value = 0.0;
  double uncertainty = 0.0;
};

struct ScanResult {
  std::vector<ScanRow> rows;
  std::map<std::string, std::string> metadata;

  void sort_rows() {
    std::stable_sort(rows.begin(), rows.end(), [](const ScanRow& a, const ScanRow& b) { return a.control < b.control; });
  }
  std::vector<double> controls() const {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r.control);
    return v;
  }
  std::vector<double> values() const {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r.value);
    return v;
  }
};

enum class FitModel {
  log_linear,  ///< y = a + b log x
  power_law,   ///< log y = a - q log x
};

struct FitResult {
  FitModel model = FitModel::log_linear;
  /// log_linear: {a, b}; power_law: {a, q}.
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
  std::vector<double> residuals;

  /// Power-law decay exponent q.
  double exponent() const { return model == FitModel::power_law ? slope : 0.0; }
};

inline FitResult fit(FitModel model, const ScanResult& scan) {
  if (scan.rows.size() < 3) throw std::invalid_argument("fit needs at least 3 rows");
  std::vector<double> x, y;
  for (const auto& r : scan.rows) {
    if (!(r.control > 0.0)) throw std::invalid_argument("log transform of a non-positive control value");
    x.push_back(std::log(r.control));
    if (model == FitModel::power_law) {
      if (!(r.value > 0.0)) throw std::invalid_argument("log transform of a non-positive observable");
      y.push_back(std::log(r.value));
    } else {
      y.push_back(r.value);
    }
  }
  const auto line = least_squares(x, y);
  FitResult f;
  f.model = model;
  f.intercept = line.intercept;
  f.slope = model == FitModel::power_law ? -line.slope : line.slope;
  f.r_squared = line.r_squared;
  f.residuals = line.residuals;
  return f;
}

struct DivergenceResidual {
  std::vector<double> residuals;  ///< eta_i - sum_j p(j-i) X_ij per interior site
  double max_abs = 0.0;
};

inline DivergenceResidual divergence_residual(const Lattice& lat, const VectorField& X, const DisorderField& eta) {
  if (X.size() != lat.edge_count()) throw std::invalid_argument("vector field is missing edge values");
  if (eta.size() != lat.site_count()) throw std::invalid_argument("disorder field does not match the lattice");
  DivergenceResidual out;
  out.residuals.resize(lat.site_count());
  const auto& w = lat.support_weights();
  for (std::size_t i = 0; i < lat.site_count(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < lat.degree(); ++k) {
      const EdgeRef ref = lat.incident(i, k);
      s += w[k] * ref.sign * X[ref.index];
    }
    out.residuals[i] = eta[i] - s;
    out.max_abs = std::max(out.max_abs, std::abs(out.residuals[i]));
  }
  return out;
}

struct IntegralForm {
  double volume_sum = 0.0;   ///< sum_{i in Lambda} eta_i
  double surface_sum = 0.0;  ///< sum over boundary edges of p(j-i) X_ij
  double difference = 0.0;   ///< volume - surface
};

inline double surface_sum(const Lattice& lat, const VectorField& X) {
  if (X.size() != lat.edge_count()) throw std::invalid_argument("vector field is missing edge values");
  double s = 0.0;
  for (const auto& b : boundary_edges(lat)) s += b.weight * lat.value(X, b.inside, b.outside);
  return s;
}

inline IntegralForm integral_form_check(const Lattice& lat, const VectorField& X, const DisorderField& eta) {
  if (eta.size() != lat.site_count()) throw std::invalid_argument("disorder field does not match the lattice");
  IntegralForm f;
  for (double v : eta.values) f.volume_sum += v;
  f.surface_sum = surface_sum(lat, X);
  f.difference = f.volume_sum - f.surface_sum;
  return f;
}

/// Side nu of the square box in d = 2: 1 -> +e1, 2 -> +e2, 3 -> -e1, 4 -> -e2.
/// A boundary edge belongs to the first side, in that order, that its
/// exterior endpoint lies beyond.
inline int boundary_side(const Lattice& lat, const BoundaryEdge& b) {
  const Coord c = lat.geometry().coord(b.outside);
  const int L = lat.radius();
  if (c[0] > L) return 1;
  if (c[1] > L) return 2;
  if (c[0] < -L) return 3;
  return 4;
}

/// (1/L) sum_{<i,j> in B_L(nu)} p(i-j) X_ij.
inline double boundary_ergodic_average(const Lattice& lat, const VectorField& X, int side) {
  if (lat.dim() != 2) throw std::invalid_argument("boundary ergodic averages are defined for d = 2");
  if (side < 1 || side > 4) throw std::invalid_argument("side must be 1, 2, 3 or 4");
  if (lat.radius() < 1) throw std::invalid_argument("boundary ergodic averages need L >= 1");
  double s = 0.0;
  for (const auto& b : boundary_edges(lat))
    if (boundary_side(lat, b) == side) s += b.weight * lat.value(X, b.inside, b.outside);
  return s / lat.radius();
}

/// Sample variance over realizations of (1/L) sum_{i in Lambda} eta_i.
/// Expected value eta2 (2L+1)^d / L^2.
inline ScanResult clt_scan(int d, const std::vector<int>& L_list, std::size_t realizations, DisorderSpec spec,
                           unsigned threads = 1) {
  if (realizations < 100) throw std::invalid_argument("clt_scan needs at least 100 realizations");
  ScanResult out;
  for (int L : L_list) {
    if (L < 1) throw std::invalid_argument("clt_scan needs L >= 1");
    const BoxGeometry g(d, L, 0);
    std::vector<double> sums(realizations);
    parallel_for(realizations, threads, [&](std::size_t r) {
      DisorderSpec s = spec;
      s.realization = r;
      const auto eta = sample_disorder(s, g);
      sums[r] = std::accumulate(eta.values.begin(), eta.values.end(), 0.0) / L;
    });
    out.rows.push_back({static_cast<double>(L), sample_variance(sums), jackknife_variance_error(sums)});
  }
  out.sort_rows();
  out.metadata["observable"] = "variance of (1/L) sum eta";
  out.metadata["disorder"] = to_string(spec.family);
  out.metadata["eta2"] = std::to_string(spec.eta2);
  out.metadata["seed"] = std::to_string(spec.seed);
  out.metadata["realizations"] = std::to_string(realizations);
  return out;
}

inline double clt_population_variance(int d, int L, double eta2) {
  return eta2 * std::pow(2.0 * L + 1.0, d) / (static_cast<double>(L) * L);
}

/// Edge from the origin to +e1.
inline SitePair central_edge(const Lattice& lat) {
  return {*lat.geometry().id_of(Coord{}), *lat.geometry().id_of(unit_vector(0))};
}

/// Gaussian variance C(a, a) of the central edge for each box radius.
inline ScanResult variance_scaling_scan(int d, const std::vector<int>& L_list, double eta2,
                                        const SolverConfig& cfg = {}, unsigned threads = 1) {
  ScanResult out;
  out.rows.resize(L_list.size());
  parallel_for(L_list.size(), threads, [&](std::size_t k) {
    if (L_list[k] < 1) throw std::invalid_argument("variance scaling needs L >= 1");
    const auto lat = Lattice::nearest_neighbor(d, L_list[k]);
    const DirichletLaplacian A(lat);
    out.rows[k] = {static_cast<double>(L_list[k]), variance(A, central_edge(lat), eta2, cfg), cfg.rel_tolerance};
  });
  out.sort_rows();
  out.metadata["observable"] = "central edge variance";
  out.metadata["d"] = std::to_string(d);
  out.metadata["eta2"] = std::to_string(eta2);
  return out;
}

/// How the two edges of a decay pair are oriented relative to the line
/// joining them.
enum class DecayOrientation {
  transverse,  ///< edges along e2, separated along e1
  collinear,   ///< edges along e1, separated along e1
};

struct DecayScan {
  ScanResult covariance;   ///< (r, C(e0, e_r))
  ScanResult compensated;  ///< (r, r * C)
};

/// Pair of edges with base points -floor(r/2) e1 and r - floor(r/2) e1.
inline std::pair<SitePair, SitePair> decay_pair(const Lattice& lat, int r, DecayOrientation orient) {
  const auto& g = lat.geometry();
  const Coord step = orient == DecayOrientation::transverse ? unit_vector(1) : unit_vector(0);
  Coord a{}, b{};
  a[0] = -(r / 2);
  b[0] = r - r / 2;
  return {{*g.id_of(a), *g.id_of(add(a, step))}, {*g.id_of(b), *g.id_of(add(b, step))}};
}

inline DecayScan decay_scan_d3(int L, const std::vector<int>& r_list, double eta2,
                               DecayOrientation orient = DecayOrientation::transverse, const SolverConfig& cfg = {},
                               unsigned threads = 1) {
  for (int r : r_list)
    if (r < 0 || 2 * r > L) throw std::invalid_argument("decay separation must satisfy 0 <= r <= L/2");
  const auto lat = Lattice::nearest_neighbor(3, L);
  const DirichletLaplacian A(lat);
  DecayScan out;
  out.covariance.rows.resize(r_list.size());
  out.compensated.rows.resize(r_list.size());
  parallel_for(r_list.size(), threads, [&](std::size_t k) {
    const int r = r_list[k];
    const auto [e0, er] = decay_pair(lat, r, orient);
    const double c = covariance(A, e0, er, eta2, cfg);
    out.covariance.rows[k] = {static_cast<double>(r), c, cfg.rel_tolerance};
    out.compensated.rows[k] = {static_cast<double>(r), r * c, cfg.rel_tolerance * std::max(r, 1)};
  });
  out.covariance.sort_rows();
  out.compensated.sort_rows();
  for (auto* s : {&out.covariance, &out.compensated}) {
    s->metadata["d"] = "3";
    s->metadata["L"] = std::to_string(L);
    s->metadata["orientation"] = orient == DecayOrientation::transverse ? "transverse" : "collinear";
  }
  return out;
}

struct SecondMoment {
  double lhs = 0.0;  ///< eta2 |Lambda|
  double rhs = 0.0;  ///< sum over boundary-edge pairs of p_a p_b C(a, b)
  double relative_difference = 0.0;
};

/// Double boundary sum of pairwise covariances, one Green solve per boundary
/// edge.
inline SecondMoment second_moment_identity(const Lattice& lat, double eta2, const SolverConfig& cfg = {},
                                           unsigned threads = 1) {
  const DirichletLaplacian A(lat);
  const auto bnd = boundary_edges(lat);
  std::vector<SitePair> pairs;
  for (const auto& b : bnd) pairs.push_back({b.inside, b.outside});
  const auto C = covariance_matrix(A, pairs, eta2, cfg, threads);
  SecondMoment m;
  m.lhs = eta2 * static_cast<double>(lat.site_count());
  for (std::size_t a = 0; a < bnd.size(); ++a)
    for (std::size_t b = 0; b < bnd.size(); ++b) m.rhs += bnd[a].weight * bnd[b].weight * C[a][b];
  m.relative_difference = std::abs(m.lhs - m.rhs) / m.lhs;
  return m;
}

/// Same right-hand side from a single solve: sum_a p_a T_a = G s, so the
/// double sum equals eta2 ||G s||^2.
inline SecondMoment second_moment_identity_adjoint(const Lattice& lat, double eta2, const SolverConfig& cfg = {}) {
  const DirichletLaplacian A(lat);
  const auto& g = lat.geometry();
  HeightField s(lat.site_count());
  for (const auto& b : boundary_edges(lat)) s[static_cast<std::size_t>(g.ordinal(b.inside))] += b.weight;
  const auto w = solve_green(A, s, cfg);
  SecondMoment m;
  m.lhs = eta2 * static_cast<double>(lat.site_count());
  m.rhs = eta2 * dot(w, w);
  m.relative_difference = std::abs(m.lhs - m.rhs) / m.lhs;
  return m;
}

}  // namespace qdi
