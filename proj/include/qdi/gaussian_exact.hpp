#pragma once

// Exact treatment of the Gaussian model V(t) = t^2/2 with zero boundary
// condition. The Gibbs mean of the gradient on edge (i,j) is
//   X_ij = sum_y T_{ij,y} eta_y,   T_{ij,y} = G(i,y) - G(j,y),
// with G = (I - P)^{-1} restricted to the box (G = 0 off the box), and the
// disorder covariance of X is eta2 * sum_y T_{a,y} T_{b,y}.

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "qdi/disorder.hpp"
#include "qdi/lattice.hpp"
#include "qdi/parallel.hpp"

namespace qdi {

struct SolverConfig {
  double rel_tolerance = 1e-10;
  /// 0 selects 10 * |Lambda|.
  std::size_t max_iterations = 0;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual, std::size_t iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  std::size_t iterations() const { return iterations_; }

 private:
  double residual_;
  std::size_t iterations_;
};

/// (I - P) on interior heights with zero exterior:
///   (A u)_i = u_i - sum_j p(j - i) u_j.
class DirichletLaplacian {
 public:
  explicit DirichletLaplacian(const Lattice& lat) : lat_(&lat) {
    const auto& g = lat.geometry();
    const std::size_t n = lat.site_count();
    const std::size_t deg = lat.degree();
    nbr_.resize(n * deg);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < deg; ++k) nbr_[i * deg + k] = g.ordinal(lat.neighbor(i, k));
  }

  /// Keeps a pointer to the lattice, which must outlive the operator.
  explicit DirichletLaplacian(Lattice&&) = delete;

  const Lattice& lattice() const { return *lat_; }
  std::size_t size() const { return lat_->site_count(); }

  void apply(const std::vector<double>& x, std::vector<double>& y) const {
    const std::size_t n = size();
    const std::size_t deg = lat_->degree();
    const auto& w = lat_->support_weights();
    y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = x[i];
      const std::int64_t* row = &nbr_[i * deg];
      for (std::size_t k = 0; k < deg; ++k)
        if (row[k] >= 0) s -= w[k] * x[static_cast<std::size_t>(row[k])];
      y[i] = s;
    }
  }

  std::vector<double> apply(const std::vector<double>& x) const {
    std::vector<double> y;
    apply(x, y);
    return y;
  }

 private:
  const Lattice* lat_;
  std::vector<std::int64_t> nbr_;
};

/// Conjugate-gradient solve of A u = source; ||A u - source|| <= tol ||source||.
inline HeightField solve_green(const DirichletLaplacian& A, const HeightField& source, const SolverConfig& cfg = {}) {
  const std::size_t n = A.size();
  if (source.size() != n) throw std::invalid_argument("source does not match the lattice");
  if (!(cfg.rel_tolerance > 0.0)) throw std::invalid_argument("solver tolerance must be > 0");
  const std::size_t max_it = cfg.max_iterations ? cfg.max_iterations : 10 * n;

  double bnorm2 = 0.0;
  for (double v : source.values) {
    if (!std::isfinite(v)) throw std::invalid_argument("source must be finite");
    bnorm2 += v * v;
  }
  HeightField u(n);
  if (bnorm2 == 0.0) return u;
  const double target2 = cfg.rel_tolerance * cfg.rel_tolerance * bnorm2;

  std::vector<double> r = source.values;
  std::vector<double> p = r;
  std::vector<double> ap(n);
  double rr = bnorm2;
  std::size_t it = 0;
  while (rr > target2) {
    if (it == max_it) {
      std::ostringstream os;
      os << "conjugate gradient did not converge in " << max_it
         << " iterations (relative residual " << std::sqrt(rr / bnorm2) << ")";
      throw SolverError(os.str(), std::sqrt(rr / bnorm2), it);
    }
    A.apply(p, ap);
    double pap = 0.0;
    for (std::size_t i = 0; i < n; ++i) pap += p[i] * ap[i];
    const double alpha = rr / pap;
    double rr_new = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      u[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
      rr_new += r[i] * r[i];
    }
    const double beta = rr_new / rr;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    rr = rr_new;
    ++it;
  }
  return u;
}

/// Column G(., y) for an interior site y.
inline HeightField green_column(const DirichletLaplacian& A, SiteId y, const SolverConfig& cfg = {}) {
  const auto& g = A.lattice().geometry();
  if (!g.is_interior(y)) throw std::invalid_argument("green_column source must be interior");
  HeightField src(A.size());
  src[static_cast<std::size_t>(g.ordinal(y))] = 1.0;
  return solve_green(A, src, cfg);
}

/// T_{ij,y} = G(i,y) - G(j,y), with G = 0 for sites off the box.
inline double t_entry(const DirichletLaplacian& A, SiteId i, SiteId j, SiteId y, const SolverConfig& cfg = {}) {
  if (i == j) return 0.0;
  const auto col = green_column(A, y, cfg);
  const auto& lat = A.lattice();
  return lat.height(col, i) - lat.height(col, j);
}

/// X = sum_y T eta_y from one solve u = G eta, X_ij = u_i - u_j.
inline VectorField mean_gradient(const DirichletLaplacian& A, const DisorderField& eta, const SolverConfig& cfg = {}) {
  if (eta.size() != A.size()) throw std::invalid_argument("disorder field does not match the lattice");
  const auto u = solve_green(A, HeightField(eta.values), cfg);
  return gradient_of(A.lattice(), u);
}

/// Row y -> T_{ij,y} of the T-matrix for the pair (i, j). Since G is
/// symmetric this is G applied to delta_i - delta_j (exterior endpoints drop).
inline HeightField edge_response(const DirichletLaplacian& A, SiteId i, SiteId j, const SolverConfig& cfg = {}) {
  const auto& g = A.lattice().geometry();
  HeightField src(A.size());
  if (i == j) return src;
  if (g.is_interior(i)) src[static_cast<std::size_t>(g.ordinal(i))] += 1.0;
  if (g.is_interior(j)) src[static_cast<std::size_t>(g.ordinal(j))] -= 1.0;
  return solve_green(A, src, cfg);
}

inline HeightField edge_response(const DirichletLaplacian& A, const Edge& e, const SolverConfig& cfg = {}) {
  return edge_response(A, e.lo, e.hi, cfg);
}

inline double dot(const HeightField& a, const HeightField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct SitePair {
  SiteId from = 0;
  SiteId to = 0;
};

/// C(a, b) = eta2 * sum_y T_{a,y} T_{b,y}.
inline double covariance(const DirichletLaplacian& A, SitePair a, SitePair b, double eta2,
                         const SolverConfig& cfg = {}) {
  if (!(eta2 >= 0.0)) throw std::invalid_argument("eta2 must be non-negative");
  if (a.from == a.to || b.from == b.to || eta2 == 0.0) return 0.0;
  const auto ga = edge_response(A, a.from, a.to, cfg);
  if (a.from == b.from && a.to == b.to) return eta2 * dot(ga, ga);
  const auto gb = edge_response(A, b.from, b.to, cfg);
  return eta2 * dot(ga, gb);
}

inline double variance(const DirichletLaplacian& A, SitePair a, double eta2, const SolverConfig& cfg = {}) {
  return covariance(A, a, a, eta2, cfg);
}

/// Pairwise covariance matrix over a list of edges; one solve per edge.
inline std::vector<std::vector<double>> covariance_matrix(const DirichletLaplacian& A, const std::vector<SitePair>& edges,
                                                          double eta2, const SolverConfig& cfg = {},
                                                          unsigned threads = 1) {
  std::vector<HeightField> rows(edges.size());
  parallel_for(edges.size(), threads, [&](std::size_t a) { rows[a] = edge_response(A, edges[a].from, edges[a].to, cfg); });
  std::vector<std::vector<double>> c(edges.size(), std::vector<double>(edges.size()));
  for (std::size_t a = 0; a < edges.size(); ++a)
    for (std::size_t b = a; b < edges.size(); ++b) c[a][b] = c[b][a] = eta2 * dot(rows[a], rows[b]);
  return c;
}

/// max_y |sum_{boundary (i,j)} p(j-i) T_{ij,y} - 1|, column by column.
/// Reference formulation: one Green solve per y.
inline double surface_identity_check_direct(const DirichletLaplacian& A, const SolverConfig& cfg = {},
                                            unsigned threads = 1) {
  const auto& lat = A.lattice();
  const auto bnd = boundary_edges(lat);
  std::vector<double> dev(lat.site_count());
  parallel_for(lat.site_count(), threads, [&](std::size_t y) {
    const auto col = green_column(A, lat.geometry().interior_site(y), cfg);
    double s = 0.0;
    for (const auto& b : bnd) s += b.weight * (lat.height(col, b.inside) - lat.height(col, b.outside));
    dev[y] = std::abs(s - 1.0);
  });
  double worst = 0.0;
  for (double v : dev) worst = std::max(worst, v);
  return worst;
}

/// Same quantity via the adjoint: sum_b p_b T_{b,y} = (G s)(y) where s_i is
/// the kernel mass leaving the box from i. One solve.
inline double surface_identity_check(const DirichletLaplacian& A, const SolverConfig& cfg = {}) {
  const auto& lat = A.lattice();
  const auto& g = lat.geometry();
  HeightField s(lat.site_count());
  for (const auto& b : boundary_edges(lat)) s[static_cast<std::size_t>(g.ordinal(b.inside))] += b.weight;
  const auto w = solve_green(A, s, cfg);
  double worst = 0.0;
  for (double v : w.values) worst = std::max(worst, std::abs(v - 1.0));
  return worst;
}

}  // namespace qdi
