#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qdi/diagnostics.hpp"
#include "qdi/gaussian_exact.hpp"

using namespace qdi;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

SiteId id(const Lattice& lat, Coord c) { return *lat.geometry().id_of(c); }

}  // namespace

TEST(DirichletLaplacian, SymmetricPositiveDefinite) {
  for (const auto& lat : {Lattice::nearest_neighbor(2, 4), Lattice::nearest_neighbor(3, 2),
                          Lattice::with_kernel(2, 3, Kernel::axial_range2(2, 0.3))}) {
    const DirichletLaplacian A(lat);
    const auto u = random_vector(A.size(), 1);
    const auto v = random_vector(A.size(), 2);
    const auto Au = A.apply(u);
    const auto Av = A.apply(v);
    double uAv = 0.0, Auv = 0.0, uAu = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      uAv += u[i] * Av[i];
      Auv += Au[i] * v[i];
      uAu += u[i] * Au[i];
    }
    EXPECT_NEAR(uAv, Auv, 1e-12 * (std::abs(uAv) + 1.0));
    EXPECT_GT(uAu, 0.0);
  }
}

TEST(SolveGreen, ZeroSource) {
  const auto lat = Lattice::nearest_neighbor(2, 3);
  const DirichletLaplacian A(lat);
  const auto u = solve_green(A, lat.zero_heights());
  for (double v : u.values) EXPECT_EQ(v, 0.0);
}

TEST(SolveGreen, SingleSiteIsIdentity) {
  for (int d = 1; d <= 3; ++d) {
    const auto lat = Lattice::nearest_neighbor(d, 0);
    const DirichletLaplacian A(lat);
    EXPECT_DOUBLE_EQ(solve_green(A, HeightField(1, 1.0))[0], 1.0);
  }
}

TEST(SolveGreen, MatchesDenseInverseOnThreeByThree) {
  const auto lat = Lattice::nearest_neighbor(2, 1);
  const DirichletLaplacian A(lat);
  const auto G = oracle::dense_green(2, 1, lat.kernel());
  const auto sites = oracle::box_sites(2, 1);
  const auto u = green_column(A, id(lat, Coord{}));
  for (std::size_t k = 0; k < sites.size(); ++k)
    EXPECT_NEAR(u[lat.geometry().ordinal_of(sites[k])], oracle::green_at(G, sites, sites[k], Coord{}), 1e-10);
}

TEST(SolveGreen, RangeTwoKernelMatchesDenseInverse) {
  const auto k = Kernel::axial_range2(2, 0.35);
  const auto lat = Lattice::with_kernel(2, 2, k);
  const DirichletLaplacian A(lat);
  const auto G = oracle::dense_green(2, 2, k);
  const auto sites = oracle::box_sites(2, 2);
  const Coord y{1, -1};
  const auto u = green_column(A, id(lat, y));
  for (const auto& s : sites) EXPECT_NEAR(u[lat.geometry().ordinal_of(s)], oracle::green_at(G, sites, s, y), 1e-10);
}

TEST(SolveGreen, ReportsNonConvergence) {
  const auto lat = Lattice::nearest_neighbor(2, 10);
  const DirichletLaplacian A(lat);
  SolverConfig cfg;
  cfg.max_iterations = 2;
  try {
    green_column(A, id(lat, Coord{}), cfg);
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_GT(e.residual(), cfg.rel_tolerance);
    EXPECT_EQ(e.iterations(), 2u);
  }
}

TEST(TEntry, DegenerateAntisymmetricAndDense) {
  const auto lat = Lattice::nearest_neighbor(2, 1);
  const DirichletLaplacian A(lat);
  const SiteId c = id(lat, Coord{});
  const SiteId r = id(lat, Coord{0, 1});
  EXPECT_EQ(t_entry(A, c, c, c), 0.0);
  EXPECT_EQ(t_entry(A, c, r, c), -t_entry(A, r, c, c));
  const auto G = oracle::dense_green(2, 1, lat.kernel());
  const auto sites = oracle::box_sites(2, 1);
  EXPECT_NEAR(t_entry(A, c, r, c), oracle::t_entry(G, sites, Coord{}, Coord{0, 1}, Coord{}), 1e-10);
  // Boundary-crossing edge: exterior endpoint contributes G = 0.
  const SiteId out = id(lat, Coord{2, 0});
  const SiteId edge_in = id(lat, Coord{1, 0});
  EXPECT_NEAR(t_entry(A, edge_in, out, c), oracle::green_at(G, sites, Coord{1, 0}, Coord{}), 1e-10);
}

TEST(MeanGradient, ZeroField) {
  const auto lat = Lattice::nearest_neighbor(2, 3);
  const DirichletLaplacian A(lat);
  const auto X = mean_gradient(A, disorder_from_values(std::vector<double>(lat.site_count(), 0.0)));
  for (double v : X.values) EXPECT_EQ(v, 0.0);
}

TEST(MeanGradient, SingleSiteUnitField) {
  for (int d = 1; d <= 3; ++d) {
    const auto lat = Lattice::nearest_neighbor(d, 0);
    const DirichletLaplacian A(lat);
    const auto X = mean_gradient(A, disorder_from_values({1.0}));
    ASSERT_EQ(X.size(), static_cast<std::size_t>(2 * d));
    for (const auto& b : boundary_edges(lat)) EXPECT_DOUBLE_EQ(lat.value(X, b.inside, b.outside), 1.0);
  }
}

TEST(MeanGradient, OneSolveEqualsEntrywiseSum) {
  const auto lat = Lattice::nearest_neighbor(2, 1);
  const DirichletLaplacian A(lat);
  const auto G = oracle::dense_green(2, 1, lat.kernel());
  const auto sites = oracle::box_sites(2, 1);
  const auto& g = lat.geometry();
  for (int trial = 0; trial < 2; ++trial) {
    std::vector<double> eta(lat.site_count(), 0.0);
    if (trial == 0)
      eta[g.ordinal_of(Coord{})] = 1.0;
    else
      eta = random_vector(lat.site_count(), 17);
    const auto X = mean_gradient(A, disorder_from_values(eta));
    for (std::size_t e = 0; e < lat.edge_count(); ++e) {
      const auto& ed = lat.edge(e);
      double want = 0.0;
      for (const auto& y : sites)
        want += oracle::t_entry(G, sites, g.coord(ed.lo), g.coord(ed.hi), y) * eta[g.ordinal_of(y)];
      EXPECT_NEAR(X[e], want, 1e-10);
    }
  }
}

TEST(MeanGradient, IsAGradientField) {
  const auto lat = Lattice::nearest_neighbor(2, 2);
  const DirichletLaplacian A(lat);
  const auto eta = sample_disorder({DisorderFamily::gaussian, 1.0, 3, 0}, lat.geometry());
  EXPECT_LE(loop_residuals(lat, mean_gradient(A, eta)), 1e-10);
}

TEST(MeanGradient, DivergenceEquationIsExact) {
  for (int d = 2; d <= 3; ++d) {
    const auto lat = Lattice::nearest_neighbor(d, d == 2 ? 10 : 5);
    const DirichletLaplacian A(lat);
    for (std::uint64_t r = 0; r < 3; ++r) {
      const auto eta = sample_disorder({DisorderFamily::uniform, 1.0, 8, r}, lat.geometry());
      EXPECT_LE(divergence_residual(lat, mean_gradient(A, eta), eta).max_abs, 1e-8);
    }
  }
}

TEST(Covariance, DegenerateAndSymmetric) {
  const auto lat = Lattice::nearest_neighbor(2, 2);
  const DirichletLaplacian A(lat);
  const SiteId c = id(lat, Coord{});
  EXPECT_EQ(covariance(A, {c, c}, {c, id(lat, Coord{1, 0})}, 1.0), 0.0);

  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> pick(0, lat.edge_count() - 1);
  for (int n = 0; n < 10; ++n) {
    const auto& a = lat.edge(pick(rng));
    const auto& b = lat.edge(pick(rng));
    const double ab = covariance(A, {a.lo, a.hi}, {b.lo, b.hi}, 1.3);
    const double ba = covariance(A, {b.lo, b.hi}, {a.lo, a.hi}, 1.3);
    EXPECT_NEAR(ab, ba, 1e-14 * (1.0 + std::abs(ab)));
  }
}

TEST(Covariance, CentralEdgeMatchesDenseOracle) {
  const auto lat = Lattice::nearest_neighbor(2, 1);
  const DirichletLaplacian A(lat);
  const auto G = oracle::dense_green(2, 1, lat.kernel());
  const auto sites = oracle::box_sites(2, 1);
  double want = 0.0;
  for (const auto& y : sites) {
    const double t = oracle::t_entry(G, sites, Coord{}, Coord{1, 0}, y);
    want += t * t;
  }
  const SitePair e{id(lat, Coord{}), id(lat, Coord{1, 0})};
  EXPECT_NEAR(covariance(A, e, e, 1.0), want, 1e-10);
  EXPECT_NEAR(variance(A, e, 2.0), 2.0 * want, 2e-10);
}

TEST(Covariance, PositiveSemidefinite) {
  const auto lat = Lattice::nearest_neighbor(2, 3);
  const DirichletLaplacian A(lat);
  std::vector<SitePair> edges;
  for (std::size_t e = 0; e < lat.edge_count(); e += 7) edges.push_back({lat.edge(e).lo, lat.edge(e).hi});
  const auto C = covariance_matrix(A, edges, 1.0);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto c = random_vector(edges.size(), 100 + s);
    double q = 0.0;
    for (std::size_t a = 0; a < edges.size(); ++a)
      for (std::size_t b = 0; b < edges.size(); ++b) q += c[a] * c[b] * C[a][b];
    EXPECT_GE(q, -1e-10);
  }
}

TEST(Variance, ZeroDisorderAndSingleSite) {
  const auto lat = Lattice::nearest_neighbor(2, 0);
  const DirichletLaplacian A(lat);
  const SitePair e{id(lat, Coord{}), id(lat, Coord{1, 0})};
  EXPECT_EQ(variance(A, e, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(variance(A, e, 1.0), 1.0);
}

TEST(Variance, GrowsWithBoxInTwoDimensions) {
  double prev = 0.0;
  for (int L : {8, 16, 32}) {
    const auto lat = Lattice::nearest_neighbor(2, L);
    const DirichletLaplacian A(lat);
    const double v = variance(A, central_edge(lat), 1.0);
    EXPECT_GT(v, prev) << L;
    prev = v;
  }
}

TEST(SurfaceIdentity, SingleSiteExact) {
  for (int d = 1; d <= 3; ++d) {
    const auto lat = Lattice::nearest_neighbor(d, 0);
    const DirichletLaplacian A(lat);
    // 1/(2d) is a dyadic rational for d = 1, 2; in d = 3 the six weights of
    // 1/6 sum to 1 only up to rounding.
    const double tol = d == 3 ? 1e-15 : 0.0;
    EXPECT_LE(surface_identity_check_direct(A), tol);
    EXPECT_LE(surface_identity_check(A), tol);
  }
}

TEST(SurfaceIdentity, HoldsInTwoAndThreeDimensions) {
  for (auto [d, L] : {std::pair{2, 4}, std::pair{3, 3}}) {
    const auto lat = Lattice::nearest_neighbor(d, L);
    const DirichletLaplacian A(lat);
    const double direct = surface_identity_check_direct(A, {}, 4);
    EXPECT_LE(direct, 1e-8);
    EXPECT_LE(surface_identity_check(A), 1e-8);
  }
}

TEST(SurfaceIdentity, HoldsForRangeTwoKernel) {
  const auto lat = Lattice::with_kernel(2, 3, Kernel::axial_range2(2, 0.4));
  const DirichletLaplacian A(lat);
  EXPECT_LE(surface_identity_check_direct(A), 1e-8);
}

TEST(SecondMoment, PairwiseSumEqualsVolume) {
  for (auto [d, L] : {std::pair{1, 3}, std::pair{2, 3}, std::pair{3, 2}}) {
    const auto lat = Lattice::nearest_neighbor(d, L);
    const auto m = second_moment_identity(lat, 1.7, {}, 4);
    EXPECT_LE(m.relative_difference, 1e-6);
    const auto fast = second_moment_identity_adjoint(lat, 1.7);
    EXPECT_NEAR(m.rhs, fast.rhs, 1e-8 * m.lhs);
  }
}

TEST(SecondMoment, SingleSite) {
  const auto lat = Lattice::nearest_neighbor(2, 0);
  const auto m = second_moment_identity(lat, 2.5);
  EXPECT_DOUBLE_EQ(m.lhs, 2.5);
  EXPECT_DOUBLE_EQ(m.rhs, 2.5);
}
