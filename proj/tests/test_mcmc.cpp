#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qdi/energy.hpp"
#include "qdi/gaussian_exact.hpp"
#include "qdi/mcmc.hpp"
#include "qdi/quadrature.hpp"

using namespace qdi;

namespace {

HeightField random_heights(const Lattice& lat, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  HeightField phi(lat.site_count());
  for (auto& v : phi.values) v = n(rng);
  return phi;
}

SamplerConfig quick_config() {
  SamplerConfig c;
  c.burn_in_sweeps = 1000;
  c.measure_sweeps = 30000;
  c.thin = 10;
  return c;
}

}  // namespace

TEST(ConditionalLogDensity, SingleSiteQuadratic) {
  const auto lat = Lattice::nearest_neighbor(2, 0);
  const double h = 0.8;
  const auto eta = disorder_from_values({h});
  const auto V = Potential::quadratic();
  for (double t : {-2.0, 0.0, 0.3, 5.0})
    EXPECT_NEAR(conditional_logdensity(lat, V, lat.zero_heights(), eta, 0, t), -t * t / 2.0 + h * t, 1e-14);
}

TEST(ConditionalLogDensity, DifferencesMatchEnergy) {
  const auto lat = Lattice::nearest_neighbor(2, 2);
  const auto V = Potential::quartic(1.0, 0.1);
  const auto eta = sample_disorder({DisorderFamily::gaussian, 1.0, 2, 0}, lat.geometry());
  auto phi = random_heights(lat, 4);
  for (std::size_t i : {0ul, 7ul, 12ul, 24ul}) {
    const double t1 = 0.4, t2 = -1.1;
    auto a = phi, b = phi;
    a[i] = t1;
    b[i] = t2;
    const double dE = energy(lat, V, a, eta) - energy(lat, V, b, eta);
    const double dl = conditional_logdensity(lat, V, phi, eta, i, t1) - conditional_logdensity(lat, V, phi, eta, i, t2);
    EXPECT_NEAR(dl, -dE, 1e-12);
  }
}

TEST(ConditionalLogDensity, QuarticChainMatchesEnergyDerivative) {
  // Three-site chain in d = 1; derivative in t against centered differences
  // of the full energy.
  const auto lat = Lattice::nearest_neighbor(1, 1);
  const auto V = Potential::quartic(1.0, 0.1);
  const auto eta = disorder_from_values({0.3, -0.7, 1.2});
  auto phi = random_heights(lat, 8);
  const double h = 1e-5;
  for (std::size_t i = 0; i < 3; ++i) {
    const double t = phi[i];
    auto up = phi, dn = phi;
    up[i] = t + h;
    dn[i] = t - h;
    const double dE = (energy(lat, V, up, eta) - energy(lat, V, dn, eta)) / (2 * h);
    const double dl = (conditional_logdensity(lat, V, phi, eta, i, t + h) -
                       conditional_logdensity(lat, V, phi, eta, i, t - h)) / (2 * h);
    EXPECT_NEAR(dl, -dE, 1e-7);
  }
}

TEST(MetropolisSweep, TinyProposalsAreAccepted) {
  const auto lat = Lattice::nearest_neighbor(2, 3);
  const auto eta = sample_disorder({}, lat.geometry());
  ChainState s(lat, 1, 1e-9);
  double acc = 0.0;
  for (int k = 0; k < 10; ++k) acc += metropolis_sweep(s, lat, Potential::quartic(1.0, 0.1), eta);
  EXPECT_GT(acc / 10.0, 0.999);
}

TEST(MetropolisSweep, DeterministicGivenSeed) {
  const auto lat = Lattice::nearest_neighbor(2, 3);
  const auto eta = sample_disorder({}, lat.geometry());
  const auto V = Potential::quartic(1.0, 0.1);
  ChainState a(lat, 77, 0.8), b(lat, 77, 0.8);
  for (int k = 0; k < 50; ++k) {
    metropolis_sweep(a, lat, V, eta);
    metropolis_sweep(b, lat, V, eta);
  }
  EXPECT_EQ(a.phi.values, b.phi.values);
  EXPECT_EQ(a.sweeps, 50u);
}

TEST(MetropolisSweep, SingleSiteGaussianMoments) {
  const auto lat = Lattice::nearest_neighbor(2, 0);
  const double h = 0.6;
  const auto eta = disorder_from_values({h});
  SamplerConfig cfg;
  cfg.burn_in_sweeps = 2000;
  cfg.measure_sweeps = 100000;
  auto acc = make_accumulator(2, cfg);
  run_chain(lat, Potential::quadratic(), eta, cfg, 5, acc, [](const HeightField& phi, std::span<double> v) {
    v[0] = phi[0];
    v[1] = phi[0] * phi[0];
  });
  const auto m = acc.estimate(0);
  const auto m2 = acc.estimate(1);
  EXPECT_LE(std::abs(m.mean - h), 4.0 * m.std_error);
  const double var = m2.mean - m.mean * m.mean;
  EXPECT_NEAR(var, 1.0, 0.05);
}

TEST(MetropolisSweep, StationaryHistogramMatchesQuadrature) {
  const auto lat = Lattice::nearest_neighbor(2, 0);
  const auto V = Potential::quartic(1.0, 0.1);
  const double h = 0.9;
  const auto eta = disorder_from_values({h});
  auto logw = [&](double t) { return -V.value(t) + h * t; };
  QuadratureConfig qc;
  const auto oracle = single_site_quadrature_oracle(V, h, {0.25, 0.25, 0.25, 0.25}, qc);
  // Second moment for the bin range.
  const auto z = integrate_pieces([&](double t) { return std::exp(logw(t)); }, {-12.0, 0.0, 12.0}, qc);
  const auto m2 = integrate_pieces([&](double t) { return t * t * std::exp(logw(t)); }, {-12.0, 0.0, 12.0}, qc);
  const double sd = std::sqrt(m2.value / z.value - oracle.mean_height * oracle.mean_height);
  const int bins = 50;
  const double lo = oracle.mean_height - 6.0 * sd, hi = oracle.mean_height + 6.0 * sd;
  const double width = (hi - lo) / bins;

  ChainState s(lat, 2024, 1.5);
  std::vector<double> counts(bins, 0.0);
  std::size_t n = 0;
  for (int k = 0; k < 1000; ++k) metropolis_sweep(s, lat, V, eta);
  for (int k = 0; k < 1000000; ++k) {
    metropolis_sweep(s, lat, V, eta);
    if (k % 10) continue;  // thin toward independent draws
    ++n;
    const double x = s.phi[0];
    if (x >= lo && x < hi) counts[static_cast<std::size_t>((x - lo) / width)] += 1.0;
  }
  double chi2 = 0.0;
  int dof = 0;
  for (int b = 0; b < bins; ++b) {
    const double a = lo + b * width;
    const auto p = gauss_kronrod([&](double t) { return std::exp(logw(t)); }, a, a + width, qc).value / z.value;
    const double expect = p * static_cast<double>(n);
    if (expect < 5.0) continue;
    chi2 += (counts[b] - expect) * (counts[b] - expect) / expect;
    ++dof;
  }
  ASSERT_GT(dof, 10);
  EXPECT_LT(chi2 / (dof - 1), 2.0) << "chi2 = " << chi2 << " dof = " << dof;
}

TEST(EstimateGradientMean, ZeroFieldMeansVanish) {
  const auto lat = Lattice::nearest_neighbor(2, 2);
  const auto eta = disorder_from_values(std::vector<double>(lat.site_count(), 0.0));
  const auto est = estimate_gradient_mean(lat, Potential::quartic(1.0, 0.1), eta, all_edges(lat), quick_config(), 3);
  for (const auto& [e, x] : est.edges) EXPECT_LE(std::abs(x.mean), 4.0 * x.std_error) << e;
}

TEST(EstimateGradientMean, OrientationFlipsSignExactly) {
  const auto lat = Lattice::nearest_neighbor(2, 1);
  const auto eta = sample_disorder({}, lat.geometry());
  const auto est = estimate_gradient_mean(lat, Potential::quartic(1.0, 0.1), eta, all_edges(lat), quick_config(), 4);
  for (const auto& ed : lat.edges()) {
    const auto f = est.oriented(lat, ed.lo, ed.hi);
    const auto b = est.oriented(lat, ed.hi, ed.lo);
    EXPECT_EQ(f.mean, -b.mean);
    EXPECT_EQ(f.std_error, b.std_error);
  }
}

TEST(EstimateGradientMean, QuadraticMatchesExactSolver) {
  const auto lat = Lattice::nearest_neighbor(2, 4);
  const auto eta = sample_disorder({DisorderFamily::gaussian, 1.0, 21, 0}, lat.geometry());
  const DirichletLaplacian A(lat);
  const auto X = mean_gradient(A, eta);
  SamplerConfig cfg;
  cfg.burn_in_sweeps = 2000;
  cfg.measure_sweeps = 60000;
  cfg.thin = 10;
  const auto est = estimate_gradient_mean(lat, Potential::quadratic(), eta, all_edges(lat), cfg, 9);
  std::size_t good = 0;
  for (const auto& [e, x] : est.edges)
    if (std::abs(x.mean - X[e]) <= 3.0 * x.std_error) ++good;
  EXPECT_GE(static_cast<double>(good), 0.95 * static_cast<double>(lat.edge_count()));
  EXPECT_EQ(est.diagnostics.capped, 0u);
}

TEST(EstimateGradientMean, SingleSiteQuarticMatchesQuadrature) {
  const auto lat = Lattice::nearest_neighbor(2, 0);
  const auto V = Potential::quartic(1.0, 0.1);
  const double h = 1.4;
  const auto oracle = single_site_quadrature_oracle(V, h, lat.support_weights());
  SamplerConfig cfg;
  cfg.measure_sweeps = 300000;
  const auto est = estimate_gradient_mean(lat, V, disorder_from_values({h}), all_edges(lat), cfg, 10);
  for (const auto& b : boundary_edges(lat)) {
    const auto x = est.oriented(lat, b.inside, b.outside);
    EXPECT_LE(std::abs(x.mean - oracle.mean_derivative), 3.0 * x.std_error);
  }
}

TEST(EstimateGradientMean, AutotuneReachesTargetBand) {
  const auto V4 = Potential::quartic(1.0, 0.1);
  const auto V2 = Potential::quadratic();
  for (auto [d, L, V] : {std::tuple{2, 0, V4}, std::tuple{2, 4, V2}, std::tuple{2, 4, V4}, std::tuple{3, 2, V4},
                         std::tuple{1, 5, V2}}) {
    const auto lat = Lattice::nearest_neighbor(d, L);
    const auto eta = sample_disorder({}, lat.geometry());
    SamplerConfig cfg = quick_config();
    cfg.proposal_width = 10.0;
    cfg.measure_sweeps = 2000;
    const auto est = estimate_gradient_mean(lat, V, eta, {0}, cfg, 1);
    EXPECT_GE(est.diagnostics.measure_acceptance, 0.3) << d << " " << L;
    EXPECT_LE(est.diagnostics.measure_acceptance, 0.6) << d << " " << L;
  }
}

TEST(EstimateDivergence, QuarticResidualsWithinPropagatedError) {
  const auto lat = Lattice::nearest_neighbor(2, 3);
  const auto eta = sample_disorder({DisorderFamily::gaussian, 1.0, 5, 0}, lat.geometry());
  SamplerConfig cfg = quick_config();
  cfg.measure_sweeps = 60000;
  const auto est = estimate_divergence(lat, Potential::quartic(1.0, 0.1), eta, cfg, 12);
  std::size_t good = 0;
  for (const auto& r : est.residual)
    if (std::abs(r.mean) <= 4.0 * r.std_error) ++good;
  EXPECT_GE(static_cast<double>(good), 0.95 * static_cast<double>(lat.site_count()));
}

TEST(SamplerConfig, Validation) {
  SamplerConfig c;
  c.measure_sweeps = 50;
  c.thin = 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = SamplerConfig{};
  c.proposal_width = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(SingleSiteOracle, QuadraticGaussianIntegral) {
  const auto o = single_site_quadrature_oracle(Potential::quadratic(), 0.7, {0.25, 0.25, 0.25, 0.25});
  EXPECT_NEAR(o.mean_height, 0.7, 1e-9);
  EXPECT_NEAR(o.divergence, 0.7, 1e-9);
}

TEST(SingleSiteOracle, ZeroFieldIsEven) {
  for (const auto& V : {Potential::quadratic(), Potential::quartic(1.0, 0.3), Potential::quartic(-2.0, 0.5)}) {
    const auto o = single_site_quadrature_oracle(V, 0.0, {0.5, 0.5});
    EXPECT_NEAR(o.mean_height, 0.0, 1e-10);
    EXPECT_NEAR(o.mean_derivative, 0.0, 1e-10);
  }
}

TEST(SingleSiteOracle, PartialIntegrationIdentity) {
  const auto o = single_site_quadrature_oracle(Potential::quartic(1.0, 0.5), 1.0, {0.25, 0.25, 0.25, 0.25});
  EXPECT_LE(std::abs(o.residual), 1e-8);
  // Also for an uneven kernel mass split and a double-well potential.
  const auto w = single_site_quadrature_oracle(Potential::quartic(-1.0, 0.2), -2.5, {0.1, 0.1, 0.4, 0.4});
  EXPECT_LE(std::abs(w.residual), 1e-8);
}
