#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qdi/asymptotics.hpp"

using namespace qdi;

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

// 8 sum_k (2k+1)^-2 with the Euler-Maclaurin tail; pi^2 by the Basel sum.
double odd_basel_series(int terms) {
  double s = 0.0;
  for (int k = terms - 1; k >= 0; --k) s += 1.0 / ((2.0 * k + 1.0) * (2.0 * k + 1.0));
  const double n = 2.0 * terms + 1.0;
  s += 1.0 / (2.0 * (n - 1.0)) + 1.0 / (2.0 * n * n);
  return 8.0 * s;
}

// Composite Simpson on [a, b].
template <typename F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return s * h / 3.0;
}

}  // namespace

TEST(JIntegrand, FiniteNearZero) {
  for (double R : {1.0, 10.0, 100.0}) {
    const double v = j_integrand(1e-8, R);
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_NEAR(v, j_integrand(0.0, R), 1e-6);
  }
}

TEST(JOfR, IncreasesWithR) {
  const double a = j_of_r(1.0), b = j_of_r(10.0), c = j_of_r(100.0);
  EXPECT_LT(a, b);
  EXPECT_LT(b, c);
  EXPECT_LT(c, kPi2);
}

TEST(JOfR, LargeRApproachesLimit) { EXPECT_LE(std::abs(j_of_r(200.0) - kPi2) / kPi2, 0.02); }

TEST(JOfR, MonotoneApproachOnGrid) {
  double prev = 0.0, prev_gap = 1e300;
  for (double R = 1.0; R <= 256.0; R *= 2.0) {
    const double j = j_of_r(R);
    EXPECT_GT(j, prev) << R;
    EXPECT_LT(std::abs(j - kPi2), prev_gap) << R;
    prev = j;
    prev_gap = std::abs(j - kPi2);
  }
}

TEST(JOfR, AgreesWithIndependentReferences) {
  // Simpson up to u = 400 plus the 4/u^2 tail; the next tail term is O(u^-4).
  const double R = 3.0;
  auto g = [R](double u) { return j_integrand(u, R); };
  const double U = 400.0;
  const double ref = simpson(g, 0.0, 2.0, 200000) + simpson(g, 2.0, U, 400000) + 4.0 / U;
  EXPECT_NEAR(j_of_r(R), ref, 1e-7);
  // 30-digit reference.
  EXPECT_NEAR(j_of_r(R), 7.8479860451274901, 1e-9);
}

TEST(JOfR, ReportedErrorCoversTail) {
  const auto r = j_of_r_detailed(50.0);
  EXPECT_GT(r.tail_bound, 0.0);
  EXPECT_LE(r.error, 1e-8 * std::abs(r.value) + 1e-10);
}

TEST(JOfR, RejectsNonPositiveR) {
  EXPECT_THROW(j_of_r(0.0), std::invalid_argument);
  EXPECT_THROW(j_of_r(-1.0), std::invalid_argument);
}

TEST(JLimit, EqualsPiSquared) {
  EXPECT_NEAR(j_limit_reference(), kPi2, 1e-6);
  EXPECT_NEAR(odd_basel_series(100000), kPi2, 1e-9);
  EXPECT_NEAR(j_limit_reference(), odd_basel_series(100000), 1e-8);
}

TEST(JLimit, IntegrandContinuousAtOne) {
  EXPECT_DOUBLE_EQ(j_limit_integrand(1.0), 4.0);
  for (double step : {1e-3, 1e-5, -1e-5, -1e-3}) {
    const double x = 1.0 + step;
    const double h = x - 1.0;
    EXPECT_NEAR(j_limit_integrand(x), 8.0 * std::log1p(h) / (h * (2.0 + h)), 1e-13);
  }
}

TEST(JLimit, StableUnderTighterTolerance) {
  QuadratureConfig cfg;
  EXPECT_NEAR(j_limit_reference(cfg), j_limit_reference(cfg.tightened(0.5)), 1e-8);
}

TEST(IOfR, EvenInR) { EXPECT_DOUBLE_EQ(i_of_r(3.0), i_of_r(-3.0)); }

TEST(IOfR, MatchesJRelation) {
  for (double R : {2.0, 10.0, 50.0}) {
    const double lhs = 4.0 * R * i_of_r(R) / std::numbers::pi;
    EXPECT_LE(std::abs(lhs - j_of_r(R)) / j_of_r(R), 0.01) << R;
  }
}

TEST(IOfR, LargeRScaling) {
  const double target = std::numbers::pi * kPi2 / 4.0;
  EXPECT_LE(std::abs(50.0 * i_of_r(50.0) - target) / target, 0.03);
}

TEST(SphereIntegral, ZeroRadiusIsSphereArea) {
  EXPECT_DOUBLE_EQ(sphere_integral(0.0, 0.5), 4.0 * std::numbers::pi);
}

TEST(SphereIntegral, ClosedFormMatchesQuadrature) {
  for (double L : {1.0, 10.0, 100.0})
    for (double q : {0.25, 0.5, 0.75}) {
      const double c = sphere_integral(L, q);
      const double n = sphere_integral_quadrature(L, q).value;
      EXPECT_LE(std::abs(c - n) / c, 1e-8) << L << " " << q;
    }
}

TEST(SphereIntegral, HalfPowerClosedForm) {
  // q = 1/2: 2 pi (sqrt(1 + 4L^2) - 1) / L^2.
  for (double L : {0.5, 3.0, 100.0}) {
    const double ref = 2.0 * std::numbers::pi * (std::sqrt(1.0 + 4.0 * L * L) - 1.0) / (L * L);
    EXPECT_NEAR(sphere_integral(L, 0.5), ref, 1e-12 * ref);
  }
}

TEST(SphereIntegral, LeadingCoefficient) {
  EXPECT_NEAR(sphere_leading_coefficient(0.5), 4.0 * std::numbers::pi, 1e-14);
  const double L = 100.0;
  EXPECT_LE(std::abs(L * sphere_integral(L, 0.5) - 4.0 * std::numbers::pi) / (4.0 * std::numbers::pi), 0.01);
  // Relative correction is (4 L^2)^(q-1).
  for (double q : {0.25, 0.75}) {
    const double r = std::pow(1e4, 2.0 * q) * sphere_integral(1e4, q) / sphere_leading_coefficient(q);
    EXPECT_LE(std::abs(r - 1.0), 1.01 * std::pow(4e8, q - 1.0)) << q;
  }
}

TEST(SphereIntegral, AsymptoticFormLeadingOrder) {
  for (double q : {0.25, 0.5, 0.75})
    EXPECT_NEAR(sphere_integral_asymptotic(1e4, q) / sphere_integral(1e4, q), 1.0, 1.01 * std::pow(4e8, q - 1.0)) << q;
}

TEST(SphereIntegral, LogarithmicCaseRejected) {
  EXPECT_THROW(sphere_integral(10.0, 1.0), std::domain_error);
  EXPECT_THROW(sphere_integral_quadrature(10.0, 1.0), std::domain_error);
  EXPECT_THROW(sphere_integral(10.0, 0.0), std::invalid_argument);
  EXPECT_THROW(sphere_integral(-1.0, 0.5), std::invalid_argument);
}

TEST(SurfaceToVolume, BoundedAtHalfVanishingAboveHalf) {
  std::vector<double> half, above;
  for (double L : {10.0, 100.0, 1000.0}) {
    half.push_back(surface_to_volume_ratio(L, 0.5));
    above.push_back(surface_to_volume_ratio(L, 0.75));
  }
  for (double v : half) EXPECT_LE(v, 4.0 * std::numbers::pi);
  EXPECT_GT(half.back(), 0.99 * 4.0 * std::numbers::pi);
  EXPECT_GT(above[0], above[1]);
  EXPECT_GT(above[1], above[2]);
  const double slope = std::log10(above[2] / above[1]);
  EXPECT_NEAR(slope, -0.5, 0.05);
}

TEST(QuadratureConfig, Validation) {
  QuadratureConfig c;
  c.rel_tolerance = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}
