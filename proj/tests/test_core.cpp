#include <gtest/gtest.h>

#include <random>

#include "qsmc/core.hpp"

using namespace qsmc;

namespace {

ErrorKind kind_of(const EnvParams& p, Analysis a) {
  try {
    validate(p, a);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::DomainError;
}

}  // namespace

TEST(Validate, DefaultsAccepted) {
  const EnvParams p = validate(EnvParams::defaults());
  EXPECT_EQ(p.degradation, 10.0);
  EXPECT_EQ(p.rx_radius, 0.757e-6);
  EXPECT_EQ(p.emission_rate, 1000.0);
  EXPECT_EQ(p.diffusion, 5.5e-10);
  EXPECT_NEAR(p.expected_population(), 100.0, 1e-9);
}

TEST(Validate, ZeroDiffusionNamesTheField) {
  EnvParams p;
  p.diffusion = 0.0;
  try {
    validate(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonPositive);
    EXPECT_EQ(e.detail(), "diffusion");
  }
}

TEST(Validate, RejectsBadFields) {
  EnvParams p;
  p.emission_rate = -1.0;
  EXPECT_EQ(kind_of(p, Analysis::Channel), ErrorKind::NonPositive);
  p = {};
  p.degradation = -0.1;
  EXPECT_EQ(kind_of(p, Analysis::Channel), ErrorKind::NonPositive);
  p = {};
  p.threshold = 2.5;
  EXPECT_EQ(kind_of(p, Analysis::Channel), ErrorKind::ThresholdNotInteger);
  p = {};
  p.threshold = 0.0;
  EXPECT_EQ(kind_of(p, Analysis::Channel), ErrorKind::NonPositive);
  p = {};
  p.pop_radius = p.rx_radius;
  EXPECT_EQ(kind_of(p, Analysis::Channel), ErrorKind::DomainError);
}

TEST(Validate, SparsePopulationOnlyMattersForCooperation) {
  EnvParams p = EnvParams{}.with_population(50e-6, 0.5);
  EXPECT_EQ(kind_of(p, Analysis::Cooperation), ErrorKind::PopulationTooSparse);
  EXPECT_NO_THROW(validate(p, Analysis::Channel));
}

TEST(Validate, ZeroDegradationAllowed) {
  EnvParams p;
  p.degradation = 0.0;
  EXPECT_NO_THROW(validate(p, Analysis::Channel));
}

TEST(ReducedDensity, DenseSmallColony) {
  EnvParams p;
  p.pop_radius = units::from_um(20.0);
  p.density = units::density_from_per_um2(7.9e-2);
  const double area_um2 = std::numbers::pi * 400.0;
  const double expected = (7.9e-2 * area_um2 - 1.0) / area_um2;
  EXPECT_NEAR(units::density_to_per_um2(reduced_density(p)), expected, 1e-12);
  EXPECT_NEAR(units::density_to_per_um2(reduced_density(p)), 7.82e-2, 5e-5);
}

TEST(ReducedDensity, BoundaryIsZero) {
  const EnvParams p = EnvParams{}.with_population(50e-6, 1.0);
  EXPECT_NEAR(reduced_density(p), 0.0, 1e-6);
}

TEST(ReducedDensity, BelowOneThrows) {
  const EnvParams p = EnvParams{}.with_population(50e-6, 0.9);
  EXPECT_THROW(reduced_density(p), Error);
}

TEST(ReducedDensity, BelowDensityAndIncreasing) {
  double prev = -1.0;
  for (double mean : {1.0, 2.0, 5.0, 10.0, 100.0, 1e3, 1e5}) {
    const EnvParams p = EnvParams{}.with_population(50e-6, mean);
    const double r = reduced_density(p);
    EXPECT_LT(r, p.density);
    EXPECT_GT(r, prev);
    prev = r;
  }
}

TEST(ReducedDensity, RatioTendsToOne) {
  const EnvParams p = EnvParams{}.with_population(50e-6, 1e9);
  EXPECT_NEAR(reduced_density(p) / p.density, 1.0, 1e-8);
}

TEST(Units, RoundTripTwelveDigits) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const double v = std::pow(10.0, u(rng));
    EXPECT_NEAR(units::to_um(units::from_um(v)), v, 1e-12 * v);
    EXPECT_NEAR(units::density_to_per_um2(units::density_from_per_um2(v)), v, 1e-12 * v);
  }
}

TEST(Geometry, UpsilonReducesToSqrtOmega) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double b = 50e-6 * u(rng), r = 50e-6 * u(rng), phi = 6.28 * u(rng), th = 6.28 * u(rng);
    const auto g = GeometryTerms::at(b, r, phi, 0.0, th);
    EXPECT_GE(g.omega, 0.0);
    EXPECT_NEAR(g.upsilon, std::sqrt(g.omega), 1e-18);
    const auto g2 = GeometryTerms::at(b, r, phi, 0.5e-6 * u(rng), th);
    EXPECT_GE(g2.upsilon, 0.0);
  }
}

TEST(Geometry, OmegaIsSquaredDistance) {
  // phi is the supplement of the angle between b and r, so r = -b gives 0.
  EXPECT_NEAR(GeometryTerms::omega_of(3.0, 3.0, std::numbers::pi), 0.0, 1e-12);
  EXPECT_NEAR(GeometryTerms::omega_of(3.0, 4.0, std::numbers::pi / 2), 25.0, 1e-12);
  EXPECT_NEAR(distance({0, 0}, {3, 4}), 5.0, 1e-15);
}
