#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "qsmc/quadrature.hpp"

using namespace qsmc;

TEST(Integrate1d, PolynomialsAreExact) {
  auto r = quad::integrate_1d([](double x) { return 3 * x * x - 2 * x + 1; }, -1.0, 2.0);
  EXPECT_NEAR(r.value, 9.0 - 3.0 + 3.0, 1e-13);
  EXPECT_TRUE(r.converged);
}

TEST(Integrate1d, HalfLine) {
  auto r = quad::integrate_1d([](double x) { return std::exp(-x); }, 0.0, INFINITY);
  EXPECT_NEAR(r.value, 1.0, 1e-10);
  auto g = quad::integrate_1d([](double x) { return 1.0 / (1.0 + x * x); }, 0.0, INFINITY);
  EXPECT_NEAR(g.value, std::numbers::pi / 2, 1e-9);
}

TEST(Integrate1d, EndpointSingularity) {
  auto r = quad::integrate_1d([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0);
  EXPECT_NEAR(r.value, 2.0, 1e-7);
  auto l = quad::integrate_1d([](double x) { return std::log(x); }, 0.0, 1.0);
  EXPECT_NEAR(l.value, -1.0, 1e-7);
}

TEST(Integrate1d, BreakpointsAtKinks) {
  const std::array<double, 1> brk{0.3};
  auto r = quad::integrate_1d([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, quad::QuadSpec::line(), brk);
  EXPECT_NEAR(r.value, 0.5 * (0.09 + 0.49), 1e-14);
}

TEST(Integrate1d, ReversedLimitsFlipSign) {
  auto a = quad::integrate_1d([](double x) { return std::sin(x); }, 0.0, 2.0);
  auto b = quad::integrate_1d([](double x) { return std::sin(x); }, 2.0, 0.0);
  EXPECT_NEAR(a.value, -b.value, 1e-14);
}

TEST(Integrate1d, VectorMatchesScalars) {
  auto v = quad::integrate_1d([](double x) { return std::array<double, 3>{std::exp(x), std::cos(x), x * x * x}; }, 0.0, 1.5);
  EXPECT_NEAR(v.value[0], std::exp(1.5) - 1.0, 1e-12);
  EXPECT_NEAR(v.value[1], std::sin(1.5), 1e-12);
  EXPECT_NEAR(v.value[2], std::pow(1.5, 4) / 4, 1e-12);
}

TEST(Integrate1d, NoConvergenceCarriesBestEstimate) {
  quad::QuadSpec s{1e-12, 0.0, 3};
  try {
    quad::integrate_1d([](double x) { return std::sin(1.0 / (x + 1e-3)); }, 0.0, 1.0, s);
    FAIL();
  } catch (const NoConvergence& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoConvergence);
    ASSERT_EQ(e.best_estimate().size(), 1u);
    EXPECT_TRUE(std::isfinite(e.best_estimate()[0]));
    EXPECT_GT(e.error_estimate()[0], 0.0);
  }
}

TEST(Integrate1d, DeterministicBitForBit) {
  auto f = [](double x) { return std::exp(-x) * std::cos(10 * x); };
  const double a = quad::integrate_1d(f, 0.0, INFINITY).value;
  const double b = quad::integrate_1d(f, 0.0, INFINITY).value;
  EXPECT_EQ(a, b);
}

TEST(QuadSpec, RejectsBadTolerances) {
  EXPECT_THROW((quad::QuadSpec{0.0, 0.0, 10}.check()), Error);
  EXPECT_THROW((quad::QuadSpec{0.5, 0.0, 10}.check()), Error);
  EXPECT_THROW((quad::QuadSpec{1e-6, -1.0, 10}.check()), Error);
}

TEST(IntegrateDisk, AreaAndSecondMoment) {
  const double R = 2.5;
  auto area = quad::integrate_disk([](double, double) { return 1.0; }, R);
  EXPECT_NEAR(area.value, std::numbers::pi * R * R, 1e-10);
  auto m2 = quad::integrate_disk([](double r, double) { return r * r; }, R);
  EXPECT_NEAR(m2.value, std::numbers::pi * std::pow(R, 4) / 2, 1e-9);
}

TEST(IntegrateDisk, OffCentreGaussianMirrorSymmetry) {
  // int over the disk of exp(-|r - a|^2) with a on the axis; the full and
  // mirrored integrations must agree.
  const double a = 0.7;
  auto f = [&](double r, double phi) { return std::exp(-(r * r + a * a - 2 * a * r * std::cos(phi))); };
  quad::DiskHints h;
  h.mirror_symmetric = true;
  auto half = quad::integrate_disk(f, 3.0, quad::QuadSpec::disk(), h);
  auto full = quad::integrate_disk(f, 3.0);
  EXPECT_NEAR(half.value, full.value, 1e-7 * full.value);
  // Angular integral in closed form: 2 pi r exp(-r^2 - a^2) I0(2 a r).
  auto radial = [&](double r) { return 2 * std::numbers::pi * r * std::exp(-r * r - a * a) * std::cyl_bessel_i(0.0, 2 * a * r); };
  EXPECT_NEAR(full.value, quad::integrate_1d(radial, 0.0, 3.0).value, 1e-8);
}

TEST(RadialTable, InterpolatesSmoothAndLogValues) {
  auto f = [](double l) { return std::exp(-3 * l) * (1 + l); };
  quad::RadialTable t(f, 0.5, 10.0, {1e-8, 33, 2049, true});
  for (double l = 0.0; l <= 10.0; l += 0.0137) EXPECT_NEAR(t(l), f(l), 1e-7 * f(l)) << l;
  EXPECT_LE(t.max_midpoint_error(), 1e-8);
  EXPECT_GT(t.node_count(), 0);
}

TEST(ReceiverDiskIntegral, ConstantGivesArea) {
  const double v = quad::receiver_disk_integral([](const GeometryTerms&) { return 1.0; }, 3.0, 0.5, quad::QuadSpec::disk());
  EXPECT_NEAR(v, std::numbers::pi * 0.25, 1e-10);
}

TEST(Nested4d, ConstantGivesProductOfAreas) {
  auto r = quad::integrate_nested_4d([](const GeometryTerms&) { return 1.0; }, 10.0, 0.5, {3.0, 4.0});
  EXPECT_NEAR(r.value, std::numbers::pi * 100 * std::numbers::pi * 0.25, 1e-4 * r.value);
}

TEST(Nested4d, SquaredDistanceMoment) {
  // int int |r + r0 - b'|^2 dA0 dA for receiver centre at b: with the
  // supplement-angle convention the inner term is Upsilon^2, whose mean over
  // both disks is |b|^2 + R1^2/2 + R0^2/2.
  const double R1 = 4.0, R0 = 0.5;
  const Point2 b{1.0, 2.0};
  auto r = quad::integrate_nested_4d([](const GeometryTerms& g) { return g.upsilon * g.upsilon; }, R1, R0, b,
                                     quad::QuadSpec{1e-6, 0.0, 1000}, true);
  const double areas = std::numbers::pi * R1 * R1 * std::numbers::pi * R0 * R0;
  EXPECT_NEAR(r.value / areas, b.norm2() + R1 * R1 / 2 + R0 * R0 / 2, 1e-5);
}
