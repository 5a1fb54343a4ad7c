#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "qsmc/pointprocess.hpp"
#include "qsmc/quadrature.hpp"

using namespace qsmc;

TEST(Seeds, DeterministicAndDistinct) {
  EXPECT_EQ(pp::derive_seed(1, 2, 3), pp::derive_seed(1, 2, 3));
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 100; ++a)
    for (std::uint64_t b = 0; b < 10; ++b) seen.insert(pp::derive_seed(7, a, b));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_NE(pp::derive_seed(1, 2, 0), pp::derive_seed(2, 1, 0));
}

TEST(DiskPPP, CountMeanAndSupport) {
  const EnvParams p = EnvParams::defaults();
  double sum = 0.0, sum_r2 = 0.0;
  long pts = 0;
  const int n = 2000;
  for (int i = 0; i < n; ++i) {
    const auto ppp = pp::sample_disk_ppp(p, pp::derive_seed(3, static_cast<std::uint64_t>(i)));
    sum += static_cast<double>(ppp.size());
    for (const auto& x : ppp.positions) {
      EXPECT_LE(x.norm(), p.pop_radius);
      sum_r2 += x.norm2() / (p.pop_radius * p.pop_radius);
      ++pts;
    }
  }
  // Poisson(100): the sample mean has standard error sqrt(100 / n).
  EXPECT_NEAR(sum / n, 100.0, 4.0 * std::sqrt(100.0 / n));
  // Uniform on the disk: |x|^2 / R^2 is U(0, 1).
  EXPECT_NEAR(sum_r2 / pts, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / pts));
}

TEST(DiskPPP, SameSeedSameRealization) {
  const EnvParams p = EnvParams::defaults();
  EXPECT_EQ(pp::sample_disk_ppp(p, 42).positions, pp::sample_disk_ppp(p, 42).positions);
}

TEST(DiskPPP, ZeroDensityIsEmpty) {
  pp::Engine rng(1);
  EXPECT_TRUE(pp::sample_disk_points(0.0, 1.0, rng).empty());
  EXPECT_THROW(pp::sample_disk_points(-1.0, 1.0, rng), Error);
}

TEST(Releases, SortedWithExponentialGaps) {
  const auto s = pp::sample_release_times(1000.0, 50.0, 9);
  ASSERT_FALSE(s.times.empty());
  EXPECT_TRUE(std::is_sorted(s.times.begin(), s.times.end()));
  EXPECT_LE(s.times.back(), 50.0);
  const double n = static_cast<double>(s.times.size());
  EXPECT_NEAR(n, 5e4, 4.0 * std::sqrt(5e4));
  double gap_sum = s.times.front();
  for (std::size_t i = 1; i < s.times.size(); ++i) gap_sum += s.times[i] - s.times[i - 1];
  EXPECT_NEAR(gap_sum / n, 1e-3, 4.0 * 1e-3 / std::sqrt(n));
  EXPECT_THROW(pp::sample_release_times(0.0, 1.0, 1), Error);
  EXPECT_TRUE(pp::sample_release_times(1.0, 0.0, 1).times.empty());
}

TEST(NearestNeighbour, DensityNormalisesAndHasKnownMean) {
  const double lambda = 2.0;
  for (int n : {1, 2, 5}) {
    auto f = [&](double r) { return pp::nn_distance_pdf(n, r, lambda); };
    EXPECT_NEAR(quad::integrate_1d(f, 0.0, INFINITY).value, 1.0, 1e-9) << n;
  }
  // E[distance to nearest] = 1 / (2 sqrt(lambda)).
  auto m = [&](double r) { return r * pp::nn_distance_pdf(1, r, lambda); };
  EXPECT_NEAR(quad::integrate_1d(m, 0.0, INFINITY).value, 0.5 / std::sqrt(lambda), 1e-9);
  EXPECT_EQ(pp::nn_distance_pdf(1, 0.0, lambda), 0.0);
  EXPECT_THROW(pp::nn_distance_pdf(0, 1.0, lambda), Error);
}

TEST(NearestNeighbour, MatchesSimulatedCentreDistances) {
  // Distance from the centre to the 2nd nearest point of a dense PPP.
  const double lambda = 1.0, R = 20.0;
  pp::Engine rng(21);
  double sum = 0.0;
  const int n = 3000;
  for (int i = 0; i < n; ++i) {
    auto pts = pp::sample_disk_points(lambda, R, rng);
    std::vector<double> d;
    for (const auto& x : pts) d.push_back(x.norm());
    std::nth_element(d.begin(), d.begin() + 1, d.end());
    sum += d[1];
  }
  auto m = [&](double r) { return r * pp::nn_distance_pdf(2, r, lambda); };
  const double mean = quad::integrate_1d(m, 0.0, INFINITY).value;
  EXPECT_NEAR(sum / n, mean, 4.0 * 0.3 / std::sqrt(n));
}

TEST(Csv, HeaderAndMicrometres) {
  pp::DiskPPP d{{{1e-6, -2e-6}}, 1e-5, 0};
  std::ostringstream os;
  pp::write_csv(os, d);
  EXPECT_EQ(os.str(), "x_um,y_um\n1,-2\n");
}
