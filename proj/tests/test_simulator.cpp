#include <gtest/gtest.h>

#include <boost/math/distributions/binomial.hpp>

#ifdef QSMC_HAVE_OPENMP
#include <omp.h>
#endif

#include "qsmc/channel.hpp"
#include "qsmc/simulator.hpp"

using namespace qsmc;
using namespace qsmc::sim;

namespace {

SimConfig small_config(int realizations = 50) {
  SimConfig c;
  c.env = EnvParams::defaults().with_population(20e-6, 20.0);
  c.env.threshold = 2;
  c.realizations = realizations;
  c.master_seed = 77;
  return c;
}

double mean_of(const std::vector<int>& v) {
  double s = 0.0;
  for (int x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

TEST(SimConfig, DefaultsValidateAndBadValuesThrow) {
  const SimConfig ok = validate(SimConfig{});
  EXPECT_NEAR(ok.step(), 0.757e-6 * 0.757e-6 / (40 * 5.5e-10), 1e-12);
  auto expect_invalid = [](SimConfig c) {
    try {
      validate(c);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::ConfigInvalid);
    }
  };
  SimConfig c;
  c.dt = 1e-4;  // larger than R0^2 / (40 D)
  expect_invalid(c);
  c = {};
  c.sample_time = 1.0;
  expect_invalid(c);
  c = {};
  c.realizations = 0;
  expect_invalid(c);
  c = {};
  c.bacteria_diffusion = -1.0;
  expect_invalid(c);
  c = {};
  c.brownian_variance_scale = 0.0;
  expect_invalid(c);
  c = {};
  c.env.diffusion = 0.0;
  EXPECT_THROW(validate(c), Error);
  c = {};
  c.env.degradation = 100.0;
  c.dt = 2e-3;  // k dt = 0.2
  expect_invalid(c);
}

TEST(Calibration, BrownianStepMoments) {
  // 2e7 steps: the covariance gate of 1e-3 sigma^2 is then 4.5 standard errors.
  EnvParams p;
  p.degradation = 0.0;
  const double dt = default_dt(p);
  StepEngine eng(p, dt, 123);
  for (int i = 0; i < 100000; ++i) eng.add_molecule({0, 0});
  StepStats st;
  for (int s = 0; s < 200; ++s) eng.step(&st);
  ASSERT_EQ(st.steps, 20000000u);
  const double v = 2 * p.diffusion * dt;
  EXPECT_NEAR(st.var_x() / v, 1.0, 0.01);
  EXPECT_NEAR(st.var_y() / v, 1.0, 0.01);
  EXPECT_LT(std::abs(st.cov_xy()), 1e-3 * v);
}

TEST(Calibration, InjectedVarianceErrorIsDetected) {
  EnvParams p;
  p.degradation = 0.0;
  const double dt = default_dt(p);
  StepEngine eng(p, dt, 5, 1.05);
  for (int i = 0; i < 10000; ++i) eng.add_molecule({0, 0});
  StepStats st;
  for (int s = 0; s < 100; ++s) eng.step(&st);
  EXPECT_GT(std::abs(st.var_x() / (2 * p.diffusion * dt) - 1.0), 0.01);
}

TEST(Calibration, SurvivalPerStepAndAfterManySteps) {
  EnvParams p;
  const double dt = default_dt(p);
  const double s1 = std::exp(-p.degradation * dt);
  StepEngine eng(p, dt, 9);
  const long n0 = 50000;
  for (long i = 0; i < n0; ++i) eng.add_molecule({0, 0});
  StepStats st;
  const int m = 400;
  for (int s = 0; s < m; ++s) eng.step(&st);
  // Per step, pooled: survived ~ Binomial(before, s1) is a fair approximation
  // of the pooled counts; use its 99% interval.
  using boost::math::binomial_distribution;
  const double lo = binomial_distribution<>::find_lower_bound_on_p(static_cast<double>(st.before), static_cast<double>(st.survived), 0.005);
  const double hi = binomial_distribution<>::find_upper_bound_on_p(static_cast<double>(st.before), static_cast<double>(st.survived), 0.005);
  EXPECT_LE(lo, s1);
  EXPECT_GE(hi, s1);
  // Cohort after m steps.
  const double pm = std::pow(s1, m);
  const double left = static_cast<double>(eng.size());
  EXPECT_NEAR(left / n0, pm, 4 * std::sqrt(pm * (1 - pm) / n0));
}

TEST(Calibration, MassConservedWithoutDegradation) {
  EnvParams p;
  p.degradation = 0.0;
  StepEngine eng(p, default_dt(p), 3);
  std::size_t added = 0;
  for (int s = 0; s < 500; ++s) {
    for (int i = 0; i < s % 7; ++i, ++added) eng.add_molecule({1e-6 * i, 0});
    eng.step();
    ASSERT_EQ(eng.size(), added);
  }
  // The stepped realization without degradation keeps every release.
  SimConfig c;
  c.env = p;
  c.t_end = 0.02;
  const auto obs = observe_stepped({{0, 0}, {5e-6, 0}}, 2, c, 99);
  EXPECT_GT(obs.alive, 0u);
  EXPECT_NEAR(static_cast<double>(obs.alive), 2 * p.emission_rate * c.t_end, 5 * std::sqrt(2 * p.emission_rate * c.t_end));
}

TEST(Engines, EventAndSteppedAgreeInDistribution) {
  SimConfig c;
  c.env.degradation = 100.0;
  c.t_end = 0.05;
  const std::vector<Point2> em{{0, 0}, {1.5e-6, 0}, {0, -3e-6}};
  const int n = 1500;
  std::vector<double> ev, st;
  for (int i = 0; i < n; ++i) {
    ev.push_back(observe(em, 1, c, pp::derive_seed(1, i)).counts[0]);
    st.push_back(observe_stepped(em, 1, c, pp::derive_seed(2, i)).counts[0]);
  }
  const auto a = summarize(ev), b = summarize(st);
  EXPECT_NEAR(a.mean, b.mean, 4 * std::sqrt(a.variance / n + b.variance / n));
  EXPECT_NEAR(a.variance / b.variance, 1.0, 0.15);
}

TEST(Engines, SelfInclusionMatchesOwnResponse) {
  // A lone bacterium counts its own molecules; mean = self response at t.
  SimConfig c;
  const int n = 40000;
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(observe({{0, 0}}, 1, c, pp::derive_seed(8, i)).counts[0]);
  const auto s = summarize(v);
  const double ref = channel::self_response_time(c.t_end, c.env).mean_count;
  EXPECT_NEAR(s.mean, ref, 4 * std::sqrt(s.variance / n) + 0.01 * ref);
  // Poisson count: variance equals the mean.
  EXPECT_NEAR(s.variance / s.mean, 1.0, 0.03);
}

TEST(Engines, HalvingTheStepChangesThePlateauMeanByLessThanOnePercent) {
  SimConfig a;
  a.t_end = 0.5;
  SimConfig b = a;
  b.dt = a.step() / 2;
  const std::vector<Point2> em{{0, 0}, {3e-6, 0}};
  const int n = 100000;
  double sa = 0.0, sb = 0.0;
  for (int i = 0; i < n; ++i) {
    sa += observe(em, 1, a, pp::derive_seed(10, i)).counts[0];
    sb += observe(em, 1, b, pp::derive_seed(11, i)).counts[0];
  }
  EXPECT_NEAR(sb / sa, 1.0, 0.01);
}

TEST(Engines, FastDegradationKeepsOnlyTheNewestReleases) {
  // k dt = 20 lies outside the validated range, so observe is called
  // directly. Only molecules released after the last grid step survive.
  SimConfig c;
  c.env.emission_rate = 1e5;
  c.env.degradation = 2e4;
  c.dt = 1e-3;
  const double frac = 0.1;
  const int n = 4000;
  for (int steps : {1, 20}) {
    c.t_end = c.sample_time = (steps + frac) * c.dt;
    double alive = 0.0;
    for (int i = 0; i < n; ++i) alive += static_cast<double>(observe({{0, 0}}, 1, c, pp::derive_seed(4, i)).alive);
    const double expect = c.env.emission_rate * frac * c.dt;  // plus e^-20 leftovers
    EXPECT_NEAR(alive / n, expect, 4 * std::sqrt(expect / n));
  }
}

TEST(Engines, MobileBacteriaDiffuse) {
  SimConfig c;
  c.bacteria_diffusion = 1e-11;
  c.t_end = 0.5;
  c.env.emission_rate = 10.0;
  const int n = 4000;
  double sxx = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto o = observe({{0, 0}}, 1, c, pp::derive_seed(6, i));
    sxx += o.final_positions[0].x * o.final_positions[0].x;
    syy += o.final_positions[0].y * o.final_positions[0].y;
  }
  const double K = std::floor(c.t_end / c.step() * (1 + 1e-12));
  const double v = 2 * c.bacteria_diffusion * c.step() * K;
  EXPECT_NEAR(sxx / n / v, 1.0, 4 * std::sqrt(2.0 / n));
  EXPECT_NEAR(syy / n / v, 1.0, 4 * std::sqrt(2.0 / n));
  EXPECT_THROW(observe_stepped({{0, 0}}, 1, c, 1), Error);
}

TEST(Realizations, OutcomeInvariants) {
  const SimConfig c = small_config();
  for (long i = 0; i < 20; ++i) {
    const auto o = run_realization(c, i);
    ASSERT_EQ(o.per_bacterium_obs.size(), o.positions.size());
    ASSERT_EQ(o.decisions.size(), o.positions.size());
    int z = 0;
    for (std::size_t j = 0; j < o.decisions.size(); ++j) {
      EXPECT_EQ(o.decisions[j], o.per_bacterium_obs[j] >= c.env.eta());
      z += o.decisions[j] ? 1 : 0;
    }
    EXPECT_EQ(o.cooperator_count, z);
    EXPECT_EQ(o.realization_seed, realization_seed(c, i));
  }
}

TEST(Realizations, SingleRealizationBatchEqualsOutcome) {
  SimConfig c = small_config(1);
  const auto b = run_batch(c, 4);
  const auto o = run_realization(c, 0);
  EXPECT_EQ(b.z[static_cast<std::size_t>(c.env.eta() - 1)][0], o.cooperator_count);
  EXPECT_EQ(b.population[0], static_cast<int>(o.positions.size()));
  EXPECT_EQ(b.cooperators(c.env.eta()).mean, o.cooperator_count);
  EXPECT_EQ(b.cooperators(c.env.eta()).variance, 0.0);
}

TEST(Realizations, BatchIsBitIdenticalAcrossThreadCounts) {
  const SimConfig c = small_config(24);
#ifdef QSMC_HAVE_OPENMP
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto one = run_batch(c, 5);
  omp_set_num_threads(4);
  const auto four = run_batch(c, 5);
  omp_set_num_threads(saved);
#else
  const auto one = run_batch(c, 5);
  const auto four = run_batch(c, 5);
#endif
  EXPECT_EQ(one.z, four.z);
  EXPECT_EQ(one.mean_obs, four.mean_obs);
  EXPECT_EQ(one.seeds, four.seeds);
  SimConfig other = c;
  other.master_seed = 78;
  EXPECT_NE(run_batch(other, 5).z, one.z);
}

TEST(Realizations, StaticMobileRunEqualsBatch) {
  const SimConfig c = small_config(12);
  EXPECT_EQ(run_mobile(c, 3).z, run_batch(c, 3).z);
}

TEST(Realizations, HistogramAndCcdfAreConsistent) {
  const auto b = run_batch(small_config(200), 3);
  for (int eta = 1; eta <= 3; ++eta) {
    const auto h = b.histogram(eta);
    double total = 0.0, mean = 0.0;
    for (const auto& bin : h) {
      total += bin.pmf;
      mean += bin.z * bin.pmf;
      EXPECT_LE(bin.ci.low, bin.pmf);
      EXPECT_GE(bin.ci.high, bin.pmf);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_NEAR(mean, b.cooperators(eta).mean, 1e-9);
    EXPECT_EQ(b.ccdf(eta, 0).first, 1.0);
  }
}

TEST(Probe, MeanObservationOverTimeInDenseColony) {
  SimConfig c;
  c.env = EnvParams::defaults();
  c.env.pop_radius = 20e-6;
  c.env.density = 7.9e-2 * 1e12;
  c.realizations = 1500;
  const Point2 x{10e-6, 10e-6};
  const std::vector<double> times{0.05, 0.2, 0.6};
  const auto sims = run_probe_over_time(c, x, times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double ref = channel::observation_mean_time(x, times[i], c.env).mean_count;
    EXPECT_NEAR(sims[i].mean, ref, 4 * std::sqrt(sims[i].variance / sims[i].n) + 0.01 * ref) << times[i];
  }
}

TEST(Probe, FixedPositionsGivePoissonObservations) {
  SimConfig c;
  c.realizations = 400;
  auto rng = pp::make_engine(31, 0);
  const auto pos = pp::sample_disk_points(c.env.density, c.env.pop_radius, rng);
  const auto st = run_fixed_population(c, pos);
  EXPECT_GE(st.dispersion_index(), 0.9);
  EXPECT_LE(st.dispersion_index(), 1.1);
}

TEST(Impulse, CountMatchesAnalyticResponseNearPeak) {
  const EnvParams p;
  const Point2 b{5e-6, 0};
  for (double tau : {0.005, 0.0116, 0.05}) {
    const double h = channel::impulse_response(b, tau, p).mean_count;
    const long molecules = std::max(1000000L, static_cast<long>(4e4 / h));
    const double got = static_cast<double>(impulse_count(p, b, tau, molecules, pp::derive_seed(2, static_cast<std::uint64_t>(tau * 1e6))));
    EXPECT_NEAR(got / molecules / h, 1.0, 0.02) << tau;
  }
  EXPECT_THROW(impulse_count(p, b, 0.0, 10, 1), Error);
}

TEST(ReceiverGrid, MatchesBruteForce) {
  auto rng = pp::make_engine(4, 0);
  const auto centres = pp::sample_disk_points(0.05, 30.0, rng);
  const double R = 1.7;
  ReceiverGrid grid(centres, R);
  for (int i = 0; i < 20000; ++i) {
    const Point2 q{70 * pp::uniform01(rng) - 35, 70 * pp::uniform01(rng) - 35};
    std::vector<int> got, want;
    grid.for_each_containing(q, [&](int k) { got.push_back(k); });
    for (std::size_t k = 0; k < centres.size(); ++k)
      if ((q - centres[k]).norm2() <= R * R) want.push_back(static_cast<int>(k));
    std::sort(got.begin(), got.end());
    ASSERT_EQ(got, want);
  }
  ReceiverGrid empty({}, 1.0);
  int visits = 0;
  empty.for_each_containing({0, 0}, [&](int) { ++visits; });
  EXPECT_EQ(visits, 0);
}

TEST(Intervals, WilsonKnownValues) {
  const auto a = wilson(5, 10);
  EXPECT_NEAR(a.low, 0.2366, 1e-4);
  EXPECT_NEAR(a.high, 0.7634, 1e-4);
  const auto z = wilson(0, 10);
  EXPECT_EQ(z.low, 0.0);
  EXPECT_NEAR(z.high, 0.2775, 1e-4);
  EXPECT_EQ(wilson(10, 10).high, 1.0);
  const auto e = wilson(0, 0);
  EXPECT_EQ(e.low, 0.0);
  EXPECT_EQ(e.high, 1.0);
  const auto s = summarize({1.0, 2.0, 3.0, 4.0});
  EXPECT_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.variance, 5.0 / 3.0, 1e-15);
}
