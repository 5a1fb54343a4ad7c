#pragma once
// Particle Monte Carlo for the bacterial population.
//
// Molecules are released by each bacterium at the points of a rate-q
// temporal Poisson process, start at the emitter's centre, take a Gaussian
// step of per-axis variance 2 D dt at every grid time k dt after release,
// and survive each step with probability exp(-k dt). At the sample time
// every bacterium counts the molecules within R0 of its centre.
//
// Two engines produce that process:
//  * StepEngine moves every molecule step by step (the literal procedure).
//  * The event engine draws each molecule's state at the sample time
//    directly: m steps of N(0, 2 D dt) sum to N(0, 2 D dt m) and survival is
//    exp(-k dt)^m. Only surviving molecules are drawn. It is exact in
//    distribution for the stepped process.
// Mobile bacteria take per-axis N(0, 2 D_b dt) steps at the same grid times;
// a molecule starts where its emitter was at the release time.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/special_functions/erf.hpp>
#include <boost/random/binomial_distribution.hpp>
#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

#include "qsmc/core.hpp"
#include "qsmc/pointprocess.hpp"

#ifdef QSMC_HAVE_OPENMP
#include <omp.h>
#endif

namespace qsmc::sim {

/// Largest step satisfying dt <= R0^2 / (40 D) and dt <= 0.1 / k.
inline double default_dt(const EnvParams& p) {
  double dt = p.rx_radius * p.rx_radius / (40.0 * p.diffusion);
  if (p.degradation > 0.0) dt = std::min(dt, 0.1 / p.degradation);
  return dt;
}

struct SimConfig {
  EnvParams env;
  double dt = 0.0;             // 0 selects default_dt(env)
  double t_end = 0.5;          // s; the mean observation is flat from about 0.5 s
  int realizations = 1000;
  std::uint64_t master_seed = 1;
  double bacteria_diffusion = 0.0;  // D_b, m^2/s
  double sample_time = 0.0;    // 0 selects t_end
  // Multiplies the Brownian step variance. Only for fault-injection checks.
  double brownian_variance_scale = 1.0;

  double step() const { return dt > 0.0 ? dt : default_dt(env); }
  double sample_at() const { return sample_time > 0.0 ? sample_time : t_end; }
};

inline SimConfig validate(const SimConfig& raw) {
  SimConfig c = raw;
  try {
    c.env = qsmc::validate(raw.env, Analysis::Channel);
  } catch (const Error& e) {
    throw Error(ErrorKind::ConfigInvalid, e.what());
  }
  auto bad = [](const std::string& why) { return Error(ErrorKind::ConfigInvalid, why); };
  const double dt = c.step();
  if (!(dt > 0.0) || !std::isfinite(dt)) throw bad("dt must be positive");
  const double limit = default_dt(c.env);
  if (dt > limit * (1.0 + 1e-9))
    throw bad("dt = " + std::to_string(dt) + " exceeds min(R0^2/(40 D), 0.1/k) = " + std::to_string(limit));
  if (!(c.t_end > 0.0)) throw bad("t_end must be positive");
  if (!(c.sample_at() > 0.0) || c.sample_at() > c.t_end * (1.0 + 1e-12)) throw bad("sample_time must lie in (0, t_end]");
  if (c.realizations < 1) throw bad("realizations must be >= 1");
  if (!(c.bacteria_diffusion >= 0.0)) throw bad("bacteria_diffusion must be >= 0");
  if (!(c.brownian_variance_scale > 0.0)) throw bad("brownian_variance_scale must be positive");
  return c;
}

inline double normal01(pp::Engine& rng) { return boost::random::normal_distribution<double>(0.0, 1.0)(rng); }

// ---------------------------------------------------------------------------
// Literal stepping.

/// Accumulated per-step displacement moments, for calibration.
struct StepStats {
  std::uint64_t steps = 0;
  double sum_x = 0.0, sum_y = 0.0, sum_xx = 0.0, sum_yy = 0.0, sum_xy = 0.0;
  std::uint64_t before = 0;    // molecules present before degradation tests
  std::uint64_t survived = 0;  // molecules left after them

  double var_x() const { return sum_xx / steps - (sum_x / steps) * (sum_x / steps); }
  double var_y() const { return sum_yy / steps - (sum_y / steps) * (sum_y / steps); }
  double cov_xy() const { return sum_xy / steps - (sum_x / steps) * (sum_y / steps); }
};

class StepEngine {
 public:
  StepEngine(const EnvParams& p, double dt, std::uint64_t seed, double variance_scale = 1.0)
      : rng_(seed),
        sd_(std::sqrt(2.0 * p.diffusion * dt * variance_scale)),
        survive_(std::exp(-p.degradation * dt)) {}

  void add_molecule(Point2 at) { mol_.push_back(at); }

  /// Move every molecule by one Gaussian step, then apply degradation.
  void step(StepStats* stats = nullptr) {
    std::size_t keep = 0;
    for (std::size_t i = 0; i < mol_.size(); ++i) {
      const double dx = sd_ * normal01(rng_);
      const double dy = sd_ * normal01(rng_);
      if (stats) {
        ++stats->steps;
        stats->sum_x += dx;
        stats->sum_y += dy;
        stats->sum_xx += dx * dx;
        stats->sum_yy += dy * dy;
        stats->sum_xy += dx * dy;
      }
      const bool alive = survive_ >= 1.0 || pp::uniform01(rng_) < survive_;
      if (alive) mol_[keep++] = {mol_[i].x + dx, mol_[i].y + dy};
    }
    if (stats) {
      stats->before += mol_.size();
      stats->survived += keep;
    }
    mol_.resize(keep);
  }

  std::size_t size() const { return mol_.size(); }
  const std::vector<Point2>& positions() const { return mol_; }

 private:
  pp::Engine rng_;
  double sd_;
  double survive_;
  std::vector<Point2> mol_;
};

// ---------------------------------------------------------------------------
// Counting molecules inside receivers.

/// Uniform cell grid over receiver centres; cell side >= R0 so a molecule
/// can only be counted by receivers in its own or the eight adjacent cells.
class ReceiverGrid {
 public:
  ReceiverGrid(const std::vector<Point2>& centres, double radius) : centres_(centres), r2_(radius * radius) {
    if (centres.empty()) return;
    double xmin = centres[0].x, xmax = xmin, ymin = centres[0].y, ymax = ymin;
    for (const auto& c : centres) {
      xmin = std::min(xmin, c.x);
      xmax = std::max(xmax, c.x);
      ymin = std::min(ymin, c.y);
      ymax = std::max(ymax, c.y);
    }
    // Keep the table to about 4 cells per receiver, but never below R0.
    const double span = std::max(xmax - xmin, ymax - ymin) + 2.0 * radius;
    cell_ = std::max(radius, span / std::max(1.0, std::sqrt(4.0 * centres.size())));
    x0_ = xmin - radius;
    y0_ = ymin - radius;
    nx_ = static_cast<int>((xmax - x0_ + radius) / cell_) + 1;
    ny_ = static_cast<int>((ymax - y0_ + radius) / cell_) + 1;
    start_.assign(static_cast<std::size_t>(nx_ * ny_ + 1), 0);
    std::vector<int> cell_of(centres.size());
    for (std::size_t i = 0; i < centres.size(); ++i) {
      cell_of[i] = index(centres[i]);
      ++start_[static_cast<std::size_t>(cell_of[i] + 1)];
    }
    for (std::size_t c = 1; c < start_.size(); ++c) start_[c] += start_[c - 1];
    members_.resize(centres.size());
    std::vector<int> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < centres.size(); ++i)
      members_[static_cast<std::size_t>(fill[static_cast<std::size_t>(cell_of[i])]++)] = static_cast<int>(i);
  }

  /// Calls visit(i) for every receiver containing p.
  template <class Visit>
  void for_each_containing(Point2 p, Visit&& visit) const {
    if (centres_.empty()) return;
    const int cx = static_cast<int>(std::floor((p.x - x0_) / cell_));
    const int cy = static_cast<int>(std::floor((p.y - y0_) / cell_));
    if (cx < -1 || cy < -1 || cx > nx_ || cy > ny_) return;
    for (int gx = std::max(cx - 1, 0); gx <= std::min(cx + 1, nx_ - 1); ++gx)
      for (int gy = std::max(cy - 1, 0); gy <= std::min(cy + 1, ny_ - 1); ++gy) {
        const int c = gx * ny_ + gy;
        for (int k = start_[static_cast<std::size_t>(c)]; k < start_[static_cast<std::size_t>(c + 1)]; ++k) {
          const int i = members_[static_cast<std::size_t>(k)];
          if ((p - centres_[static_cast<std::size_t>(i)]).norm2() <= r2_) visit(i);
        }
      }
  }

 private:
  int index(Point2 p) const {
    const int cx = std::clamp(static_cast<int>((p.x - x0_) / cell_), 0, nx_ - 1);
    const int cy = std::clamp(static_cast<int>((p.y - y0_) / cell_), 0, ny_ - 1);
    return cx * ny_ + cy;
  }

  std::vector<Point2> centres_;
  double r2_;
  double cell_ = 1.0, x0_ = 0.0, y0_ = 0.0;
  int nx_ = 0, ny_ = 0;
  std::vector<int> start_;
  std::vector<int> members_;
};

// ---------------------------------------------------------------------------
// Event engine.

struct Observation {
  std::vector<int> counts;          // molecules inside each receiver at the sample time
  std::vector<Point2> final_positions;
  std::uint64_t alive = 0;
};

namespace detail {

struct Timing {
  double dt;
  double t;
  long K;  // index of the last grid step at or before t
  double step_var;

  Timing(const SimConfig& c, const EnvParams& p) : dt(c.step()), t(c.sample_at()) {
    K = static_cast<long>(std::floor(t / dt * (1.0 + 1e-12)));
    step_var = 2.0 * p.diffusion * dt * c.brownian_variance_scale;
  }

  // Steps a molecule released at tau takes before the sample time.
  long steps_after(double tau) const { return std::max(0L, K - static_cast<long>(std::floor(tau / dt))); }
};

}  // namespace detail

/// Sample the molecules alive at the sample time from emitters at `emitters`
/// (initial positions) and count them at the receivers. `receivers_are_emitters`
/// means every emitter also counts; otherwise only the first `n_receivers`.
inline Observation observe(const std::vector<Point2>& emitters, std::size_t n_receivers, const SimConfig& cfg,
                           std::uint64_t realization_seed) {
  const EnvParams& p = cfg.env;
  const detail::Timing tm(cfg, p);
  const double q = p.emission_rate;
  const bool mobile = cfg.bacteria_diffusion > 0.0;
  const double bact_step_var = 2.0 * cfg.bacteria_diffusion * tm.dt;

  Observation out;
  out.final_positions = emitters;
  std::vector<Point2> molecules;
  molecules.reserve(static_cast<std::size_t>(emitters.size() * (p.degradation > 0.0 ? 1.2 * q / p.degradation : q * tm.t) + 16));

  // With degradation, survivors are drawn directly. Their ages t - tau form
  // a Poisson process of intensity q exp(-k dt m(age)); since
  // dt m >= age - t_off, that is dominated by q exp(k t_off) exp(-k age).
  // Points of the dominating process are kept with probability
  // exp(-k (dt m - age + t_off)) >= exp(-k dt). Without degradation every
  // release survives and the gaps are drawn in order.
  const double k = p.degradation;
  const double t_off = tm.t - static_cast<double>(tm.K) * tm.dt;
  std::vector<double> taus;
  for (std::size_t j = 0; j < emitters.size(); ++j) {
    auto rng = pp::make_engine(realization_seed, 1 + j);
    taus.clear();
    if (k > 0.0) {
      const double mass = -std::expm1(-k * tm.t);
      const long n = boost::random::poisson_distribution<long, double>(q / k * mass * std::exp(k * t_off))(rng);
      for (long i = 0; i < n; ++i) {
        const double age = -std::log1p(-mass * pp::uniform01(rng)) / k;
        const double tau = tm.t - age;
        const double excess = tm.dt * static_cast<double>(tm.steps_after(tau)) - age + t_off;
        if (pp::uniform01(rng) < std::exp(-k * excess)) taus.push_back(tau);
      }
      if (mobile) std::sort(taus.begin(), taus.end());
    } else {
      boost::random::exponential_distribution<double> gap(q);
      for (double tau = gap(rng); tau <= tm.t; tau += gap(rng)) taus.push_back(tau);
    }
    Point2 where = emitters[j];
    long where_idx = 0;
    auto move_to = [&](long idx) {
      if (idx > where_idx) {
        const double sd = std::sqrt(bact_step_var * static_cast<double>(idx - where_idx));
        where.x += sd * normal01(rng);
        where.y += sd * normal01(rng);
        where_idx = idx;
      }
    };
    for (double tau : taus) {
      const long m = tm.steps_after(tau);
      if (mobile) move_to(std::min(static_cast<long>(std::floor(tau / tm.dt)), tm.K));
      const double sd = std::sqrt(tm.step_var * static_cast<double>(m));
      molecules.push_back({where.x + sd * normal01(rng), where.y + sd * normal01(rng)});
    }
    if (mobile) {
      move_to(tm.K);
      out.final_positions[j] = where;
    }
  }
  out.alive = molecules.size();

  const std::vector<Point2> rx(out.final_positions.begin(),
                               out.final_positions.begin() + static_cast<std::ptrdiff_t>(n_receivers));
  out.counts.assign(n_receivers, 0);
  if (n_receivers == 1) {
    const double r2 = p.rx_radius * p.rx_radius;
    for (const auto& m : molecules)
      if ((m - rx[0]).norm2() <= r2) ++out.counts[0];
  } else {
    ReceiverGrid grid(rx, p.rx_radius);
    for (const auto& m : molecules) grid.for_each_containing(m, [&](int i) { ++out.counts[static_cast<std::size_t>(i)]; });
  }
  return out;
}

/// The same process produced by literal stepping, for cross-checks on small
/// systems.
inline Observation observe_stepped(const std::vector<Point2>& emitters, std::size_t n_receivers, const SimConfig& cfg,
                                   std::uint64_t realization_seed, StepStats* stats = nullptr) {
  const EnvParams& p = cfg.env;
  const detail::Timing tm(cfg, p);
  if (cfg.bacteria_diffusion > 0.0) throw Error(ErrorKind::ConfigInvalid, "stepped engine supports static bacteria only");
  // Release schedules from the same per-bacterium streams as the event engine.
  std::vector<std::pair<double, std::size_t>> releases;
  for (std::size_t j = 0; j < emitters.size(); ++j) {
    auto rng = pp::make_engine(realization_seed, 1 + j);
    for (double tau : pp::sample_release_times(p.emission_rate, tm.t, rng).times) releases.push_back({tau, j});
  }
  std::sort(releases.begin(), releases.end());
  StepEngine eng(p, tm.dt, pp::derive_seed(realization_seed, 0xfeed), cfg.brownian_variance_scale);
  Observation out;
  out.final_positions = emitters;
  std::size_t next = 0;
  for (long k = 1; k <= tm.K; ++k) {
    const double grid_t = k * tm.dt;
    while (next < releases.size() && releases[next].first < grid_t) eng.add_molecule(emitters[releases[next++].second]);
    eng.step(stats);
  }
  while (next < releases.size()) eng.add_molecule(emitters[releases[next++].second]);
  out.alive = eng.size();
  out.counts.assign(n_receivers, 0);
  const double r2 = p.rx_radius * p.rx_radius;
  for (const auto& m : eng.positions())
    for (std::size_t i = 0; i < n_receivers; ++i)
      if ((m - emitters[i]).norm2() <= r2) ++out.counts[i];
  return out;
}

// ---------------------------------------------------------------------------
// Realizations and batches.

struct SimOutcome {
  std::vector<int> per_bacterium_obs;
  std::vector<bool> decisions;
  int cooperator_count = 0;
  std::uint64_t realization_seed = 0;
  std::vector<Point2> positions;
};

inline std::uint64_t realization_seed(const SimConfig& cfg, long index) {
  return pp::derive_seed(cfg.master_seed, static_cast<std::uint64_t>(index), 0x5eed);
}

/// One population draw: positions, releases, Brownian motion, decisions
/// against the configured threshold.
inline SimOutcome run_realization(const SimConfig& raw, long index) {
  const SimConfig cfg = validate(raw);
  SimOutcome out;
  out.realization_seed = realization_seed(cfg, index);
  auto pos_rng = pp::make_engine(out.realization_seed, 0);
  out.positions = pp::sample_disk_points(cfg.env.density, cfg.env.pop_radius, pos_rng);
  auto obs = observe(out.positions, out.positions.size(), cfg, out.realization_seed);
  out.per_bacterium_obs = std::move(obs.counts);
  const int eta = cfg.env.eta();
  for (int n : out.per_bacterium_obs) {
    out.decisions.push_back(n >= eta);
    out.cooperator_count += n >= eta ? 1 : 0;
  }
  return out;
}

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Wilson score interval for k successes in n trials.
inline Interval wilson(long k, long n, double z = 1.959963984540054) {
  if (n <= 0) return {0.0, 1.0};
  const double ph = static_cast<double>(k) / n;
  const double z2 = z * z;
  const double den = 1.0 + z2 / n;
  const double centre = (ph + z2 / (2.0 * n)) / den;
  const double half = z * std::sqrt(ph * (1.0 - ph) / n + z2 / (4.0 * n * n)) / den;
  // The bounds are exact at k = 0 and k = n; the formula only rounds to them.
  return {k == 0 ? 0.0 : std::max(0.0, centre - half), k == n ? 1.0 : std::min(1.0, centre + half)};
}

struct SampleSummary {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  Interval ci;            // 95% normal interval of the mean
  long n = 0;
};

inline SampleSummary summarize(const std::vector<double>& xs) {
  SampleSummary s;
  s.n = static_cast<long>(xs.size());
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / s.n;
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.variance = s.n > 1 ? ss / (s.n - 1) : 0.0;
  const double half = 1.959963984540054 * std::sqrt(s.variance / s.n);
  s.ci = {s.mean - half, s.mean + half};
  return s;
}

struct HistogramBin {
  int z = 0;
  long count = 0;
  double pmf = 0.0;
  Interval ci;
};

/// Cooperator counts of every realization for every threshold 1..eta_max.
struct BatchResult {
  int eta_max = 0;
  long realizations = 0;
  std::vector<std::vector<int>> z;     // z[eta - 1][realization]
  std::vector<int> population;         // bacteria per realization
  std::vector<double> mean_obs;        // mean observation per realization
  std::vector<std::uint64_t> seeds;

  SampleSummary cooperators(int eta) const {
    const auto& row = z.at(static_cast<std::size_t>(eta - 1));
    return summarize(std::vector<double>(row.begin(), row.end()));
  }

  std::vector<HistogramBin> histogram(int eta) const {
    const auto& row = z.at(static_cast<std::size_t>(eta - 1));
    std::map<int, long> counts;
    for (int v : row) ++counts[v];
    std::vector<HistogramBin> out;
    if (counts.empty()) return out;
    for (int v = 0; v <= counts.rbegin()->first; ++v) {
      const long c = counts.count(v) ? counts[v] : 0;
      out.push_back({v, c, static_cast<double>(c) / realizations, wilson(c, realizations)});
    }
    return out;
  }

  /// Fraction of realizations with Z >= z_min, with its Wilson interval.
  std::pair<double, Interval> ccdf(int eta, int z_min) const {
    const auto& row = z.at(static_cast<std::size_t>(eta - 1));
    long k = 0;
    for (int v : row) k += v >= z_min ? 1 : 0;
    return {static_cast<double>(k) / realizations, wilson(k, realizations)};
  }
};

template <class Body>
void parallel_for(long n, Body&& body) {
#ifdef QSMC_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 4)
  for (long i = 0; i < n; ++i) body(i);
#else
  for (long i = 0; i < n; ++i) body(i);
#endif
}

/// Independent realizations; realization i uses the seed derived from
/// (master_seed, i), so results do not depend on the thread count.
inline BatchResult run_batch(const SimConfig& raw, int eta_max) {
  const SimConfig cfg = validate(raw);
  if (eta_max < 1) throw Error(ErrorKind::ConfigInvalid, "eta_max must be >= 1");
  BatchResult b;
  b.eta_max = eta_max;
  b.realizations = cfg.realizations;
  b.z.assign(static_cast<std::size_t>(eta_max), std::vector<int>(static_cast<std::size_t>(cfg.realizations)));
  b.population.resize(static_cast<std::size_t>(cfg.realizations));
  b.mean_obs.resize(static_cast<std::size_t>(cfg.realizations));
  b.seeds.resize(static_cast<std::size_t>(cfg.realizations));
  parallel_for(cfg.realizations, [&](long i) {
    const auto seed = realization_seed(cfg, i);
    auto pos_rng = pp::make_engine(seed, 0);
    const auto pts = pp::sample_disk_points(cfg.env.density, cfg.env.pop_radius, pos_rng);
    const auto obs = observe(pts, pts.size(), cfg, seed);
    const auto ui = static_cast<std::size_t>(i);
    b.seeds[ui] = seed;
    b.population[ui] = static_cast<int>(pts.size());
    double total = 0.0;
    for (int n : obs.counts) total += n;
    b.mean_obs[ui] = pts.empty() ? 0.0 : total / static_cast<double>(pts.size());
    for (int eta = 1; eta <= eta_max; ++eta) {
      int zc = 0;
      for (int n : obs.counts) zc += n >= eta ? 1 : 0;
      b.z[static_cast<std::size_t>(eta - 1)][ui] = zc;
    }
  });
  return b;
}

/// run_batch with mobile bacteria (bacteria_diffusion > 0).
inline BatchResult run_mobile(const SimConfig& cfg, int eta_max) {
  if (!(cfg.bacteria_diffusion >= 0.0)) throw Error(ErrorKind::ConfigInvalid, "bacteria_diffusion must be >= 0");
  return run_batch(cfg, eta_max);
}

enum class ProbeBackground { Reduced, Full };

/// Observations of a bacterium held at x while the others are redrawn each
/// realization. With the reduced background the others have density
/// (lambda pi R1^2 - 1) / (pi R1^2), so the expected total stays lambda pi R1^2.
inline std::vector<int> run_probe(const SimConfig& raw, Point2 x, ProbeBackground bg = ProbeBackground::Reduced) {
  const SimConfig cfg = validate(raw);
  const double density = bg == ProbeBackground::Reduced ? reduced_density(cfg.env) : cfg.env.density;
  std::vector<int> out(static_cast<std::size_t>(cfg.realizations));
  parallel_for(cfg.realizations, [&](long i) {
    const auto seed = realization_seed(cfg, i);
    auto pos_rng = pp::make_engine(seed, 0);
    std::vector<Point2> pts{x};
    const auto others = pp::sample_disk_points(density, cfg.env.pop_radius, pos_rng);
    pts.insert(pts.end(), others.begin(), others.end());
    out[static_cast<std::size_t>(i)] = observe(pts, 1, cfg, seed).counts[0];
  });
  return out;
}

/// Mean observation at a fixed x at several sample times (same realizations
/// reused at each time only through the seeds; every time is independent).
inline std::vector<SampleSummary> run_probe_over_time(const SimConfig& raw, Point2 x, const std::vector<double>& times) {
  std::vector<SampleSummary> out;
  for (double t : times) {
    SimConfig c = raw;
    c.t_end = std::max(raw.t_end, t);
    c.sample_time = t;
    const auto obs = run_probe(c, x);
    out.push_back(summarize(std::vector<double>(obs.begin(), obs.end())));
  }
  return out;
}

/// Per-bacterium observation mean and variance over repeated emission noise
/// with the positions held fixed.
struct FixedPopulationStats {
  std::vector<double> mean;
  std::vector<double> variance;

  /// Pooled variance / mean over all bacteria.
  double dispersion_index() const {
    double m = 0.0, v = 0.0;
    for (std::size_t i = 0; i < mean.size(); ++i) {
      m += mean[i];
      v += variance[i];
    }
    return m > 0.0 ? v / m : 0.0;
  }
};

inline FixedPopulationStats run_fixed_population(const SimConfig& raw, const std::vector<Point2>& positions) {
  const SimConfig cfg = validate(raw);
  std::vector<std::vector<int>> counts(static_cast<std::size_t>(cfg.realizations));
  parallel_for(cfg.realizations, [&](long i) {
    counts[static_cast<std::size_t>(i)] = observe(positions, positions.size(), cfg, realization_seed(cfg, i)).counts;
  });
  FixedPopulationStats s;
  s.mean.assign(positions.size(), 0.0);
  s.variance.assign(positions.size(), 0.0);
  const double n = cfg.realizations;
  for (std::size_t b = 0; b < positions.size(); ++b) {
    double sum = 0.0, sq = 0.0;
    for (const auto& row : counts) {
      sum += row[b];
      sq += static_cast<double>(row[b]) * row[b];
    }
    s.mean[b] = sum / n;
    s.variance[b] = n > 1 ? (sq - sum * sum / n) / (n - 1.0) : 0.0;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Single impulse release.

/// Number of `molecules` released together at the origin at time 0 that are
/// inside the receiver centred at b at time tau (tau a whole number of steps).
/// Only molecules in the strip |x - |b|| <= R0 along b can be inside, so the
/// strip occupancy is drawn as a binomial and coordinates are sampled only
/// for those molecules; the result has the same distribution as moving every
/// molecule.
inline long impulse_count(const EnvParams& p, Point2 b, double tau, long molecules, std::uint64_t seed) {
  if (!(tau > 0.0)) throw Error(ErrorKind::NonPositive, "tau");
  pp::Engine rng(seed);
  const long alive = boost::random::binomial_distribution<long, double>(molecules, std::exp(-p.degradation * tau))(rng);
  const double sd = std::sqrt(2.0 * p.diffusion * tau);
  const double bn = b.norm();
  const double R0 = p.rx_radius;
  // Strip probability and inverse-CDF sampling, in whichever tail keeps precision.
  const double lo = (bn - R0) / sd;
  const double hi = (bn + R0) / sd;
  const bool upper = lo > 0.0;
  // Tail mass beyond a point: Q(z) = erfc(z / sqrt 2) / 2.
  auto Q = [](double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); };
  const double qa = upper ? Q(lo) : Q(-hi);
  const double qb = upper ? Q(hi) : Q(-lo);
  const double p_strip = qa - qb;
  if (!(p_strip > 0.0)) return 0;
  const long n_strip = boost::random::binomial_distribution<long, double>(alive, std::min(1.0, p_strip))(rng);
  long inside = 0;
  for (long i = 0; i < n_strip; ++i) {
    const double qv = qb + pp::uniform01(rng) * p_strip;
    const double z = std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * qv);
    const double x = (upper ? z : -z) * sd;
    const double y = sd * normal01(rng);
    const double dx = x - bn;
    if (dx * dx + y * y <= R0 * R0) ++inside;
  }
  return inside;
}

}  // namespace qsmc::sim
