#include <cmath>
#include <limits>

#include "cli_internal.hpp"
#include "qsmc/channel.hpp"
#include "qsmc/popstats.hpp"

namespace qsmc::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<Cell> with_prefix(const std::vector<Cell>& prefix, std::initializer_list<Cell> cells) {
  std::vector<Cell> row(prefix);
  row.insert(row.end(), cells);
  return row;
}

const std::vector<double>& require_times(const std::vector<double>& t, const std::string& mode) {
  if (t.empty()) throw ConfigError("mode '" + mode + "' needs --t");
  return t;
}

channel::AggregateMode aggregate_mode(const std::string& s) {
  if (s == "exact4d") return channel::AggregateMode::Exact4D;
  if (s == "uca2d") return channel::AggregateMode::UCA2D;
  if (s == "center3d") return channel::AggregateMode::Center3D;
  if (s == "center-uca-closed") return channel::AggregateMode::CenterUCAClosed;
  throw ConfigError("unknown aggregate mode '" + s + "'");
}

bool is_time_mode(const std::string& m) {
  return m == "impulse" || m == "impulse-self" || m == "continuous-nodeg" || m == "continuous-time" ||
         m == "aggregate-time" || m == "observation-time";
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<std::string> channel_columns(const ChannelArgs&) {
  return {"mode", "b_x_um", "b_y_um", "t_s", "mean_count", "err_est", "method"};
}

void channel_command(const Settings& s, const ChannelArgs& a, Table& t, const std::vector<Cell>& prefix) {
  const EnvParams p = validate(s.env(), Analysis::Channel);
  const Point2 b = point_um(a.b, "--b");
  const auto spec = s.line_spec();
  auto row = [&](double time, const channel::ChannelResult& r) {
    t.add(with_prefix(prefix, {a.mode, um(b.x), um(b.y), time, r.mean_count, r.err_est,
                               std::string(channel::to_string(r.method))}));
  };
  const std::string& m = a.mode;
  if (is_time_mode(m)) {
    for (double time : require_times(a.t, m)) {
      if (m == "impulse") row(time, channel::impulse_response(b, time, p, spec));
      else if (m == "impulse-self") row(time, channel::impulse_self_response(time, p));
      else if (m == "continuous-nodeg") row(time, channel::continuous_response_nodeg(b, time, p));
      else if (m == "continuous-time") {
        const auto form = a.form == "uca" ? channel::ImpulseForm::UCA : channel::ImpulseForm::Exact;
        row(time, channel::continuous_response_time(b, time, p, form, spec));
      } else if (m == "aggregate-time") row(time, channel::aggregate_response_time(b, time, p, p.density, spec));
      else row(time, channel::observation_mean_time(b, time, p));
    }
    return;
  }
  if (m == "continuous") row(kNaN, channel::continuous_response_uca(b, p));
  else if (m == "continuous-self") row(kNaN, channel::continuous_self_response(p));
  else if (m == "pointwise") {
    const auto pm = a.pointwise == "uca" ? channel::PointwiseMode::UCA : channel::PointwiseMode::Exact;
    row(kNaN, channel::pointwise_response_at(b.norm(), p, pm));
  } else if (m == "aggregate") {
    row(kNaN, channel::aggregate_response(b, p, aggregate_mode(a.aggregate)));
  } else {
    throw ConfigError("unknown channel mode '" + m + "'");
  }
}

// ---------------------------------------------------------------------------

std::vector<std::string> coop_columns(const CoopArgs&) {
  return {"x_um", "y_um", "eta", "exact", "approx", "mean_observation"};
}

void coop_command(const Settings& s, const CoopArgs& a, Table& t, const std::vector<Cell>& prefix) {
  const coop::CooperationModel model(s.env(), s.coop_options());
  const Point2 x = point_um(a.x, "--x");
  const int eta_max = a.eta_max > 0 ? a.eta_max : model.params().eta();
  const bool exact = a.method != "approx";
  const bool approx = a.method != "exact";
  const auto e = exact ? model.coop_prob_exact_all(x, eta_max) : std::vector<double>(static_cast<std::size_t>(eta_max), kNaN);
  const double mean = model.mean_observation(x);
  const auto ap = approx ? coop::CooperationModel::poisson_tail_all(mean, eta_max)
                         : std::vector<double>(static_cast<std::size_t>(eta_max), kNaN);
  for (int eta = 1; eta <= eta_max; ++eta) {
    const auto i = static_cast<std::size_t>(eta - 1);
    t.add(with_prefix(prefix, {um(x.x), um(x.y), static_cast<long long>(eta), e[i], ap[i], mean}));
  }
}

// ---------------------------------------------------------------------------

std::vector<std::string> stats_columns(const StatsArgs& a) {
  if (a.pmf_eta > 0) return {"eta", "z", "poisson", "gaussian"};
  std::vector<std::string> c{"eta", "mean_z", "variance", "skewness", "excess_kurtosis"};
  for (int n = 1; n <= a.moments; ++n) c.push_back("moment_" + std::to_string(n));
  c.push_back("z_min");
  c.push_back("ccdf_poisson");
  for (int n : a.pairs) c.push_back("pairs_n" + std::to_string(n));
  return c;
}

void stats_command(const Settings& s, const StatsArgs& a, Table& t, const std::vector<Cell>& prefix) {
  if (a.method != "exact" && a.method != "approx") throw ConfigError("--method must be exact or approx");
  if (a.moments < 1 || a.moments > coop::kMaxPartitionOrder) throw ConfigError("--moments must be in 1..12");
  const int eta_max = a.pmf_eta > 0 ? a.pmf_eta : a.eta_max;
  const stats::PopulationModel pm(s.env(), a.method == "exact" ? stats::ProbMode::Exact : stats::ProbMode::Approx, eta_max,
                                  s.coop_options());
  if (a.pmf_eta > 0) {
    const double mean = pm.mean_cooperators(a.pmf_eta);
    const int z_hi = static_cast<int>(std::ceil(mean + 8.0 * std::sqrt(mean) + 10.0));
    for (int z = 0; z <= z_hi; ++z) {
      auto row = prefix;
      row.insert(row.end(), {static_cast<long long>(a.pmf_eta), static_cast<long long>(z),
                             stats::fit_pmf(stats::FitModel::Poisson, mean, mean, z),
                             stats::fit_pmf(stats::FitModel::Gaussian, mean, mean, z)});
      t.add(std::move(row));
    }
    return;
  }
  for (int eta = 1; eta <= eta_max; ++eta) {
    const double mean = pm.mean_cooperators(eta);
    const auto cs = stats::coop_stats(mean, a.moments);
    std::vector<Cell> row(prefix);
    row.insert(row.end(), {static_cast<long long>(eta), mean, cs.variance, mean > 0 ? cs.skewness : kNaN,
                           mean > 0 ? cs.kurtosis : kNaN});
    for (double m : cs.moments) row.emplace_back(m);
    row.emplace_back(static_cast<long long>(a.z_min));
    row.emplace_back(stats::ccdf(stats::FitModel::Poisson, mean, mean, a.z_min));
    for (int n : a.pairs) row.emplace_back(pm.pair_coop_count(n, eta));
    t.add(std::move(row));
  }
}

// ---------------------------------------------------------------------------

std::vector<std::string> simulate_columns(const SimulateArgs& a) {
  const auto& m = a.mode;
  if ((m == "batch" || m == "mobile") && a.histogram) return {"eta", "z", "count", "pmf", "ci_low", "ci_high"};
  if (m == "batch" || m == "mobile")
    return {"eta", "mean_z", "var_z", "ci_low", "ci_high", "z_min", "ccdf", "ccdf_low", "ccdf_high", "mean_population",
            "mean_observation"};
  if (m == "probe") return {"x_um", "y_um", "eta", "fraction", "ci_low", "ci_high", "mean_observation", "var_observation"};
  if (m == "realization") return {"bacterium", "x_um", "y_um", "observation", "cooperator"};
  if (m == "fixed") return {"bacterium", "x_um", "y_um", "mean", "variance"};
  if (m == "impulse") return {"b_x_um", "b_y_um", "t_s", "molecules", "count", "fraction", "analytic_fraction"};
  throw ConfigError("unknown simulate mode '" + m + "'");
}

void simulate_command(const Settings& s, const SimulateArgs& a, Table& t, const std::vector<Cell>& prefix) {
  sim::SimConfig cfg = sim::validate(s.sim());
  const auto& m = a.mode;
  if (m == "batch" || m == "mobile") {
    if (m == "batch" && cfg.bacteria_diffusion > 0.0) throw ConfigError("batch mode is for static bacteria; use mobile");
    const int eta_max = a.histogram ? std::max(a.histogram_eta > 0 ? a.histogram_eta : cfg.env.eta(), 1) : a.eta_max;
    const auto b = m == "mobile" ? sim::run_mobile(cfg, eta_max) : sim::run_batch(cfg, eta_max);
    if (a.histogram) {
      const int eta = eta_max;
      for (const auto& bin : b.histogram(eta))
        t.add(with_prefix(prefix, {static_cast<long long>(eta), static_cast<long long>(bin.z),
                                   static_cast<long long>(bin.count), bin.pmf, bin.ci.low, bin.ci.high}));
      return;
    }
    const auto pop = sim::summarize(std::vector<double>(b.population.begin(), b.population.end()));
    const auto obs = sim::summarize(b.mean_obs);
    for (int eta = 1; eta <= eta_max; ++eta) {
      const auto z = b.cooperators(eta);
      const auto [frac, ci] = b.ccdf(eta, a.z_min);
      t.add(with_prefix(prefix, {static_cast<long long>(eta), z.mean, z.variance, z.ci.low, z.ci.high,
                                 static_cast<long long>(a.z_min), frac, ci.low, ci.high, pop.mean, obs.mean}));
    }
    return;
  }
  if (m == "probe") {
    const Point2 x = point_um(a.x, "--x");
    if (a.background != "reduced" && a.background != "full") throw ConfigError("--background must be reduced or full");
    const auto obs = sim::run_probe(cfg, x, a.background == "full" ? sim::ProbeBackground::Full : sim::ProbeBackground::Reduced);
    const auto sum = sim::summarize(std::vector<double>(obs.begin(), obs.end()));
    for (int eta = 1; eta <= a.eta_max; ++eta) {
      long hits = 0;
      for (int o : obs) hits += o >= eta ? 1 : 0;
      const auto ci = sim::wilson(hits, static_cast<long>(obs.size()));
      t.add(with_prefix(prefix, {um(x.x), um(x.y), static_cast<long long>(eta),
                                 static_cast<double>(hits) / static_cast<double>(obs.size()), ci.low, ci.high, sum.mean,
                                 sum.variance}));
    }
    return;
  }
  if (m == "realization") {
    const auto o = sim::run_realization(cfg, a.index);
    for (std::size_t i = 0; i < o.positions.size(); ++i)
      t.add(with_prefix(prefix, {static_cast<long long>(i), um(o.positions[i].x), um(o.positions[i].y),
                                 static_cast<long long>(o.per_bacterium_obs[i]), static_cast<long long>(o.decisions[i])}));
    return;
  }
  if (m == "fixed") {
    auto rng = pp::make_engine(sim::realization_seed(cfg, a.index), 0);
    const auto pos = pp::sample_disk_points(cfg.env.density, cfg.env.pop_radius, rng);
    const auto st = sim::run_fixed_population(cfg, pos);
    for (std::size_t i = 0; i < pos.size(); ++i)
      t.add(with_prefix(prefix, {static_cast<long long>(i), um(pos[i].x), um(pos[i].y), st.mean[i], st.variance[i]}));
    t.notes.push_back("dispersion_index: " + std::to_string(st.dispersion_index()));
    return;
  }
  if (m == "impulse") {
    const Point2 b = point_um(a.b, "--b");
    if (a.molecules < 1) throw ConfigError("--molecules must be >= 1");
    const auto& times = require_times(a.t, m);
    for (std::size_t i = 0; i < times.size(); ++i) {
      const long n = sim::impulse_count(cfg.env, b, times[i], a.molecules, pp::derive_seed(cfg.master_seed, i, 0x1a));
      const double h = channel::impulse_response(b, times[i], cfg.env).mean_count;
      t.add(with_prefix(prefix, {um(b.x), um(b.y), times[i], static_cast<long long>(a.molecules), static_cast<long long>(n),
                                 static_cast<double>(n) / static_cast<double>(a.molecules), h}));
    }
    return;
  }
  simulate_columns(a);  // throws for an unknown mode
}

}  // namespace qsmc::cli
