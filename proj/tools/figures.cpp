// Presets that regenerate the data behind each figure. Caption parameters
// (radii, locations, thresholds, receiver cases) are fixed here; physical
// constants, realization counts, seeds and tolerances come from the settings.

#include <cmath>

#include "cli_internal.hpp"
#include "qsmc/channel.hpp"
#include "qsmc/popstats.hpp"

namespace qsmc::cli {

namespace {

constexpr int kEtaSweep = 10;
const std::vector<double> kRadii{50.0, 100.0, 150.0};

Settings at_radius(Settings s, double r1_um) {
  s.R1 = r1_um;
  s.lambda = 0.0;
  s.population = 100.0;
  return s;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  return v;
}

const std::vector<double> kTimes{0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0, 1.5, 2.0};

long long ll(long v) { return static_cast<long long>(v); }

sim::BatchResult batch(const Settings& s, int eta_max = kEtaSweep) { return sim::run_batch(s.sim(), eta_max); }

// Receiver cases shared by presets 6a and 6b: (R1, x).
struct RxCase {
  std::string name;
  double r1;
  Point2 x;  // m
};

std::vector<RxCase> fig6_cases() {
  std::vector<RxCase> c;
  for (double r : kRadii) c.push_back({"R1=" + std::to_string(static_cast<int>(r)) + "_half", r, {r * 0.5e-6, r * 0.5e-6}});
  c.push_back({"R1=50_centre", 50.0, {0.0, 0.0}});
  return c;
}

Table fig2(const Settings& s) {
  Table t{{"release", "t_s"}, {}, {"release times of one bacterium over 0.05 s"}};
  const auto r = pp::sample_release_times(s.q, 0.05, s.seed);
  for (std::size_t i = 0; i < r.times.size(); ++i) t.add({ll(static_cast<long>(i)), r.times[i]});
  return t;
}

Table fig3(Settings s) {
  s.R1 = 20.0;
  s.lambda = 7.9e-2;
  const Point2 x{10e-6, 10e-6};
  const EnvParams p = s.env();
  Table t{{"t_s", "analytic", "sim_mean", "sim_ci_low", "sim_ci_high"}, {}, {"x = (10, 10) um, R1 = 20 um"}};
  const auto sims = sim::run_probe_over_time(s.sim(), x, kTimes);
  for (std::size_t i = 0; i < kTimes.size(); ++i)
    t.add({kTimes[i], channel::observation_mean_time(x, kTimes[i], p).mean_count, sims[i].mean, sims[i].ci.low,
           sims[i].ci.high});
  return t;
}

Table fig5a(const Settings& s) {
  const EnvParams p = validate(s.env(), Analysis::Channel);
  const long molecules = 100000;
  Table t{{"case", "b_x_um", "b_y_um", "t_s", "analytic", "simulated"}, {}, {"impulse of 1e5 molecules at the origin"}};
  const std::vector<std::pair<std::string, Point2>> cases{{"i", {0.0, 5e-6}}, {"ii", {0.0, 0.0}}};
  std::uint64_t k = 0;
  for (const auto& [name, b] : cases)
    for (double tau : log_grid(1e-4, 1.0, 41)) {
      const double h = channel::impulse_response(b, tau, p).mean_count;
      const long n = sim::impulse_count(p, b, tau, molecules, pp::derive_seed(s.seed, k++, 0x5a));
      t.add({name, um(b.x), um(b.y), tau, h * molecules, static_cast<double>(n)});
    }
  return t;
}

Table fig5b(const Settings& s) {
  Table t{{"case", "b_x_um", "b_y_um", "k_per_s", "t_s", "response", "steady_state"}, {}, {}};
  EnvParams p = validate(s.env(), Analysis::Channel);
  EnvParams nodeg = p;
  nodeg.degradation = 0.0;
  struct Case {
    std::string name;
    Point2 b;
    const EnvParams* env;
  };
  const std::vector<Case> cases{{"iii", {0.0, 5e-6}, &p}, {"iv", {5e-6, 0.0}, &nodeg}, {"v", {0.0, 0.0}, &p}};
  for (const auto& c : cases) {
    double steady = std::numeric_limits<double>::quiet_NaN();
    if (c.env->degradation > 0.0)
      steady = c.b.norm() > 0.0 ? channel::pointwise_response_at(c.b.norm(), *c.env, channel::PointwiseMode::Exact).mean_count
                                : channel::continuous_self_response(*c.env).mean_count;
    for (double time : log_grid(1e-3, 10.0, 41)) {
      const double v = c.env->degradation > 0.0 ? channel::continuous_response_time(c.b, time, *c.env).mean_count
                                                : channel::continuous_response_nodeg(c.b, time, *c.env).mean_count;
      t.add({c.name, um(c.b.x), um(c.b.y), c.env->degradation, time, v, steady});
    }
  }
  return t;
}

Table fig6a(const Settings& s) {
  Table t{{"case", "R1_um", "x_um", "y_um", "t_s", "time_response", "steady_exact", "steady_uca"}, {}, {}};
  for (const auto& c : fig6_cases()) {
    const EnvParams p = validate(at_radius(s, c.r1).env(), Analysis::Channel);
    const bool centre = c.x.norm() == 0.0;
    const double ex =
        channel::aggregate_response(c.x, p, centre ? channel::AggregateMode::Center3D : channel::AggregateMode::Exact4D).mean_count;
    const double uc =
        channel::aggregate_response(c.x, p, centre ? channel::AggregateMode::CenterUCAClosed : channel::AggregateMode::UCA2D)
            .mean_count;
    for (double time : kTimes)
      t.add({c.name, c.r1, um(c.x.x), um(c.x.y), time, channel::aggregate_response_time(c.x, time, p, p.density).mean_count,
             ex, uc});
  }
  return t;
}

Table fig6b(const Settings& s) {
  Table t{{"case", "R1_um", "x_um", "y_um", "eta", "exact", "approx", "sim", "sim_ci_low", "sim_ci_high"}, {}, {}};
  for (const auto& c : fig6_cases()) {
    const Settings sr = at_radius(s, c.r1);
    const coop::CooperationModel m(sr.env(), sr.coop_options());
    const auto ex = m.coop_prob_exact_all(c.x, kEtaSweep);
    const auto ap = m.coop_prob_approx_all(c.x, kEtaSweep);
    const auto obs = sim::run_probe(sr.sim(), c.x);
    for (int eta = 1; eta <= kEtaSweep; ++eta) {
      long hits = 0;
      for (int o : obs) hits += o >= eta ? 1 : 0;
      const auto ci = sim::wilson(hits, static_cast<long>(obs.size()));
      const auto i = static_cast<std::size_t>(eta - 1);
      t.add({c.name, c.r1, um(c.x.x), um(c.x.y), ll(eta), ex[i], ap[i],
             static_cast<double>(hits) / static_cast<double>(obs.size()), ci.low, ci.high});
    }
  }
  return t;
}

Table fig7(const Settings& s) {
  Table t{{"bacterium", "x_um", "y_um", "observation", "cooperator"}, {}, {"one realization, R1 = 50 um"}};
  const auto o = sim::run_realization(at_radius(s, 50.0).sim(), 0);
  for (std::size_t i = 0; i < o.positions.size(); ++i)
    t.add({ll(static_cast<long>(i)), um(o.positions[i].x), um(o.positions[i].y), ll(o.per_bacterium_obs[i]),
           ll(o.decisions[i] ? 1 : 0)});
  return t;
}

Table fig8(const Settings& s) {
  Table t{{"R1_um", "eta", "analytic_exact", "analytic_approx", "sim_mean", "sim_ci_low", "sim_ci_high"}, {}, {}};
  for (double r : kRadii) {
    const Settings sr = at_radius(s, r);
    const stats::PopulationModel ex(sr.env(), stats::ProbMode::Exact, kEtaSweep, sr.coop_options());
    const stats::PopulationModel ap(sr.env(), stats::ProbMode::Approx, kEtaSweep, sr.coop_options());
    const auto b = batch(sr);
    for (int eta = 1; eta <= kEtaSweep; ++eta) {
      const auto z = b.cooperators(eta);
      t.add({r, ll(eta), ex.mean_cooperators(eta), ap.mean_cooperators(eta), z.mean, z.ci.low, z.ci.high});
    }
  }
  return t;
}

Table fig9(const Settings& s, double r1) {
  Table t{{"R1_um", "eta", "order", "analytic", "sim", "sim_ci_low", "sim_ci_high"}, {}, {}};
  const Settings sr = at_radius(s, r1);
  const stats::PopulationModel ex(sr.env(), stats::ProbMode::Exact, kEtaSweep, sr.coop_options());
  const auto b = batch(sr);
  for (int eta = 1; eta <= kEtaSweep; ++eta) {
    const double mean = ex.mean_cooperators(eta);
    for (int n = 1; n <= 4; ++n) {
      std::vector<double> zn;
      for (int z : b.z[static_cast<std::size_t>(eta - 1)]) zn.push_back(std::pow(z, n));
      const auto sm = sim::summarize(zn);
      t.add({r1, ll(eta), ll(n), stats::moment_n(n, mean), sm.mean, sm.ci.low, sm.ci.high});
    }
  }
  return t;
}

Table fig10(const Settings& s, double r1, int eta) {
  Table t{{"R1_um", "eta", "z", "sim_pmf", "sim_ci_low", "sim_ci_high", "poisson", "gaussian"}, {}, {}};
  const Settings sr = at_radius(s, r1);
  const stats::PopulationModel ex(sr.env(), stats::ProbMode::Exact, eta, sr.coop_options());
  const double mean = ex.mean_cooperators(eta);
  const auto b = batch(sr, eta);
  const auto hist = b.histogram(eta);
  const int peak = static_cast<int>(std::floor(mean));  // mode of the fitted Poisson
  for (const auto& bin : hist)
    t.add({r1, ll(eta), ll(bin.z), bin.pmf, bin.ci.low, bin.ci.high, stats::fit_pmf(stats::FitModel::Poisson, mean, mean, bin.z),
           stats::fit_pmf(stats::FitModel::Gaussian, mean, mean, bin.z)});
  const double sim_peak = peak < static_cast<int>(hist.size()) ? hist[static_cast<std::size_t>(peak)].pmf : 0.0;
  for (auto model : {stats::FitModel::Poisson, stats::FitModel::Gaussian}) {
    const double fit = stats::fit_pmf(model, mean, mean, peak);
    t.notes.push_back(std::string("peak_deviation_") + stats::to_string(model) + ": " +
                      (sim_peak > 0.0 ? std::to_string(std::abs(fit - sim_peak) / sim_peak) : std::string("nan")) +
                      " at z = " + std::to_string(peak));
  }
  return t;
}

Table fig11(const Settings& s) {
  Table t{{"R1_um", "eta", "pairs_n1", "pairs_n2"}, {}, {"lambda pi R1^2 = 100 at every radius"}};
  const int eta = 3;
  for (double r : {50.0, 75.0, 100.0, 125.0, 150.0, 200.0, 250.0, 300.0}) {
    const Settings sr = at_radius(s, r);
    const stats::PopulationModel pm(sr.env(), stats::ProbMode::Exact, eta, sr.coop_options());
    t.add({r, ll(eta), pm.pair_coop_count(1, eta), pm.pair_coop_count(2, eta)});
  }
  return t;
}

Table fig_ccdf(const Settings& s) {
  const int z_min = 10;
  Table t{{"R1_um", "eta", "z_min", "poisson_fit", "sim", "sim_ci_low", "sim_ci_high"}, {}, {}};
  for (double r : kRadii) {
    const Settings sr = at_radius(s, r);
    const stats::PopulationModel ex(sr.env(), stats::ProbMode::Exact, kEtaSweep, sr.coop_options());
    const auto b = batch(sr);
    for (int eta = 1; eta <= kEtaSweep; ++eta) {
      const double mean = ex.mean_cooperators(eta);
      const auto [frac, ci] = b.ccdf(eta, z_min);
      t.add({r, ll(eta), ll(z_min), stats::ccdf(stats::FitModel::Poisson, mean, mean, z_min), frac, ci.low, ci.high});
    }
  }
  return t;
}

Table fig_mobile(const Settings& s) {
  Table t{{"Db_m2_per_s", "eta", "sim_mean", "sim_ci_low", "sim_ci_high"}, {}, {"R1 = 50 um, 100 bacteria expected"}};
  for (double db : {0.0, 1e-11, 1e-10, 1e-9}) {
    Settings sr = at_radius(s, 50.0);
    sr.Db = db;
    const auto b = sim::run_mobile(sr.sim(), kEtaSweep);
    for (int eta = 1; eta <= kEtaSweep; ++eta) {
      const auto z = b.cooperators(eta);
      t.add({db, ll(eta), z.mean, z.ci.low, z.ci.high});
    }
  }
  return t;
}

}  // namespace

const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids{"2",   "3",   "5a",  "5b",  "6a",  "6b",  "7",   "8",   "9a",   "9b",
                                            "9c",  "10a", "10b", "10c", "10d", "10e", "10f", "11",  "ccdf", "mobile"};
  return ids;
}

Table figure_command(const Settings& s, const std::string& id) {
  if (id == "2") return fig2(s);
  if (id == "3") return fig3(s);
  if (id == "5a") return fig5a(s);
  if (id == "5b") return fig5b(s);
  if (id == "6a") return fig6a(s);
  if (id == "6b") return fig6b(s);
  if (id == "7") return fig7(s);
  if (id == "8") return fig8(s);
  if (id == "9a") return fig9(s, 50.0);
  if (id == "9b") return fig9(s, 100.0);
  if (id == "9c") return fig9(s, 150.0);
  if (id.size() == 3 && id.rfind("10", 0) == 0 && id[2] >= 'a' && id[2] <= 'f') {
    const int i = id[2] - 'a';
    return fig10(s, kRadii[static_cast<std::size_t>(i % 3)], i < 3 ? 1 : 5);
  }
  if (id == "11") return fig11(s);
  if (id == "ccdf") return fig_ccdf(s);
  if (id == "mobile") return fig_mobile(s);
  throw ConfigError("unknown figure '" + id + "'");
}

}  // namespace qsmc::cli
