// Fast self-checks behind `qsmc verify`. Each check is seconds at most and
// uses the configured seed, so two runs with the same settings print the
// same lines.

#include <cmath>
#include <sstream>

#include "cli_internal.hpp"
#include "qsmc/channel.hpp"
#include "qsmc/popstats.hpp"

namespace qsmc::cli {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

CheckResult brownian(const Settings& s) {
  EnvParams p = s.env();
  p.degradation = 0.0;
  const double dt = 1e-3;
  sim::StepEngine eng(p, dt, pp::derive_seed(s.seed, 0, 0xb1), s.inject_variance_scale);
  for (int i = 0; i < 1000; ++i) eng.add_molecule({0.0, 0.0});
  sim::StepStats st;
  for (int i = 0; i < 1000; ++i) eng.step(&st);
  const double v = 2.0 * p.diffusion * dt;
  const double n = static_cast<double>(st.steps);
  // Sample variance of n normals has relative sd sqrt(2/n); allow 6 sd.
  const double band = 6.0 * std::sqrt(2.0 / n);
  const double ex = st.var_x() / v - 1.0, ey = st.var_y() / v - 1.0, c = st.cov_xy() / v;
  const bool pass = std::abs(ex) < band && std::abs(ey) < band && std::abs(c) < 6.0 / std::sqrt(n);
  return {"brownian_step_variance", pass,
          "var_x/2Ddt-1=" + fmt(ex) + " var_y/2Ddt-1=" + fmt(ey) + " cov/2Ddt=" + fmt(c) + " band=" + fmt(band)};
}

CheckResult survival(const Settings& s) {
  const EnvParams p = validate(s.env(), Analysis::Channel);
  const double dt = sim::default_dt(p);
  sim::StepEngine eng(p, dt, pp::derive_seed(s.seed, 0, 0xde), s.inject_variance_scale);
  for (int i = 0; i < 200000; ++i) eng.add_molecule({0.0, 0.0});
  sim::StepStats st;
  for (int i = 0; i < 20; ++i) eng.step(&st);
  const double pr = std::exp(-p.degradation * dt);
  const double n = static_cast<double>(st.before);
  const double z = (static_cast<double>(st.survived) - n * pr) / std::sqrt(n * pr * (1.0 - pr));
  return {"degradation_survival", std::abs(z) < 4.0,
          "observed=" + fmt(st.survived / n) + " expected=" + fmt(pr) + " z=" + fmt(z)};
}

CheckResult mass_conservation(const Settings& s) {
  EnvParams p = s.env();
  p.degradation = 0.0;
  sim::StepEngine eng(p, 1e-3, pp::derive_seed(s.seed, 0, 0xc0), s.inject_variance_scale);
  for (int i = 0; i < 5000; ++i) eng.add_molecule({0.0, 0.0});
  for (int i = 0; i < 100; ++i) eng.step();
  return {"mass_conservation_k0", eng.size() == 5000, "molecules=" + std::to_string(eng.size())};
}

CheckResult partitions() {
  const long count[] = {1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42, 56, 77};
  const long bell[] = {1, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975, 678570, 4213597};
  bool pass = true;
  std::string bad;
  for (int n = 0; n <= coop::kMaxPartitionOrder; ++n) {
    const auto parts = coop::enumerate_partitions(n);
    double w = 0.0;
    for (const auto& t : parts) w += coop::partition_weight(t);
    const bool ok = static_cast<long>(parts.size()) == count[n] &&
                    std::abs(w * std::tgamma(n + 1.0) - bell[n]) <= 1e-9 * bell[n];
    if (!ok) bad += " n=" + std::to_string(n);
    pass = pass && ok;
  }
  return {"partition_counts", pass, pass ? "n=0..12 counts and set-partition weights" : "mismatch at" + bad};
}

CheckResult moments() {
  // E[Z^n] for Poisson(m) is the Touchard polynomial; compare with direct sums.
  double worst = 0.0;
  for (double m : {0.5, 2.0, 7.5})
    for (int n = 1; n <= 6; ++n) {
      double direct = 0.0;
      for (int z = 0; z < 400; ++z) direct += std::pow(z, n) * stats::poisson_pmf(m, z);
      worst = std::max(worst, std::abs(stats::moment_n(n, m) / direct - 1.0));
    }
  const bool known = stats::moment_n(3, 2.0) == 22.0 && stats::moment_n(4, 1.0) == 15.0;
  return {"poisson_moment_identities", known && worst < 1e-10, "max_rel_err=" + fmt(worst)};
}

CheckResult gamma_q() {
  double worst = 0.0;
  for (int a = 1; a <= 12; ++a)
    for (double x : {0.01, 0.5, 3.0, 11.0, 40.0}) {
      double sum = 0.0, term = std::exp(-x);
      for (int j = 0; j < a; ++j) {
        sum += term;
        term *= x / (j + 1);
      }
      worst = std::max(worst, std::abs(specfun::reg_gamma_q(a, x) - sum) / std::max(sum, 1e-300));
    }
  return {"reg_gamma_q_poisson_sum", worst < 1e-12, "max_rel_err=" + fmt(worst)};
}

CheckResult self_closed_form(const Settings& s) {
  const EnvParams p = validate(s.env(), Analysis::Channel);
  const double closed = channel::continuous_self_response(p).mean_count;
  const double integ = channel::continuous_response_time({0.0, 0.0}, 40.0 / p.degradation, p).mean_count;
  const double rel = std::abs(integ / closed - 1.0);
  return {"self_response_closed_form", rel < 1e-6, "closed=" + fmt(closed) + " time_integral=" + fmt(integ)};
}

CheckResult pointwise(const Settings& s) {
  const EnvParams p = validate(s.env(), Analysis::Channel);
  const double c = p.rate_length(), R0 = p.rx_radius, q = p.emission_rate;
  double worst = 0.0;
  for (double l : {0.3 * R0, 2.0 * R0, 10e-6, 40e-6}) {
    const double graf = l >= R0 ? q * R0 / (p.diffusion * c) * std::cyl_bessel_i(1.0, c * R0) * std::cyl_bessel_k(0.0, c * l)
                                : q / p.degradation *
                                      (1.0 - c * R0 * std::cyl_bessel_k(1.0, c * R0) * std::cyl_bessel_i(0.0, c * l));
    const double v = channel::pointwise_response_at(l, p, channel::PointwiseMode::Exact).mean_count;
    worst = std::max(worst, std::abs(v / graf - 1.0));
  }
  return {"pointwise_vs_addition_theorem", worst < 1e-6, "max_rel_err=" + fmt(worst)};
}

CheckResult uca_validity(const Settings& s) {
  Settings r = s;
  r.R1 = 50.0;
  r.lambda = 0.0;
  r.population = 100.0;
  const EnvParams p = validate(r.env(), Analysis::Channel);
  const Point2 x{25e-6, 25e-6};
  const double ex = channel::aggregate_response(x, p, channel::AggregateMode::Exact4D).mean_count;
  const double uc = channel::aggregate_response(x, p, channel::AggregateMode::UCA2D).mean_count;
  const double rel = std::abs(uc / ex - 1.0);
  return {"uca_aggregate_R1_50", rel < 0.01, "exact=" + fmt(ex) + " uca=" + fmt(uc) + " rel=" + fmt(rel)};
}

CheckResult coop_mc(const Settings& s) {
  Settings r = s;
  r.R1 = 50.0;
  r.lambda = 0.0;
  r.population = 100.0;
  r.realizations = 400;
  r.Db = 0.0;
  const Point2 x{25e-6, 25e-6};
  const int eta = std::max(1, r.env().eta());
  const double exact = coop::CooperationModel(r.env(), r.coop_options()).coop_prob_exact_all(x, eta).back();
  const auto obs = sim::run_probe(r.sim(), x);
  long hits = 0;
  for (int o : obs) hits += o >= eta ? 1 : 0;
  const auto ci = sim::wilson(hits, static_cast<long>(obs.size()), 4.0);
  const double frac = static_cast<double>(hits) / static_cast<double>(obs.size());
  return {"coop_prob_vs_simulation", exact >= ci.low && exact <= ci.high,
          "eta=" + std::to_string(eta) + " exact=" + fmt(exact) + " sim=" + fmt(frac) + " ci4=[" + fmt(ci.low) + "," +
              fmt(ci.high) + "]"};
}

CheckResult determinism(const Settings& s) {
  Settings r = s;
  r.R1 = 50.0;
  r.lambda = 0.0;
  r.population = 100.0;
  r.realizations = 20;
  r.Db = 0.0;
  const auto a = sim::run_batch(r.sim(), 3);
  const auto b = sim::run_batch(r.sim(), 3);
  const bool pass = a.z == b.z && a.seeds == b.seeds && a.mean_obs == b.mean_obs;
  return {"batch_determinism", pass, "realizations=20"};
}

}  // namespace

std::vector<CheckResult> verify_checks(const Settings& s) {
  return {brownian(s),   survival(s),           mass_conservation(s), partitions(),   moments(), gamma_q(),
          self_closed_form(s), pointwise(s), uca_validity(s),      coop_mc(s), determinism(s)};
}

}  // namespace qsmc::cli
