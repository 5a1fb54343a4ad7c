#include <cmath>
#include <numbers>
#include <sstream>

#include "cli_internal.hpp"

namespace qsmc::cli {

EnvParams Settings::env() const {
  EnvParams p;
  p.diffusion = D;
  p.degradation = k;
  p.emission_rate = q;
  p.rx_radius = R0 * 1e-6;
  p.pop_radius = R1 * 1e-6;
  p.density = lambda > 0.0 ? lambda * 1e12 : population / (std::numbers::pi * p.pop_radius * p.pop_radius);
  p.threshold = eta;
  return p;
}

sim::SimConfig Settings::sim() const {
  sim::SimConfig c;
  c.env = env();
  c.dt = dt;
  c.t_end = t_end;
  c.sample_time = sample_time;
  c.bacteria_diffusion = Db;
  c.realizations = realizations;
  c.master_seed = seed;
  c.brownian_variance_scale = inject_variance_scale;
  return c;
}

coop::CoopOptions Settings::coop_options() const {
  coop::CoopOptions o;
  if (tol > 0.0) {
    o.spec.rel_tol = tol;
    o.table_rel_tol = std::min(o.table_rel_tol, tol);
  }
  return o;
}

quad::QuadSpec Settings::line_spec() const {
  quad::QuadSpec s = quad::QuadSpec::line();
  if (tol > 0.0) s.rel_tol = tol;
  return s;
}

nlohmann::json Settings::to_json() const {
  const EnvParams p = env();
  return {
      {"D_m2_per_s", D},
      {"k_per_s", k},
      {"q_per_s", q},
      {"R0_um", R0},
      {"R1_um", R1},
      {"lambda_per_um2", p.density * 1e-12},
      {"expected_population", p.expected_population()},
      {"eta", eta},
      {"dt_s", sim().step()},
      {"t_end_s", t_end},
      {"sample_time_s", sim().sample_at()},
      {"Db_m2_per_s", Db},
      {"realizations", realizations},
      {"seed", seed},
      {"threads", threads},
      {"tol", tol},
      {"format", format},
      {"sweep", sweep},
      {"brownian_variance_scale", inject_variance_scale},
  };
}

const std::vector<std::string>& sweepable() {
  static const std::vector<std::string> names{"D",  "k",     "q",           "R0", "R1",           "lambda", "population",
                                              "eta", "dt",   "t_end",       "sample_time",  "Db",     "realizations", "seed"};
  return names;
}

void apply_setting(Settings& s, const std::string& name, double v) {
  if (name == "D") s.D = v;
  else if (name == "k") s.k = v;
  else if (name == "q") s.q = v;
  else if (name == "R0") s.R0 = v;
  else if (name == "R1") s.R1 = v;
  else if (name == "lambda") s.lambda = v;
  else if (name == "population") s.population = v;
  else if (name == "eta") s.eta = v;
  else if (name == "dt") s.dt = v;
  else if (name == "t_end") s.t_end = v;
  else if (name == "sample_time") s.sample_time = v;
  else if (name == "Db") s.Db = v;
  else if (name == "realizations") {
    if (v != std::floor(v)) throw ConfigError("realizations must be an integer");
    s.realizations = static_cast<int>(v);
  } else if (name == "seed") {
    if (v < 0 || v != std::floor(v)) throw ConfigError("seed must be a non-negative integer");
    s.seed = static_cast<std::uint64_t>(v);
  } else {
    throw ConfigError("unknown sweep parameter '" + name + "'");
  }
}

Sweep parse_sweep(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError("sweep must look like name=v1,v2,...");
  Sweep sw;
  sw.name = text.substr(0, eq);
  bool known = false;
  for (const auto& n : sweepable()) known = known || n == sw.name;
  if (!known) throw ConfigError("unknown sweep parameter '" + sw.name + "'");
  std::stringstream ss(text.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      sw.values.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("sweep value '" + item + "' is not a number");
    }
  }
  if (sw.values.empty()) throw ConfigError("sweep over '" + sw.name + "' has no values");
  return sw;
}

Point2 point_um(const std::vector<double>& v, const char* what) {
  if (v.size() == 1) return {v[0] * 1e-6, 0.0};
  if (v.size() == 2) return {v[0] * 1e-6, v[1] * 1e-6};
  throw ConfigError(std::string(what) + " takes one value (distance) or two (x,y), in um");
}

double um(double metres) { return metres * 1e6; }

}  // namespace qsmc::cli
