#include "cli.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "cli_internal.hpp"

#ifdef QSMC_HAVE_OPENMP
#include <omp.h>
#endif

namespace qsmc::cli {

namespace {

// Global options that may also come from QSMC_<NAME> (dashes become underscores).
const std::vector<std::string> kEnvOptions{"D",   "k",          "q",           "R0",        "R1",
                                           "lambda", "population", "eta",      "dt",        "t-end",
                                           "sample-time", "Db",   "realizations", "seed",   "threads",
                                           "tol", "output",     "format",      "sweep"};

std::string env_name(const std::string& opt) {
  std::string n = "QSMC_";
  for (char c : opt) n += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return n;
}

void add_globals(CLI::App& app, Settings& s) {
  app.add_option("--D", s.D, "molecule diffusion coefficient, m^2/s")->capture_default_str();
  app.add_option("--k", s.k, "degradation rate, 1/s")->capture_default_str();
  app.add_option("--q", s.q, "emission rate, molecules/s")->capture_default_str();
  app.add_option("--R0", s.R0, "receiver radius, um")->capture_default_str();
  app.add_option("--R1", s.R1, "population disk radius, um")->capture_default_str();
  app.add_option("--lambda", s.lambda, "bacteria per um^2 (0: from --population)")->capture_default_str();
  app.add_option("--population", s.population, "expected bacteria in the disk when --lambda is 0")
      ->capture_default_str();
  app.add_option("--eta", s.eta, "detection threshold")->capture_default_str();
  app.add_option("--dt", s.dt, "simulation step, s (0: default)")->capture_default_str();
  app.add_option("--t-end", s.t_end, "simulated duration, s")->capture_default_str();
  app.add_option("--sample-time", s.sample_time, "observation time, s (0: --t-end)")->capture_default_str();
  app.add_option("--Db", s.Db, "bacteria diffusion coefficient, m^2/s")->capture_default_str();
  app.add_option("--realizations", s.realizations, "Monte Carlo realizations")->capture_default_str();
  app.add_option("--seed", s.seed, "master seed")->capture_default_str();
  app.add_option("--threads", s.threads, "worker threads (0: OpenMP default)")->capture_default_str();
  app.add_option("--tol", s.tol, "quadrature relative tolerance (0: defaults)")->capture_default_str();
  app.add_option("--output", s.output, "output file, '-' for stdout")->capture_default_str();
  app.add_option("--format", s.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_option("--sweep", s.sweep, "name=v1,v2,... to repeat the command over one parameter");
}

template <class T>
CLI::Option* add_list(CLI::App* sub, const std::string& name, std::vector<T>& v, const std::string& help) {
  return sub->add_option(name, v, help)->delimiter(',')->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->allow_extra_args(false);
}

std::string joined(const std::vector<std::string>& args) {
  std::string c = "qsmc";
  for (const auto& a : args) c += " " + a;
  return c;
}

using Runner = std::function<void(const Settings&, Table&, const std::vector<Cell>&)>;

void run_table(const Settings& s, std::vector<std::string> columns, const Runner& fn, const std::string& command,
               std::ostream& out) {
  Table t;
  if (s.sweep.empty()) {
    t.columns = std::move(columns);
    fn(s, t, {});
  } else {
    const Sweep sw = parse_sweep(s.sweep);
    t.columns = {sw.name};
    t.columns.insert(t.columns.end(), columns.begin(), columns.end());
    for (double v : sw.values) {
      Settings si = s;
      apply_setting(si, sw.name, v);
      fn(si, t, {v});
    }
  }
  emit(t, command, s, out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Settings s;
  ChannelArgs ch;
  CoopArgs co;
  StatsArgs st;
  SimulateArgs si;
  std::string figure_id;

  CLI::App app{"Molecular channel responses and quorum-sensing cooperation statistics", "qsmc"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", version_string());
  app.set_config("--config", "", "key = value file; [channel] style sections set subcommand options");
  app.require_subcommand(1);
  add_globals(app, s);

  auto* channel = app.add_subcommand("channel", "mean molecule count at a receiver");
  channel->add_option("--mode", ch.mode,
                      "impulse, impulse-self, continuous, continuous-self, continuous-nodeg, continuous-time, "
                      "pointwise, aggregate, aggregate-time, observation-time")
      ->capture_default_str();
  add_list(channel, "--b", ch.b, "receiver offset, um: distance or x,y");
  add_list(channel, "--t", ch.t, "times, s (time-dependent modes)");
  channel->add_option("--form", ch.form, "exact or uca (continuous-time)")->capture_default_str();
  channel->add_option("--aggregate", ch.aggregate, "exact4d, uca2d, center3d or center-uca (aggregate)")
      ->capture_default_str();
  channel->add_option("--pointwise", ch.pointwise, "exact or uca (pointwise)")->capture_default_str();

  auto* coopc = app.add_subcommand("coop-prob", "probability that a bacterium at x cooperates");
  add_list(coopc, "--x", co.x, "bacterium location, um: distance or x,y");
  coopc->add_option("--eta-max", co.eta_max, "tabulate thresholds 1..N (0: only --eta)")->capture_default_str();
  coopc->add_option("--method", co.method, "exact, approx or both")
      ->check(CLI::IsMember({"exact", "approx", "both"}))
      ->capture_default_str();

  auto* statsc = app.add_subcommand("stats", "moments and fitted distributions of the cooperator count");
  statsc->add_option("--method", st.method, "exact or approx cooperation probability")->capture_default_str();
  statsc->add_option("--eta-max", st.eta_max, "thresholds 1..N")->capture_default_str();
  statsc->add_option("--moments", st.moments, "raw moments 1..N")->capture_default_str();
  statsc->add_option("--z-min", st.z_min, "tail point for the Poisson ccdf")->capture_default_str();
  add_list(statsc, "--pairs", st.pairs, "n-th neighbour pair counts to add");
  statsc->add_option("--pmf-eta", st.pmf_eta, "print the fitted PMFs for this threshold instead")
      ->capture_default_str();

  auto* simc = app.add_subcommand("simulate", "particle Monte Carlo");
  simc->add_option("--mode", si.mode, "batch, mobile, probe, realization, fixed or impulse")->capture_default_str();
  simc->add_option("--eta-max", si.eta_max, "thresholds 1..N (batch, mobile)")->capture_default_str();
  simc->add_option("--z-min", si.z_min, "tail point for the empirical ccdf")->capture_default_str();
  simc->add_flag("--histogram", si.histogram, "print the cooperator-count histogram");
  simc->add_option("--histogram-eta", si.histogram_eta, "threshold for --histogram (0: --eta)")
      ->capture_default_str();
  add_list(simc, "--x", si.x, "probe location, um");
  simc->add_option("--index", si.index, "realization index (realization mode)")->capture_default_str();
  simc->add_option("--molecules", si.molecules, "impulse size (impulse mode)")->capture_default_str();
  add_list(simc, "--b", si.b, "receiver offset, um (impulse mode)");
  add_list(simc, "--t", si.t, "times, s (impulse mode)");
  simc->add_option("--background", si.background, "reduced or full (probe mode)")->capture_default_str();

  auto* figc = app.add_subcommand("figure", "regenerate the data behind one figure");
  figc->add_option("id", figure_id, "figure id")->required()->check(CLI::IsMember(figure_ids()));

  auto* verc = app.add_subcommand("verify", "fast self-checks; exit status 1 on any failure");
  verc->add_option("--inject-variance-scale", s.inject_variance_scale,
                   "scale the Brownian step variance (fault injection)")
      ->capture_default_str();

  for (auto* sub : {channel, coopc, statsc, simc, figc, verc}) sub->fallthrough();

  // Environment values go in front of the real arguments: a later flag wins
  // (TakeLast), and anything given on the command line hides the config file.
  std::vector<std::string> full;
  for (const auto& name : kEnvOptions)
    if (const char* v = std::getenv(env_name(name).c_str())) full.push_back("--" + name + "=" + v);
  full.insert(full.end(), args.begin(), args.end());
  std::vector<std::string> reversed(full.rbegin(), full.rend());  // CLI11 consumes from the back

  const std::string command = joined(args);
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return e.get_exit_code() == 0 ? kOk : kConfigError;
  }

  try {
#ifdef QSMC_HAVE_OPENMP
    if (s.threads > 0) omp_set_num_threads(s.threads);
#endif
    if (s.threads < 0) throw ConfigError("--threads must be >= 0");
    if (!s.sweep.empty() && (figc->parsed() || verc->parsed()))
      throw ConfigError("--sweep applies to channel, coop-prob, stats and simulate only");
    if (!s.sweep.empty()) parse_sweep(s.sweep);  // reject a bad sweep before any work

    if (channel->parsed()) {
      run_table(s, channel_columns(ch), [&](auto& x, auto& t, auto& p) { channel_command(x, ch, t, p); }, command, out);
    } else if (coopc->parsed()) {
      run_table(s, coop_columns(co), [&](auto& x, auto& t, auto& p) { coop_command(x, co, t, p); }, command, out);
    } else if (statsc->parsed()) {
      run_table(s, stats_columns(st), [&](auto& x, auto& t, auto& p) { stats_command(x, st, t, p); }, command, out);
    } else if (simc->parsed()) {
      run_table(s, simulate_columns(si), [&](auto& x, auto& t, auto& p) { simulate_command(x, si, t, p); }, command,
                out);
    } else if (figc->parsed()) {
      emit(figure_command(s, figure_id), command, s, out);
    } else if (verc->parsed()) {
      Table t{{"check", "pass", "detail"}, {}, {}};
      bool all = true;
      for (const auto& c : verify_checks(s)) {
        t.add({c.name, c.pass ? std::string("PASS") : std::string("FAIL"), c.detail});
        all = all && c.pass;
      }
      emit(t, command, s, out);
      return all ? kOk : kVerifyFailed;
    }
    return kOk;
  } catch (const ConfigError& e) {
    err << "qsmc: configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const IoError& e) {
    err << "qsmc: I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const Error& e) {
    err << "qsmc: " << e.what() << '\n';
    return e.kind() == ErrorKind::NoConvergence ? kNumericalError : kConfigError;
  } catch (const std::exception& e) {
    err << "qsmc: numerical failure: " << e.what() << '\n';
    return kNumericalError;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace qsmc::cli
