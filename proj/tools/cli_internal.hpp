#pragma once
// Pieces shared by the command implementations.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "qsmc/core.hpp"
#include "qsmc/cooperation.hpp"
#include "qsmc/simulator.hpp"

namespace qsmc::cli {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Everything a command needs, in user units (lengths in um, density per
/// um^2). Resolved from defaults, config file, QSMC_* variables and flags.
struct Settings {
  double D = 5.5e-10;       // m^2/s
  double k = 10.0;          // 1/s
  double q = 1000.0;        // molecules/s
  double R0 = 0.757;        // um
  double R1 = 50.0;         // um
  double lambda = 0.0;      // bacteria per um^2; 0 derives it from `population`
  double population = 100.0;  // expected bacteria in the disk when lambda = 0
  double eta = 1.0;

  double dt = 0.0;          // s; 0 selects the default step
  double t_end = 0.5;       // s
  double sample_time = 0.0;  // s; 0 selects t_end
  double Db = 0.0;          // m^2/s
  int realizations = 1000;
  std::uint64_t seed = 1;

  int threads = 0;          // 0 leaves the OpenMP default
  double tol = 0.0;         // quadrature relative tolerance; 0 keeps the defaults
  std::string output = "-";
  std::string format = "csv";
  std::string sweep;        // "name=v1,v2,..."

  double inject_variance_scale = 1.0;  // verify fault-injection hook

  EnvParams env() const;
  sim::SimConfig sim() const;
  coop::CoopOptions coop_options() const;
  quad::QuadSpec line_spec() const;
  nlohmann::json to_json() const;
};

/// Parameter names a sweep may vary.
const std::vector<std::string>& sweepable();
void apply_setting(Settings& s, const std::string& name, double value);

struct Sweep {
  std::string name;
  std::vector<double> values;
};

/// Parses "name=v1,v2,..."; throws ConfigError on an unknown name or an empty list.
Sweep parse_sweep(const std::string& text);

// ---------------------------------------------------------------------------
// Tabular output.

using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::string> notes;  // extra '#' lines in CSV, "notes" in JSON

  void add(std::vector<Cell> row);
};

/// Writes `table` to settings.output (or `out` for "-") in settings.format,
/// headed by the resolved configuration. Throws IoError.
void emit(const Table& table, const std::string& command, const Settings& settings, std::ostream& out);

std::string version_string();

// ---------------------------------------------------------------------------
// Commands. Each fills a table; sweeps are handled by the caller.

struct ChannelArgs {
  std::string mode = "continuous-self";
  std::vector<double> b{0.0};
  std::vector<double> t;
  std::string form = "exact";
  std::string aggregate = "uca2d";
  std::string pointwise = "exact";
};

struct CoopArgs {
  std::vector<double> x{0.0, 0.0};
  int eta_max = 0;  // 0: the configured threshold
  std::string method = "both";
};

struct StatsArgs {
  std::string method = "exact";
  int eta_max = 10;
  int moments = 4;
  int z_min = 10;
  std::vector<int> pairs;
  int pmf_eta = 0;  // > 0 switches to the fitted PMF table for that threshold
};

struct SimulateArgs {
  std::string mode = "batch";
  int eta_max = 10;
  int z_min = 10;
  bool histogram = false;
  int histogram_eta = 0;  // 0: the configured threshold
  std::vector<double> x{0.0, 0.0};
  long index = 0;
  long molecules = 1000000;
  std::vector<double> b{0.0, 5.0};
  std::vector<double> t;
  std::string background = "reduced";
};

void channel_command(const Settings& s, const ChannelArgs& a, Table& t, const std::vector<Cell>& prefix);
void coop_command(const Settings& s, const CoopArgs& a, Table& t, const std::vector<Cell>& prefix);
void stats_command(const Settings& s, const StatsArgs& a, Table& t, const std::vector<Cell>& prefix);
void simulate_command(const Settings& s, const SimulateArgs& a, Table& t, const std::vector<Cell>& prefix);

std::vector<std::string> channel_columns(const ChannelArgs& a);
std::vector<std::string> coop_columns(const CoopArgs& a);
std::vector<std::string> stats_columns(const StatsArgs& a);
std::vector<std::string> simulate_columns(const SimulateArgs& a);

/// Names accepted by `figure`.
const std::vector<std::string>& figure_ids();
Table figure_command(const Settings& s, const std::string& id);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<CheckResult> verify_checks(const Settings& s);

// Helpers shared by the commands.
Point2 point_um(const std::vector<double>& v, const char* what);
double um(double metres);

}  // namespace qsmc::cli
