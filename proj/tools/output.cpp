#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>

#include "cli_internal.hpp"

#ifndef QSMC_GIT_DESCRIBE
#define QSMC_GIT_DESCRIBE "unknown"
#endif

namespace qsmc::cli {

std::string version_string() { return std::string("qsmc ") + QSMC_GIT_DESCRIBE; }

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw std::logic_error("row width does not match the columns");
  rows.push_back(std::move(row));
}

namespace {

void write_cell(std::ostream& os, const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) {
    if (std::isnan(*d)) os << "nan";
    else os << std::setprecision(std::numeric_limits<double>::max_digits10) << *d;
  } else if (const auto* i = std::get_if<long long>(&c)) {
    os << *i;
  } else {
    os << std::get<std::string>(c);
  }
}

nlohmann::json to_json(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return std::isfinite(*d) ? nlohmann::json(*d) : nlohmann::json(nullptr);
  if (const auto* i = std::get_if<long long>(&c)) return *i;
  return std::get<std::string>(c);
}

void write(std::ostream& os, const Table& t, const std::string& command, const Settings& s) {
  nlohmann::json manifest{{"version", version_string()}, {"command", command}, {"config", s.to_json()}};
  if (s.format == "json") {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : t.rows) {
      nlohmann::json row = nlohmann::json::array();
      for (const auto& c : r) row.push_back(to_json(c));
      rows.push_back(std::move(row));
    }
    nlohmann::json doc{{"manifest", manifest}, {"columns", t.columns}, {"rows", rows}, {"notes", t.notes}};
    os << doc.dump(2) << '\n';
    return;
  }
  os << "# " << version_string() << '\n';
  os << "# command: " << command << '\n';
  os << "# seed: " << s.seed << '\n';
  os << "# config: " << s.to_json().dump() << '\n';
  for (const auto& n : t.notes) os << "# " << n << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) os << ',';
      write_cell(os, r[i]);
    }
    os << '\n';
  }
}

}  // namespace

void emit(const Table& table, const std::string& command, const Settings& settings, std::ostream& out) {
  if (settings.output.empty() || settings.output == "-") {
    write(out, table, command, settings);
    out.flush();
    return;
  }
  std::ofstream f(settings.output);
  if (!f) throw IoError("cannot open '" + settings.output + "' for writing");
  write(f, table, command, settings);
  f.close();
  if (!f) throw IoError("failed writing '" + settings.output + "'");
}

}  // namespace qsmc::cli
