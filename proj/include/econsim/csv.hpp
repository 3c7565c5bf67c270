#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "econsim/households.hpp"
#include "econsim/taxes.hpp"
#include "econsim/types.hpp"

namespace econsim {

/// Plain comma-separated table; no quoting (every field here is numeric or a
/// bare identifier).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t k = 0; k < header.size(); ++k)
      if (header[k] == name) return k;
    throw ConfigError("csv: missing column '" + name + "'");
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline CsvTable parse_csv(std::istream& in, const std::string& source = "<csv>") {
  CsvTable t;
  std::string line;
  bool have_header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto cells = split_csv_line(line);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size())
      throw ConfigError(source + ": line " + std::to_string(lineno) + " has " +
                        std::to_string(cells.size()) + " fields, expected " +
                        std::to_string(t.header.size()));
    t.rows.push_back(std::move(cells));
  }
  if (!have_header) throw ConfigError(source + ": missing header");
  return t;
}

inline CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return parse_csv(in, path);
}

inline double parse_number(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || !std::isfinite(v))
    throw ConfigError(where + ": not a finite number: '" + s + "'");
  return v;
}

/// Initial population rows: age, education, savings, risky.
inline std::vector<HouseholdState> population_from_csv(const CsvTable& t,
                                                       const std::string& source = "<csv>") {
  const auto ca = t.column("age"), ce = t.column("education"), cs = t.column("savings"),
             cr = t.column("risky");
  std::vector<HouseholdState> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto where = source + " row " + std::to_string(i);
    const auto& r = t.rows[i];
    HouseholdState h;
    h.id = i;
    const double age = parse_number(r[ca], where);
    if (age < 0.0 || age != std::floor(age)) throw ConfigError(where + ": age must be a whole number >= 0");
    h.age = static_cast<int>(age);
    h.education = parse_number(r[ce], where);
    h.savings = parse_number(r[cs], where);
    h.risky = parse_number(r[cr], where);
    if (!(h.education > 0.0)) throw ConfigError(where + ": education must be > 0");
    if (h.savings < 0.0 || h.risky < 0.0) throw ConfigError(where + ": assets must be >= 0");
    out.push_back(h);
  }
  return out;
}

/// Bracket rows: lower, rate.
inline BracketSchedule brackets_from_csv(const CsvTable& t) {
  const auto cl = t.column("lower"), cr = t.column("rate");
  std::vector<TaxBracket> b;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto where = "brackets row " + std::to_string(i);
    b.push_back({parse_number(t.rows[i][cl], where), parse_number(t.rows[i][cr], where)});
  }
  return BracketSchedule(std::move(b));
}

/// One value per row (first column), e.g. a reference wealth sample.
inline std::vector<double> values_from_csv(const CsvTable& t) {
  std::vector<double> v;
  v.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    v.push_back(parse_number(t.rows[i].at(0), "values row " + std::to_string(i)));
  return v;
}

/// 17 significant digits, so the text reads back to the same double.
inline std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace econsim
