#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "econsim/csv.hpp"
#include "econsim/state.hpp"

namespace econsim {

// Step-level record. Bump kTrajectorySchema whenever a column changes.
inline constexpr int kTrajectorySchema = 1;

inline constexpr std::array<const char*, 21> kTrajectoryColumns = {
    "schema",      "t",          "N",          "young_share",     "gdp",
    "consumption", "avg_hours",  "price",      "inflation",       "wage",
    "gini_income", "gini_wealth", "welfare",   "dependency_ratio", "pension_fund",
    "debt",        "deposit_rate", "lending_rate", "reward_fiscal", "reward_central_bank",
    "reward_pension"};

/// One row per completed step; empty cells mark roles that are not active
/// (and non-finite values such as a dependency ratio with no young).
struct TrajectoryRow {
  std::array<std::optional<double>, kTrajectoryColumns.size()> cells{};

  bool operator==(const TrajectoryRow&) const = default;
};

inline TrajectoryRow make_trajectory_row(const EconomySnapshot& s, const Rewards& r, bool olg) {
  const auto& m = s.macro;
  TrajectoryRow row;
  auto& c = row.cells;
  std::size_t k = 0;
  c[k++] = kTrajectorySchema;
  c[k++] = s.clock.t;
  c[k++] = static_cast<double>(s.households.size());
  c[k++] = olg ? std::optional<double>(m.young_share) : std::nullopt;
  c[k++] = m.gdp;
  c[k++] = m.consumption;
  c[k++] = m.avg_hours;
  c[k++] = m.price;
  c[k++] = m.inflation;
  c[k++] = m.wage;
  c[k++] = m.gini_income;
  c[k++] = m.gini_wealth;
  c[k++] = m.welfare;
  c[k++] = olg ? std::optional<double>(m.dependency_ratio) : std::nullopt;
  c[k++] = s.pension ? std::optional<double>(s.pension->fund) : std::nullopt;
  c[k++] = s.fiscal.debt;
  c[k++] = m.deposit_rate;
  c[k++] = m.lending_rate;
  c[k++] = r.fiscal;
  c[k++] = r.central_bank;
  c[k++] = r.pension;
  return row;
}

inline std::string trajectory_csv_header() {
  std::string h;
  for (std::size_t k = 0; k < kTrajectoryColumns.size(); ++k) {
    if (k) h += ',';
    h += kTrajectoryColumns[k];
  }
  return h;
}

inline std::string to_csv_line(const TrajectoryRow& r) {
  std::string line;
  for (std::size_t k = 0; k < r.cells.size(); ++k) {
    if (k) line += ',';
    if (r.cells[k] && std::isfinite(*r.cells[k])) line += format_number(*r.cells[k]);
  }
  return line;
}

inline std::string to_jsonl_line(const TrajectoryRow& r) {
  // Built by hand so numbers keep 17 significant digits.
  std::string line = "{";
  for (std::size_t k = 0; k < r.cells.size(); ++k) {
    if (k) line += ',';
    line += '"';
    line += kTrajectoryColumns[k];
    line += "\":";
    if (!r.cells[k]) line += "null";
    else if (std::isfinite(*r.cells[k])) line += format_number(*r.cells[k]);
    else line += "null";
  }
  line += '}';
  return line;
}

inline std::vector<TrajectoryRow> parse_trajectory_csv(std::istream& in) {
  const auto t = parse_csv(in, "trajectory");
  if (t.header.size() != kTrajectoryColumns.size())
    throw ConfigError("trajectory: unexpected column count");
  for (std::size_t k = 0; k < t.header.size(); ++k)
    if (t.header[k] != kTrajectoryColumns[k])
      throw ConfigError("trajectory: column " + std::to_string(k) + " is '" + t.header[k] + "'");
  std::vector<TrajectoryRow> rows;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    TrajectoryRow r;
    for (std::size_t k = 0; k < r.cells.size(); ++k)
      if (!t.rows[i][k].empty()) r.cells[k] = parse_number(t.rows[i][k], "trajectory row " + std::to_string(i));
    rows.push_back(r);
  }
  return rows;
}

/// Streams rows to disk. Each row is formatted in full before it is written,
/// and every write is checked.
class TrajectoryWriter {
 public:
  TrajectoryWriter(const std::string& path, std::string format) : path_(path), format_(std::move(format)) {
    if (format_ != "csv" && format_ != "jsonl") throw ConfigError("unknown trajectory format '" + format_ + "'");
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw std::runtime_error("cannot write " + path);
    if (format_ == "csv") put(trajectory_csv_header());
  }

  void write(const TrajectoryRow& r) { put(format_ == "csv" ? to_csv_line(r) : to_jsonl_line(r)); }

  void close() {
    out_.close();
    if (out_.fail()) throw std::runtime_error("write failed: " + path_);
  }

 private:
  void put(const std::string& line) {
    out_ << line << '\n';
    if (!out_) throw std::runtime_error("write failed: " + path_);
  }

  std::string path_;
  std::string format_;
  std::ofstream out_;
};

inline constexpr std::array<const char*, 12> kPanelColumns = {
    "t", "id", "age", "savings", "risky", "education", "consumption", "hours", "income", "utility",
    "retired", "insolvent"};

inline std::string panel_csv_header() {
  std::string h;
  for (std::size_t k = 0; k < kPanelColumns.size(); ++k) {
    if (k) h += ',';
    h += kPanelColumns[k];
  }
  return h;
}

inline std::string panel_csv_lines(const EconomySnapshot& s, bool olg) {
  std::string out;
  for (const auto& h : s.households) {
    out += std::to_string(s.clock.t) + ',' + std::to_string(h.id) + ',';
    if (olg && h.age) out += std::to_string(*h.age);
    for (double v : {h.savings, h.risky, h.education, h.consumption, h.hours, h.income, h.utility}) {
      out += ',';
      out += format_number(v);
    }
    out += h.retired ? ",1" : ",0";
    out += h.insolvent ? ",1\n" : ",0\n";
  }
  return out;
}

}  // namespace econsim
