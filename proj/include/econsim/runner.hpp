#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "econsim/env.hpp"
#include "econsim/policies.hpp"
#include "econsim/presets.hpp"
#include "econsim/scenario.hpp"
#include "econsim/trajectory.hpp"

namespace econsim {

/// Episode totals. Consumption and GDP are summed over all steps; labor and
/// per-capita utility are step means; Gini values are from the last step.
struct EpisodeSummary {
  std::string name;
  std::uint64_t seed = 0;
  int year = 0;  // termination step
  std::string reason;
  double consumption = 0.0;
  double avg_labor = 0.0;
  double gdp = 0.0;
  double welfare = 0.0;  // mean per-capita utility
  double gini_income = 0.0;
  double gini_wealth = 0.0;
  std::optional<int> depletion_year;
  std::optional<double> dependency_ratio;  // step mean, OLG only
  int population = 0;
};

inline json to_json(const EpisodeSummary& s) {
  json j = {{"name", s.name},           {"seed", s.seed},
            {"year", s.year},           {"reason", s.reason},
            {"consumption", s.consumption}, {"avg_labor", s.avg_labor},
            {"gdp", s.gdp},             {"welfare", s.welfare},
            {"gini_income", s.gini_income}, {"gini_wealth", s.gini_wealth},
            {"population", s.population}};
  j["depletion_year"] = s.depletion_year ? json(*s.depletion_year) : json(nullptr);
  j["dependency_ratio"] = s.dependency_ratio ? json(*s.dependency_ratio) : json(nullptr);
  return j;
}

struct RunOptions {
  std::optional<std::string> out_dir;  // nothing is written when empty
  std::string format = "csv";
  bool panel = false;
  std::optional<unsigned> threads;
  std::string file_stem;  // defaults to "<name>_s<seed>"
  bool keep_rows = false;
};

struct EpisodeResult {
  EpisodeSummary summary;
  std::vector<TrajectoryRow> rows;  // filled when keep_rows
  std::vector<std::string> files;
};

inline std::string default_stem(const ScenarioSpec& spec, std::uint64_t seed) {
  return (spec.name.empty() ? std::string("scenario") : spec.name) + "_s" + std::to_string(seed);
}

inline EpisodeResult run_episode(const ScenarioSpec& spec, std::uint64_t seed, const RunOptions& opt = {}) {
  EconomyConfig cfg = spec.config;
  if (opt.threads) cfg.runtime.threads = *opt.threads;
  PolicySet policies(cfg);
  if (policies.any_external()) throw ConfigError("scenario binds external agents; drive it through the bridge");
  const bool olg = is_olg(cfg);

  EpisodeResult res;
  auto& sum = res.summary;
  sum.name = spec.name;
  sum.seed = seed;

  std::optional<TrajectoryWriter> traj;
  std::ofstream panel;
  std::string stem, dir;
  if (opt.out_dir) {
    dir = *opt.out_dir;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir + ": " + ec.message());
    stem = opt.file_stem.empty() ? default_stem(spec, seed) : opt.file_stem;
    const auto path = (std::filesystem::path(dir) / (stem + "." + opt.format)).string();
    traj.emplace(path, opt.format);
    res.files.push_back(path);
    if (opt.panel) {
      const auto pp = (std::filesystem::path(dir) / (stem + "_panel.csv")).string();
      panel.open(pp, std::ios::binary | std::ios::trunc);
      if (!(panel << panel_csv_header() << '\n')) throw std::runtime_error("cannot write " + pp);
      res.files.push_back(pp);
    }
  }

  MarketEnv env(cfg);
  env.reset(seed);
  int steps = 0;
  double hours_sum = 0.0, welfare_sum = 0.0, dep_sum = 0.0;
  std::string reason = check_termination(cfg, env.snapshot()).reason;
  bool done = check_termination(cfg, env.snapshot()).done;
  while (!done) {
    const auto actions = policies.decide(env.snapshot(), env.observations());
    const int t_before = env.snapshot().clock.t;
    auto r = env.step(actions);
    done = r.done;
    reason = r.reason;
    if (r.next.clock.t == t_before) break;  // step refused (degenerate market); nothing happened
    ++steps;
    const auto& s = r.next;
    const auto row = make_trajectory_row(s, r.rewards, olg);
    if (traj) traj->write(row);
    if (panel.is_open() && !(panel << panel_csv_lines(s, olg)))
      throw std::runtime_error("write failed: panel for " + stem);
    if (opt.keep_rows) res.rows.push_back(row);
    sum.consumption += s.macro.consumption;
    sum.gdp += s.macro.gdp;
    hours_sum += s.macro.avg_hours;
    if (!r.rewards.households.empty()) {
      double u = 0.0;
      for (double x : r.rewards.households) u += x;
      welfare_sum += u / static_cast<double>(r.rewards.households.size());
    }
    dep_sum += s.macro.dependency_ratio;
  }
  if (traj) traj->close();

  const auto& last = env.snapshot();
  sum.year = last.clock.t;
  sum.reason = reason;
  if (steps > 0) {
    sum.avg_labor = hours_sum / steps;
    sum.welfare = welfare_sum / steps;
    if (olg) sum.dependency_ratio = dep_sum / steps;
  }
  sum.gini_income = last.macro.gini_income;
  sum.gini_wealth = last.macro.gini_wealth;
  sum.depletion_year = last.depletion_year;
  sum.population = static_cast<int>(last.households.size());

  if (opt.out_dir) {
    const auto sp = (std::filesystem::path(dir) / (stem + "_summary.json")).string();
    std::ofstream out(sp, std::ios::binary | std::ios::trunc);
    if (!(out << to_json(sum).dump(2) << '\n')) throw std::runtime_error("write failed: " + sp);
    res.files.push_back(sp);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepRow {
  std::size_t cell = 0;
  json params;  // path -> value for this cell
  std::uint64_t seed = 0;
  std::optional<EpisodeSummary> summary;
  std::string error;
};

struct SweepCell {
  std::size_t cell = 0;
  json params;
  std::size_t ok = 0;
  std::size_t failed = 0;
  std::map<std::string, double> mean;  // over successful seeds
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SweepCell> cells;
};

/// Expands {"a.b": [..], "c": [..]} into the cross product, first key
/// varying slowest (keys in document order).
inline std::vector<json> expand_grid(const json& grid) {
  if (!grid.is_object()) throw ScenarioError("grid: expected an object of path -> list");
  std::vector<json> cells{json::object()};
  for (const auto& [path, values] : grid.items()) {
    if (!values.is_array() || values.empty())
      throw ScenarioError("grid." + path + ": expected a non-empty list");
    std::vector<json> next;
    for (const auto& c : cells)
      for (const auto& v : values) {
        json n = c;
        n[path] = v;
        next.push_back(std::move(n));
      }
    cells = std::move(next);
  }
  return cells;
}

/// Runs every (cell, seed) pair. A failing cell is recorded and the sweep
/// moves on.
inline SweepResult run_sweep(const json& base_doc, const json& grid, const std::vector<std::uint64_t>& seeds,
                             const RunOptions& opt = {}) {
  SweepResult out;
  const auto cells = expand_grid(grid);
  const json base = resolve_extends(base_doc);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    SweepCell agg{c, cells[c], 0, 0, {}};
    std::optional<ScenarioSpec> spec;
    std::string cell_error;
    try {
      json doc = base;
      for (const auto& [path, v] : cells[c].items()) set_json_path(doc, path, v);
      spec = parse_scenario_json(doc);
    } catch (const std::exception& e) {
      cell_error = e.what();
    }
    for (auto seed : seeds) {
      SweepRow row{c, cells[c], seed, std::nullopt, cell_error};
      if (spec) {
        try {
          RunOptions o = opt;
          if (o.out_dir) o.file_stem = default_stem(*spec, seed) + "_c" + std::to_string(c);
          row.summary = run_episode(*spec, seed, o).summary;
        } catch (const std::exception& e) {
          row.error = e.what();
        }
      }
      if (row.summary) {
        ++agg.ok;
        const auto& s = *row.summary;
        agg.mean["year"] += s.year;
        agg.mean["consumption"] += s.consumption;
        agg.mean["avg_labor"] += s.avg_labor;
        agg.mean["gdp"] += s.gdp;
        agg.mean["welfare"] += s.welfare;
        agg.mean["gini_income"] += s.gini_income;
        agg.mean["gini_wealth"] += s.gini_wealth;
        if (s.depletion_year) {
          agg.mean["depletion_year"] += *s.depletion_year;
          agg.mean["depleted_runs"] += 1.0;
        }
      } else {
        ++agg.failed;
      }
      out.rows.push_back(std::move(row));
    }
    if (agg.ok) {
      const double depleted = agg.mean.count("depleted_runs") ? agg.mean["depleted_runs"] : 0.0;
      for (auto& [k, v] : agg.mean) {
        if (k == "depleted_runs") continue;
        v /= k == "depletion_year" ? depleted : static_cast<double>(agg.ok);
      }
    }
    out.cells.push_back(std::move(agg));
  }
  return out;
}

inline std::string sweep_rows_csv(const SweepResult& r) {
  std::string s = "cell,params,seed,year,reason,consumption,avg_labor,gdp,welfare,gini_income,gini_wealth,"
                  "depletion_year,error\n";
  for (const auto& row : r.rows) {
    std::string params = row.params.dump();
    for (auto& ch : params)
      if (ch == ',') ch = ';';
    s += std::to_string(row.cell) + ',' + params + ',' + std::to_string(row.seed) + ',';
    if (row.summary) {
      const auto& x = *row.summary;
      s += std::to_string(x.year) + ',' + x.reason;
      for (double v : {x.consumption, x.avg_labor, x.gdp, x.welfare, x.gini_income, x.gini_wealth})
        s += ',' + format_number(v);
      s += ',';
      if (x.depletion_year) s += std::to_string(*x.depletion_year);
      s += ",\n";
    } else {
      std::string err = row.error;
      for (auto& ch : err)
        if (ch == ',' || ch == '\n') ch = ' ';
      s += ",,,,,,,,," + err + '\n';
    }
  }
  return s;
}

}  // namespace econsim
