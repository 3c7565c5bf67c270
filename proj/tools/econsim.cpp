// econsim: run scenarios, sweeps and presets from the command line.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "econsim/econsim.hpp"

namespace {

using econsim::json;

std::string output_dir(const std::string& flag, const econsim::ScenarioSpec& spec) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("ECONSIM_OUT_DIR"); env && *env) return env;
  return spec.output.dir;
}

void print_warnings(const econsim::ScenarioSpec& spec) {
  for (const auto& w : spec.warnings) std::cerr << "warning: " << w << '\n';
}

std::string roles_line(const econsim::EconomyConfig& c) {
  std::string govs;
  for (auto g : c.roles.governments) govs += (govs.empty() ? "" : "+") + std::string(econsim::to_string(g));
  return "individual=" + std::string(econsim::to_string(c.roles.individual)) +
         " governments=" + (govs.empty() ? "none" : govs) + " bank=" + std::string(econsim::to_string(c.roles.bank)) +
         " firm=" + std::string(econsim::to_string(c.roles.firm)) + " firms=" + std::to_string(econsim::firm_count(c));
}

int cmd_run(const std::string& scenario, std::optional<std::uint64_t> seed, const std::string& out,
            const std::string& format, bool panel, std::optional<unsigned> threads) {
  const auto spec = econsim::load_scenario(scenario);
  print_warnings(spec);
  econsim::RunOptions opt;
  opt.out_dir = output_dir(out, spec);
  opt.format = format.empty() ? spec.output.format : format;
  opt.panel = panel || spec.output.panel;
  opt.threads = threads;
  const auto seeds = seed ? std::vector<std::uint64_t>{*seed} : spec.seeds;
  for (auto s : seeds) {
    const auto r = econsim::run_episode(spec, s, opt);
    std::cout << econsim::to_json(r.summary).dump() << '\n';
    for (const auto& f : r.files) std::cerr << "wrote " << f << '\n';
  }
  return 0;
}

int cmd_sweep(const std::string& scenario, const std::string& grid_path, std::optional<unsigned> nseeds,
              const std::string& out, std::optional<unsigned> threads) {
  const json doc = econsim::load_scenario_document(scenario);
  const auto spec = econsim::parse_scenario_json(doc);
  print_warnings(spec);
  std::ifstream gin(grid_path);
  if (!gin) throw econsim::ConfigError("cannot open grid " + grid_path);
  json grid;
  try {
    grid = json::parse(gin, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw econsim::ConfigError(grid_path + ": " + e.what());
  }
  std::vector<std::uint64_t> seeds = spec.seeds;
  if (nseeds) {
    seeds.clear();
    for (unsigned k = 0; k < *nseeds; ++k) seeds.push_back(k);
  }
  econsim::RunOptions opt;
  opt.out_dir = output_dir(out, spec);
  opt.threads = threads;
  const auto res = econsim::run_sweep(doc, grid, seeds, opt);

  const auto dir = std::filesystem::path(*opt.out_dir);
  const auto rows_path = (dir / "sweep_rows.csv").string();
  std::ofstream rows(rows_path, std::ios::binary | std::ios::trunc);
  if (!(rows << econsim::sweep_rows_csv(res))) throw std::runtime_error("write failed: " + rows_path);
  json cells = json::array();
  int failures = 0;
  for (const auto& c : res.cells) {
    cells.push_back({{"cell", c.cell}, {"params", c.params}, {"ok", c.ok}, {"failed", c.failed}, {"mean", c.mean}});
    failures += static_cast<int>(c.failed);
  }
  const auto cells_path = (dir / "sweep_cells.json").string();
  std::ofstream cj(cells_path, std::ios::binary | std::ios::trunc);
  if (!(cj << cells.dump(2) << '\n')) throw std::runtime_error("write failed: " + cells_path);
  std::cout << cells.dump(2) << '\n';
  for (const auto& r : res.rows)
    if (!r.error.empty()) std::cerr << "cell " << r.cell << " seed " << r.seed << ": " << r.error << '\n';
  std::cerr << "wrote " << rows_path << " and " << cells_path << '\n';
  return failures ? 1 : 0;
}

int cmd_validate(const std::string& scenario) {
  const auto spec = econsim::load_scenario(scenario);
  print_warnings(spec);
  std::cout << "ok: " << (spec.name.empty() ? scenario : spec.name) << '\n'
            << roles_line(spec.config) << '\n';
  return 0;
}

int cmd_presets(const std::string& action, const std::string& arg) {
  if (action == "list") {
    for (const auto& p : econsim::preset_catalog()) std::cout << p.name << "\t" << p.summary << '\n';
    return 0;
  }
  if (action == "show") {
    std::cout << econsim::preset_document(arg).dump(2) << '\n';
    return 0;
  }
  // export
  std::filesystem::create_directories(arg);
  for (const auto& p : econsim::preset_catalog()) {
    const auto path = (std::filesystem::path(arg) / (p.name + ".json")).string();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!(out << econsim::preset_document(p.name).dump(2) << '\n')) throw std::runtime_error("write failed: " + path);
    std::cerr << "wrote " << path << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"econsim: multi-agent economy simulator"};
  app.require_subcommand(1);

  std::string scenario, out, format, grid;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads, nseeds;
  bool panel = false;

  auto* run = app.add_subcommand("run", "run one episode per seed");
  run->add_option("scenario", scenario, "scenario file or preset name")->required();
  run->add_option("--seed", seed, "single seed (default: the scenario's seed list)");
  run->add_option("--out", out, "output directory (default: $ECONSIM_OUT_DIR, then output.dir)");
  run->add_option("--format", format, "trajectory format")->check(CLI::IsMember({"csv", "jsonl"}));
  run->add_flag("--panel", panel, "also write the per-household panel");
  run->add_option("--threads", threads, "worker threads");

  auto* sweep = app.add_subcommand("sweep", "run a parameter grid");
  sweep->add_option("scenario", scenario, "scenario file or preset name")->required();
  sweep->add_option("--grid", grid, "grid file: JSON object of dotted path -> list of values")->required();
  sweep->add_option("--seeds", nseeds, "use seeds 0..K-1 (default: the scenario's seed list)");
  sweep->add_option("--out", out, "output directory");
  sweep->add_option("--threads", threads, "worker threads");

  auto* validate = app.add_subcommand("validate", "check a scenario without running it");
  validate->add_option("scenario", scenario, "scenario file or preset name")->required();

  std::string preset_action = "list", preset_arg;
  auto* presets = app.add_subcommand("presets", "bundled scenarios");
  presets->add_option("action", preset_action, "list | show NAME | export DIR")
      ->check(CLI::IsMember({"list", "show", "export"}));
  presets->add_option("arg", preset_arg, "preset name or directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(scenario, seed, out, format, panel, threads);
    if (*sweep) return cmd_sweep(scenario, grid, nseeds, out, threads);
    if (*validate) return cmd_validate(scenario);
    if (*presets) {
      if (preset_action != "list" && preset_arg.empty()) {
        std::cerr << "error: presets " << preset_action << " needs an argument\n";
        return 2;
      }
      return cmd_presets(preset_action, preset_arg);
    }
  } catch (const econsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
