#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "econsim/presets.hpp"
#include "econsim/runner.hpp"
#include "econsim/scenario.hpp"
#include "econsim/trajectory.hpp"

using namespace econsim;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("econsim_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json small_aging(int n, int horizon) {
  json doc = preset_document("aging-pension");
  doc["population"]["size"] = n;
  doc["termination"]["horizon"] = horizon;
  return doc;
}

}  // namespace

TEST(Scenario, AgingPresetRoles) {
  const auto spec = load_scenario("aging-pension");
  const auto& r = spec.config.roles;
  EXPECT_EQ(r.individual, IndividualKind::olg);
  EXPECT_EQ(r.governments, std::vector<GovKind>{GovKind::pension});
  EXPECT_EQ(r.firm, FirmKind::perfect);
  EXPECT_EQ(r.bank, BankKind::non_profit);
}

TEST(Scenario, OptimalTaxPresetRoles) {
  const auto spec = load_scenario("optimal-tax");
  const auto& r = spec.config.roles;
  EXPECT_EQ(r.individual, IndividualKind::ramsey);
  EXPECT_EQ(r.governments, std::vector<GovKind>{GovKind::fiscal});
  EXPECT_EQ(r.firm, FirmKind::perfect);
  EXPECT_EQ(r.bank, BankKind::non_profit);
  EXPECT_EQ(spec.config.policies.fiscal.kind, "saez");
}

TEST(Scenario, EveryPresetParsesAndValidates) {
  for (const auto& p : preset_catalog()) {
    SCOPED_TRACE(p.name);
    const auto spec = parse_scenario_json(preset_document(p.name));
    EXPECT_TRUE(validate_config(spec.config).empty());
    EXPECT_EQ(spec.name, p.name);
  }
}

TEST(Scenario, MissingBankDefaultsWithWarning) {
  const json doc = {{"roles", {{"individual", "olg"}, {"government", "pension"}}}};
  const auto spec = parse_scenario_json(doc);
  EXPECT_EQ(spec.config.roles.bank, BankKind::non_profit);
  ASSERT_FALSE(spec.warnings.empty());
  EXPECT_NE(spec.warnings[0].find("roles.bank"), std::string::npos);
}

TEST(Scenario, ErrorsNameTheOffendingKey) {
  auto expect_error = [](const json& doc, const std::string& fragment) {
    try {
      parse_scenario_json(doc);
      ADD_FAILURE() << "accepted " << doc.dump();
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    }
  };
  expect_error({{"roles", {{"individual", "olg"}, {"bank", "shadow"}}}}, "roles.bank");
  expect_error({{"preferences", {{"betta", 0.9}}}}, "preferences.betta");
  expect_error({{"population", {{"size", "many"}}}}, "population.size");
  expect_error({{"roles", {{"individual", "ramsey"}, {"governments", {"pension"}}}}}, "pension requires OLG");
  expect_error({{"policies", {{"fiscal", "taylor"}}}}, "fiscal");
}

TEST(Scenario, ExtendsMergesOverPreset) {
  const json doc = {{"extends", "aging-pension"}, {"pension", {{"retirement_age", 70}}}};
  const auto spec = parse_scenario_json(resolve_extends(doc));
  EXPECT_EQ(spec.config.pension.retirement_age, 70);
  EXPECT_EQ(spec.config.pension.contribution_rate, 0.08);
  EXPECT_EQ(spec.config.roles.individual, IndividualKind::olg);
}

TEST(Scenario, SetJsonPath) {
  json doc = json::object();
  set_json_path(doc, "pension.retirement_age", 62);
  EXPECT_EQ(doc["pension"]["retirement_age"], 62);
}

TEST(Runner, SameSeedByteIdenticalFiles) {
  const auto spec = parse_scenario_json(small_aging(150, 25));
  const auto dir = scratch("identical");
  RunOptions a;
  a.out_dir = (dir / "a").string();
  a.panel = true;
  RunOptions b = a;
  b.out_dir = (dir / "b").string();
  b.threads = 3;
  const auto ra = run_episode(spec, 4, a);
  const auto rb = run_episode(spec, 4, b);
  ASSERT_EQ(ra.files.size(), 3u);
  for (std::size_t k = 0; k < ra.files.size(); ++k) EXPECT_EQ(slurp(ra.files[k]), slurp(rb.files[k])) << ra.files[k];
}

TEST(Runner, YearIsTerminationStep) {
  const auto spec = parse_scenario_json(small_aging(100, 12));
  RunOptions o;
  o.keep_rows = true;
  const auto r = run_episode(spec, 1, o);
  EXPECT_EQ(r.summary.year, 12);
  EXPECT_EQ(r.summary.reason, "horizon");
  EXPECT_EQ(r.rows.size(), 12u);
  EXPECT_EQ(*r.rows.back().cells[1], 12.0);
}

TEST(Runner, ConsumptionIsCumulative) {
  const auto spec = parse_scenario_json(small_aging(100, 8));
  RunOptions o;
  o.keep_rows = true;
  const auto r = run_episode(spec, 2, o);
  double c = 0.0;
  for (const auto& row : r.rows) c += *row.cells[5];
  EXPECT_DOUBLE_EQ(r.summary.consumption, c);
}

TEST(Runner, FiveRetirementAgesOrderDepletion) {
  std::vector<int> years;
  for (int age : {60, 62, 65, 67, 70}) {
    json doc = preset_document("aging-pension");
    doc["pension"]["retirement_age"] = age;
    const auto r = run_episode(parse_scenario_json(doc), 0);
    ASSERT_TRUE(r.summary.depletion_year) << age;
    years.push_back(*r.summary.depletion_year);
  }
  for (std::size_t k = 1; k < years.size(); ++k) EXPECT_GT(years[k], years[k - 1]);
}

TEST(Sweep, SingleCellMatchesEpisode) {
  const auto doc = small_aging(120, 15);
  const json grid = {{"pension.retirement_age", {65}}};
  const auto res = run_sweep(doc, grid, {7});
  ASSERT_EQ(res.rows.size(), 1u);
  ASSERT_TRUE(res.rows[0].summary);
  const auto direct = run_episode(parse_scenario_json(doc), 7).summary;
  EXPECT_EQ(to_json(*res.rows[0].summary).dump(), to_json(direct).dump());
}

TEST(Sweep, GridCountsRows) {
  const json grid = {{"pension.retirement_age", {60, 70}}, {"pension.contribution_rate", {0.06, 0.1}}};
  const auto res = run_sweep(small_aging(60, 5), grid, {0, 1, 2});
  EXPECT_EQ(res.rows.size(), 12u);
  EXPECT_EQ(res.cells.size(), 4u);
  for (const auto& c : res.cells) EXPECT_EQ(c.ok, 3u);
  const auto csv = sweep_rows_csv(res);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 13);
}

TEST(Sweep, FailingCellIsRecordedAndSweepContinues) {
  const json grid = {{"population.size", {-5, 40}}};
  const auto res = run_sweep(small_aging(60, 5), grid, {0, 1});
  ASSERT_EQ(res.rows.size(), 4u);
  EXPECT_FALSE(res.rows[0].summary);
  EXPECT_FALSE(res.rows[0].error.empty());
  EXPECT_TRUE(res.rows[2].summary);
  EXPECT_EQ(res.cells[0].failed, 2u);
  EXPECT_EQ(res.cells[1].ok, 2u);
}

TEST(Sweep, RowsIndependentOfCellOrder) {
  const auto doc = small_aging(80, 10);
  const auto fwd = run_sweep(doc, {{"pension.retirement_age", {60, 65, 70}}}, {0, 1});
  const auto rev = run_sweep(doc, {{"pension.retirement_age", {70, 65, 60}}}, {0, 1});
  for (const auto& a : fwd.rows)
    for (const auto& b : rev.rows)
      if (a.params == b.params && a.seed == b.seed)
        EXPECT_EQ(to_json(*a.summary).dump(), to_json(*b.summary).dump());
}

TEST(Sweep, RetirementGridOrderings) {
  const auto res = run_sweep(preset_document("aging-pension"), {{"pension.retirement_age", {60, 65, 70}}}, {0});
  ASSERT_EQ(res.rows.size(), 3u);
  for (const auto& r : res.rows) ASSERT_TRUE(r.summary && r.summary->depletion_year);
  for (std::size_t k = 1; k < 3; ++k) {
    const auto& lo = *res.rows[k - 1].summary;
    const auto& hi = *res.rows[k].summary;
    EXPECT_GT(*hi.depletion_year, *lo.depletion_year);
    EXPECT_LT(*hi.dependency_ratio, *lo.dependency_ratio);
    EXPECT_LT(hi.welfare, lo.welfare);
  }
}

TEST(Trajectory, HeaderMatchesPublishedColumns) {
  EXPECT_EQ(trajectory_csv_header(),
            "schema,t,N,young_share,gdp,consumption,avg_hours,price,inflation,wage,gini_income,gini_wealth,"
            "welfare,dependency_ratio,pension_fund,debt,deposit_rate,lending_rate,reward_fiscal,"
            "reward_central_bank,reward_pension");
}

TEST(Trajectory, EmptyRunWritesHeaderOnly) {
  const auto spec = parse_scenario_json(small_aging(50, 0));
  const auto dir = scratch("empty");
  RunOptions o;
  o.out_dir = dir.string();
  const auto r = run_episode(spec, 0, o);
  EXPECT_EQ(r.summary.year, 0);
  EXPECT_EQ(slurp(r.files[0]), trajectory_csv_header() + "\n");
}

TEST(Trajectory, CsvRoundTripIsByteIdentical) {
  const auto spec = parse_scenario_json(small_aging(100, 20));
  const auto dir = scratch("roundtrip");
  RunOptions o;
  o.out_dir = dir.string();
  const auto r = run_episode(spec, 3, o);
  const auto text = slurp(r.files[0]);
  std::istringstream in(text);
  const auto rows = parse_trajectory_csv(in);
  ASSERT_EQ(rows.size(), 20u);
  std::string again = trajectory_csv_header() + "\n";
  for (const auto& row : rows) again += to_csv_line(row) + "\n";
  EXPECT_EQ(again, text);
  EXPECT_EQ(*rows[0].cells[0], static_cast<double>(kTrajectorySchema));
}

TEST(Trajectory, JsonlRowPerStep) {
  const auto spec = parse_scenario_json(small_aging(100, 9));
  const auto dir = scratch("jsonl");
  RunOptions o;
  o.out_dir = dir.string();
  o.format = "jsonl";
  const auto r = run_episode(spec, 0, o);
  std::ifstream in(r.files[0]);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    const auto j = json::parse(line);
    EXPECT_EQ(j.size(), kTrajectoryColumns.size());
    ++n;
  }
  EXPECT_EQ(n, r.summary.year);
}

TEST(Trajectory, RamseyCellsLeftEmpty) {
  const auto s = reset(parse_scenario_json(preset_document("optimal-tax")).config, 0);
  const auto row = make_trajectory_row(s, Rewards{}, false);
  EXPECT_FALSE(row.cells[3]);
  EXPECT_FALSE(row.cells[13]);
  EXPECT_FALSE(row.cells[14]);
  const auto line = to_csv_line(row);
  EXPECT_EQ(std::count(line.begin(), line.end(), ','), static_cast<long>(kTrajectoryColumns.size() - 1));
}
