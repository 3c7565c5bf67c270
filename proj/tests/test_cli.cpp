#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome run(const std::string& args) {
  const std::string cmd = std::string("\"") + ECONSIM_CLI + "\" " + args + " 2>&1";
  Outcome o;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return o;
  std::array<char, 4096> buf;
  while (fgets(buf.data(), static_cast<int>(buf.size()), p)) o.out += buf.data();
  const int st = pclose(p);
  o.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return o;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("econsim_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Cli, ValidatePreset) {
  const auto o = run("validate aging-pension");
  EXPECT_EQ(o.code, 0) << o.out;
  EXPECT_NE(o.out.find("ok: aging-pension"), std::string::npos) << o.out;
}

TEST(Cli, PresetsList) {
  const auto o = run("presets list");
  EXPECT_EQ(o.code, 0);
  for (const char* n : {"aging-pension", "optimal-tax", "real-data", "monopolistic"})
    EXPECT_NE(o.out.find(n), std::string::npos) << n;
}

TEST(Cli, RunWritesFiles) {
  const auto dir = scratch("run");
  const auto doc = dir / "small.json";
  std::ofstream(doc) << R"({"extends": "aging-pension", "population": {"size": 80}, "termination": {"horizon": 6}})";
  const auto o = run("run " + doc.string() + " --seed 3 --out " + (dir / "out").string());
  EXPECT_EQ(o.code, 0) << o.out;
  EXPECT_TRUE(fs::exists(dir / "out" / "aging-pension_s3.csv")) << o.out;
  EXPECT_TRUE(fs::exists(dir / "out" / "aging-pension_s3_summary.json"));
}

TEST(Cli, BadConfigExitsTwo) {
  const auto dir = scratch("bad");
  const auto doc = dir / "bad.json";
  std::ofstream(doc) << R"({"roles": {"individual": "ramsey", "governments": ["pension"]}})";
  const auto o = run("validate " + doc.string());
  EXPECT_EQ(o.code, 2) << o.out;
  EXPECT_NE(o.out.find("pension requires OLG"), std::string::npos) << o.out;
  EXPECT_EQ(run("run no-such-preset").code, 2);
}

TEST(Cli, SweepWritesRowsAndCells) {
  const auto dir = scratch("sweep");
  std::ofstream(dir / "grid.json") << R"({"pension.retirement_age": [60, 70]})";
  std::ofstream(dir / "s.json") << R"({"extends": "aging-pension", "population": {"size": 60}, "termination": {"horizon": 5}})";
  const auto o = run("sweep " + (dir / "s.json").string() + " --grid " + (dir / "grid.json").string() + " --seeds 2 --out " +
                     (dir / "out").string());
  EXPECT_EQ(o.code, 0) << o.out;
  std::ifstream rows(dir / "out" / "sweep_rows.csv");
  std::string line;
  int n = 0;
  while (std::getline(rows, line)) ++n;
  EXPECT_EQ(n, 5);
  EXPECT_TRUE(fs::exists(dir / "out" / "sweep_cells.json"));
}
