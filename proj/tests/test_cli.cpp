#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace frfvib::cli;

namespace {

fs::path preset(const std::string& name) { return fs::path(FRFVIB_CONFIG_DIR) / (name + ".json"); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root_ = fs::temp_directory_path() / ("frfvib_cli_" + std::string(info->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  fs::path write_config(const std::string& base, const std::function<void(json&)>& edit) {
    json j = json::parse(slurp(preset(base)));
    edit(j);
    const fs::path p = root_ / (base + "-edited.json");
    std::ofstream(p) << j.dump(2);
    return p;
  }

  Options opts(const fs::path& config, const std::string& out) {
    Options o;
    o.config = config.string();
    o.out = (root_ / out).string();
    o.jobs = 1;
    o.quiet = true;
    return o;
  }

  json manifest(const std::string& out) { return json::parse(slurp(root_ / out / "manifest.json")); }

  fs::path root_;
  std::ostringstream log_;
};

std::vector<std::vector<double>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_F(CliTest, FrfLinearColumnsAreAmplitudeConstant) {
  auto o = opts(preset("duffing-linear"), "frf");
  o.grid_override = "1:6:2.5,4:8:1";
  ASSERT_EQ(cmd_frf(o, log_), kOk) << log_.str();
  const auto rows = read_csv(root_ / "frf" / "frf_x1.csv");
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t j = 1; j < rows[0].size(); ++j) {
    for (const auto& r : rows) EXPECT_NEAR(r[j], rows[0][j], 0.005 * rows[0][j]);
  }
  EXPECT_TRUE(fs::exists(root_ / "frf" / "frf_x2.csv"));
}

TEST_F(CliTest, FrfNonlinearPeakMoves) {
  auto o = opts(preset("duffing-nonlinear-100"), "frf");
  o.grid_override = "0.5:6:5.5,5:9:0.5";
  ASSERT_EQ(cmd_frf(o, log_), kOk) << log_.str();
  const auto rows = read_csv(root_ / "frf" / "frf_x1.csv");
  auto argmax = [](const std::vector<double>& r) {
    return std::max_element(r.begin() + 1, r.end()) - r.begin();
  };
  EXPECT_GT(argmax(rows[1]), argmax(rows[0]));
}

TEST_F(CliTest, RerunsAreByteIdenticalAcrossJobCounts) {
  auto a = opts(preset("duffing-nonlinear-36"), "a");
  a.grid_override = "1:6:2.5,4:8:1";
  auto b = a;
  b.out = (root_ / "b").string();
  b.jobs = 3;
  ASSERT_EQ(cmd_frf(a, log_), kOk);
  ASSERT_EQ(cmd_frf(b, log_), kOk);
  for (const char* f : {"frf_x1.csv", "frf_x2.csv"}) {
    EXPECT_EQ(slurp(root_ / "a" / f), slurp(root_ / "b" / f)) << f;
  }
}

TEST_F(CliTest, ManifestListsEveryOutputOnce) {
  auto o = opts(preset("duffing-nonlinear-36"), "m");
  o.grid_override = "1:6:2.5,4:8:1";
  o.seed = 99;
  ASSERT_EQ(cmd_frf(o, log_), kOk);
  const json m = manifest("m");
  EXPECT_EQ(m["status"], "ok");
  EXPECT_EQ(m["exit_code"], 0);
  EXPECT_EQ(m["seed"], 99);
  EXPECT_TRUE(m.contains("version"));
  EXPECT_TRUE(m.contains("config"));
  EXPECT_TRUE(m.contains("wall_seconds"));
  std::map<std::string, int> seen;
  for (const auto& e : m["outputs"]) {
    ++seen[e["file"].get<std::string>()];
    EXPECT_EQ(e["sha256"].get<std::string>().size(), 64u);
    EXPECT_EQ(e["bytes"].get<std::uintmax_t>(), fs::file_size(root_ / "m" / e["file"].get<std::string>()));
  }
  for (const auto& entry : fs::directory_iterator(root_ / "m")) {
    const auto name = entry.path().filename().string();
    if (name == "manifest.json") continue;
    EXPECT_EQ(seen[name], 1) << name;
  }
}

TEST_F(CliTest, MissingConfigIsConfigError) {
  auto o = opts(root_ / "missing.json", "x");
  EXPECT_EQ(cmd_frf(o, log_), kConfigError);
  EXPECT_NE(log_.str().find("error"), std::string::npos);
}

TEST_F(CliTest, MisspelledKeyFailsBeforeSimulation) {
  const auto cfg = write_config("duffing-nonlinear-36", [](json& j) {
    j["integrator"]["stepsize"] = j["integrator"]["step_h"];
    j["integrator"].erase("step_h");
  });
  auto o = opts(cfg, "bad");
  EXPECT_EQ(cmd_tune(o, log_), kConfigError);
  EXPECT_FALSE(fs::exists(root_ / "bad" / "tuning_history.csv"));
  EXPECT_NE(log_.str().find("stepsize"), std::string::npos);
}

TEST_F(CliTest, BadGridOverrideIsConfigError) {
  auto o = opts(preset("duffing-linear"), "g");
  o.grid_override = "1:6";
  EXPECT_EQ(cmd_frf(o, log_), kConfigError);
}

TEST_F(CliTest, TuneHugeToleranceConvergesAtIterationZero) {
  const auto cfg = write_config("duffing-nonlinear-36", [](json& j) { j["adaptation"]["eps_tol"] = 1e9; });
  auto o = opts(cfg, "t");
  o.grid_override = "1:6:2.5,4:8:1";
  ASSERT_EQ(cmd_tune(o, log_), kOk) << log_.str();
  const auto rows = read_csv(root_ / "t" / "tuning_history.csv");
  EXPECT_EQ(rows.size(), 1u);
  const json g = json::parse(slurp(root_ / "t" / "gains.json"));
  EXPECT_TRUE(g.contains("theta_p"));
  EXPECT_TRUE(fs::exists(root_ / "t" / "tuning_history.json"));
  EXPECT_EQ(manifest("t")["status"], "converged");
}

TEST_F(CliTest, TuneMaxIterationsExitCode) {
  const auto cfg = write_config("duffing-nonlinear-36", [](json& j) { j["adaptation"]["max_iterations"] = 2; });
  auto o = opts(cfg, "t");
  EXPECT_EQ(cmd_tune(o, log_), kMaxIterations);
  EXPECT_EQ(read_csv(root_ / "t" / "tuning_history.csv").size(), 2u);
  EXPECT_EQ(manifest("t")["exit_code"], kMaxIterations);
}

TEST_F(CliTest, TuneSweepFailureExitCode) {
  // Too few periods to ever settle, so every cell fails.
  const auto cfg = write_config("duffing-nonlinear-36", [](json& j) { j["integrator"]["max_periods"] = 12; });
  auto o = opts(cfg, "t");
  o.grid_override = "1:6:2.5,4:8:1";
  EXPECT_EQ(cmd_tune(o, log_), kSweepFailure) << log_.str();
  EXPECT_EQ(manifest("t")["status"], "sweep-failure");
}

TEST_F(CliTest, FrfDivergentGainsExitCode) {
  std::ofstream(root_ / "unstable.json") << R"({"theta_p": 0, "theta_d": -5})";
  auto o = opts(preset("duffing-linear"), "d");
  o.grid_override = "1:1:1,6:6:1";
  o.gains = (root_ / "unstable.json").string();
  EXPECT_EQ(cmd_frf(o, log_), kDivergence) << log_.str();
}

TEST_F(CliTest, SimulateControlledBelowUncontrolled) {
  std::ofstream(root_ / "gains.json") << R"({"theta_p": 7.1, "theta_d": 2.6})";
  auto o = opts(preset("duffing-nonlinear-36"), "s");
  o.gains = (root_ / "gains.json").string();
  ASSERT_EQ(cmd_simulate(o, log_), kOk) << log_.str();
  auto peak = [](const std::vector<std::vector<double>>& rows) {
    double p = 0.0;
    for (std::size_t i = rows.size() / 2; i < rows.size(); ++i) p = std::max(p, std::abs(rows[i][1]));
    return p;
  };
  const auto unc = read_csv(root_ / "s" / "trajectory_uncontrolled.csv");
  const auto ctl = read_csv(root_ / "s" / "trajectory_controlled.csv");
  EXPECT_LT(peak(ctl), peak(unc));
  // Controlled file carries the control signal next to the excitation.
  EXPECT_GT(ctl[0].size(), 3u);
}

TEST_F(CliTest, SimulateZeroExcitationIsFlat) {
  const auto cfg = write_config("duffing-linear", [](json& j) {
    j["simulate"]["amplitude"] = 0.0;
    j["simulate"]["duration"] = 2.0;
  });
  auto o = opts(cfg, "z");
  const int rc = cmd_simulate(o, log_);
  if (rc == kConfigError) GTEST_SKIP() << "zero amplitude rejected by schema: " << log_.str();
  ASSERT_EQ(rc, kOk) << log_.str();
  for (const auto& r : read_csv(root_ / "z" / "trajectory_uncontrolled.csv")) {
    for (std::size_t c = 1; c < r.size(); ++c) EXPECT_EQ(r[c], 0.0);
  }
}

TEST_F(CliTest, ConvergeCheckDuffing) {
  auto o = opts(preset("duffing-nonlinear-36"), "c");
  ASSERT_EQ(cmd_converge_check(o, log_), kOk) << log_.str();
  const json r = json::parse(slurp(root_ / "c" / "convergence_report.json"));
  EXPECT_LT(r["multi_ic"]["terminal_max_distance"].get<double>(), 1e-3);
  EXPECT_EQ(r["jacobian_transformed"]["verdict"], "indefinite");
}

TEST_F(CliTest, ConvergeCheckSatelliteEnergy) {
  auto o = opts(preset("satellite-rw"), "e");
  ASSERT_EQ(cmd_converge_check(o, log_), kOk) << log_.str();
  EXPECT_TRUE(fs::exists(root_ / "e" / "energy_report.json"));
}

TEST_F(CliTest, RunParsesArguments) {
  std::vector<std::string> args{"frfvib", "frf", "--config", preset("duffing-linear").string(), "--out",
                                (root_ / "r").string(), "--grid-override", "1:1:1,6:6:1", "--jobs", "1",
                                "--no-warm-start", "--quiet"};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  EXPECT_EQ(run(static_cast<int>(argv.size()), argv.data(), log_), kOk) << log_.str();
  EXPECT_FALSE(manifest("r")["warm_start"].get<bool>());
  std::vector<std::string> bad{"frfvib", "explode"};
  std::vector<char*> bargv;
  for (auto& a : bad) bargv.push_back(a.data());
  EXPECT_EQ(run(static_cast<int>(bargv.size()), bargv.data(), log_), kUsage);
}
