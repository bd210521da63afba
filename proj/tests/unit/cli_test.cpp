#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <nlohmann/json.hpp>

#include "test_support.hpp"

namespace fs = std::filesystem;
using radsim::testing::data_path;
using radsim::testing::slurp;

namespace {

struct Result {
  int code;
  std::string output;
};

Result cli(const std::string& args) {
  const std::string cmd = std::string(RADSIM_CLI) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, ""};
  std::string out;
  char buf[512];
  while (fgets(buf, sizeof buf, pipe)) out += buf;
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("radsim_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string inputs() const {
    return "--building " + data_path("two_zone_23x12.json") + " --weather " + data_path("weather_24h.csv");
  }
  std::string out(const std::string& sub = "out") const { return (dir_ / sub).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, RunWritesSnapshotsTraceAndManifest) {
  const auto r = cli("run " + inputs() + " --solver tensor --steps 10 --out " + out());
  ASSERT_EQ(r.code, 0) << r.output;
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(fs::path(out()) / "snapshots")) n += e.path().extension() == ".csv";
  EXPECT_EQ(n, 10u);
  EXPECT_TRUE(fs::exists(fs::path(out()) / "snapshots" / "step_0010.csv"));
  const auto trace = slurp(out() + "/trace.csv");
  EXPECT_EQ(std::count(trace.begin(), trace.end(), '\n'), 11);
  const auto manifest = nlohmann::json::parse(slurp(out() + "/manifest.json"));
  EXPECT_EQ(manifest.at("solver"), "tensor");
  EXPECT_EQ(manifest.at("config").at("grid").at("cols"), 23);
  EXPECT_TRUE(manifest.at("features").at("interior_mass").get<bool>());
}

TEST_F(Cli, RunSnapshotsAreByteIdentical) {
  ASSERT_EQ(cli("run " + inputs() + " --solver iterative --steps 2 --out " + out("a")).code, 0);
  ASSERT_EQ(cli("run " + inputs() + " --solver iterative --steps 2 --out " + out("b")).code, 0);
  EXPECT_EQ(slurp(out("a") + "/snapshots/step_0002.csv"), slurp(out("b") + "/snapshots/step_0002.csv"));
}

TEST_F(Cli, ZeroStepsIsUsageError) {
  const auto r = cli("run " + inputs() + " --steps 0 --out " + out());
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(fs::exists(fs::path(out()) / "trace.csv"));
}

TEST_F(Cli, MissingWeatherColumnNamed) {
  const fs::path bad = dir_ / "bad.csv";
  std::FILE* f = std::fopen(bad.c_str(), "w");
  std::fputs("timestamp,t_air,t_gnd,t_sky,ghi,dhi\n2021-06-21T18:00Z,300,300,,0,0\n", f);
  std::fclose(f);
  const auto r = cli("run --building " + data_path("two_zone_23x12.json") + " --weather " + bad.string() +
                     " --steps 1 --out " + out());
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.output.find("dni"), std::string::npos) << r.output;
}

TEST_F(Cli, HorizonPastWeatherFails) {
  const auto r = cli("run " + inputs() + " --steps 500 --out " + out());
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.output.find("horizon"), std::string::npos) << r.output;
}

TEST_F(Cli, ComparePassesOnBundledBuilding) {
  const auto r = cli("compare " + inputs() + " --steps 10 --out " + out());
  ASSERT_EQ(r.code, 0) << r.output;
  const auto rep = nlohmann::json::parse(slurp(out() + "/comparison.json"));
  EXPECT_TRUE(rep.at("pass").get<bool>());
  EXPECT_GE(rep.at("sig_figs_agreement").get<int>(), 5);
  EXPECT_TRUE(fs::exists(fs::path(out()) / "comparison.csv"));
}

TEST_F(Cli, BenchRecordsRepeats) {
  const auto r = cli("bench " + inputs() + " --steps 1 --repeats 3 --out " + out());
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("Speedup"), std::string::npos);
  const auto rep = nlohmann::json::parse(slurp(out() + "/bench.json"));
  EXPECT_EQ(rep.at("iterative").at("repeat_totals").size(), 3u);
  EXPECT_DOUBLE_EQ(rep.at("tensorized").at("mean_per_step").get<double>(),
                   rep.at("tensorized").at("total_time").get<double>());
}

TEST_F(Cli, UnknownSolverRejected) {
  EXPECT_EQ(cli("run " + inputs() + " --solver magic --out " + out()).code, 2);
}
