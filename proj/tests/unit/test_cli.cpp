#include "qfa/outputs.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;

int cli(const std::string& args, const fs::path& log)
{
  const std::string cmd = std::string(QFA_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name)
{
  const auto dir = fs::temp_directory_path() / ("qfa_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(Cli, MissingConfigFailsWithMessage)
{
  const auto dir = scratch("missing");
  EXPECT_NE(cli("run --config " + (dir / "nope.json").string(), dir / "log"), 0);
  EXPECT_NE(slurp(dir / "log").find("nope.json"), std::string::npos);
}

TEST(Cli, UnknownPresetAndPolicyRejected)
{
  const auto dir = scratch("bad");
  EXPECT_NE(cli("run --preset nowhere", dir / "log"), 0);
  EXPECT_NE(cli("run --preset baseline --policy greedy", dir / "log"), 0);
  EXPECT_NE(cli("run --preset baseline --seeds 3-1", dir / "log"), 0);
}

TEST(Cli, InvalidConfigListsViolations)
{
  const auto dir = scratch("invalid");
  ASSERT_EQ(cli("config baseline", dir / "cfg.json"), 0);
  auto j = nlohmann::json::parse(slurp(dir / "cfg.json"));
  j["bsm_success"] = 2.0;
  j["f_min"] = -1.0;
  std::ofstream(dir / "bad.json") << j.dump();
  EXPECT_EQ(cli("run --config " + (dir / "bad.json").string(), dir / "log"), 2);
  const auto log = slurp(dir / "log");
  EXPECT_NE(log.find("bsm"), std::string::npos);
  EXPECT_NE(log.find("F_min"), std::string::npos);
}

TEST(Cli, BaselineRunWritesOutputs)
{
  const auto dir = scratch("baseline");
  const auto out = dir / "out";
  ASSERT_EQ(cli("run --preset baseline --slots 20000 --seeds 1-2 --emit-trace --out " + out.string(),
                dir / "log"),
            0)
      << slurp(dir / "log");
  const auto rows = qfa::read_metrics_csv(out / "metrics.csv");
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_NEAR(rows[1].mean_age, 0.09, 0.02);
  EXPECT_TRUE(fs::exists(out / "resolved_config.json"));
  EXPECT_TRUE(fs::exists(out / "trace.ndjson"));
  EXPECT_NE(slurp(dir / "log").find("mean_age="), std::string::npos);
}

TEST(Cli, ConfigRoundTripRuns)
{
  const auto dir = scratch("roundtrip");
  ASSERT_EQ(cli("config baseline", dir / "cfg.json"), 0);
  EXPECT_EQ(cli("run --config " + (dir / "cfg.json").string() +
                    " --slots 2000 --seeds 1 --out " + (dir / "out").string(),
                dir / "log"),
            0)
      << slurp(dir / "log");
  EXPECT_EQ(cli("presets", dir / "list"), 0);
  EXPECT_NE(slurp(dir / "list").find("fidelity-sweep"), std::string::npos);
}

} // namespace
