#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "loxolab/cli.hpp"
#include "loxolab/combing_builder.hpp"

using namespace loxolab;
using loxolab::testing::data_path;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "loxolab");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  ::testing::internal::CaptureStdout();
  ::testing::internal::CaptureStderr();
  const int code = cli_main(static_cast<int>(argv.size()), argv.data());
  Outcome o{code, ::testing::internal::GetCapturedStdout()};
  ::testing::internal::GetCapturedStderr();
  return o;
}

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / ("loxolab_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, SidecarPath) {
  EXPECT_EQ(sidecar_path("out/p4.json"), "out/p4.meta.json");
  EXPECT_EQ(sidecar_path("p4"), "p4.meta.json");
}

TEST(Cli, BuildThenVerify) {
  const fs::path dir = scratch();
  const std::string out = (dir / "p4.json").string();
  EXPECT_EQ(run({"build", "--presentation", data_path("p4.json"), "--out", out}).code, 0);
  ASSERT_TRUE(fs::exists(out));
  ASSERT_TRUE(fs::exists(dir / "p4.meta.json"));
  const Outcome v = run({"verify", "--combing", out, "--nmax", "5"});
  EXPECT_EQ(v.code, 0);
  EXPECT_EQ(nlohmann::json::parse(v.out).at("passed"), true);
  const Outcome a = run({"analyze", "--combing", out, "--samples", "500"});
  EXPECT_EQ(a.code, 0);
  EXPECT_TRUE(nlohmann::json::parse(a.out).contains("lambda"));
  fs::remove_all(dir);
}

TEST(Cli, VerifyFailsWithExitOne) {
  // The free-group automaton is not a combing of the path group.
  const Outcome v = run({"verify", "--combing", data_path("f2_handwritten.combing.json"), "--presentation",
                         data_path("p4.json"), "--nmax", "3"});
  EXPECT_EQ(v.code, 1);
}

TEST(Cli, RunWritesCsvAndJson) {
  const fs::path dir = scratch();
  const std::string stem = (dir / "growth").string();
  const Outcome r = run({"run", "exact-growth", "--config", data_path("configs/f2_exact_growth.json"), "--out", stem});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "experiment,n,statistic,value,ci_low,ci_high,mode,seed,config_hash");
  EXPECT_NE(r.out.find(",C_exact,4/3,"), std::string::npos);
  EXPECT_EQ(slurp(stem + ".csv"), r.out);
  EXPECT_EQ(nlohmann::json::parse(slurp(stem + ".json")).at("experiment"), "exact-growth");
  fs::remove_all(dir);
}

TEST(Cli, UsageAndConfigErrorsExitTwo) {
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"build", "--presentation", data_path("p4.json")}).code, 2);
  EXPECT_EQ(run({"run", "no-such-experiment", "--presentation", data_path("f2.json")}).code, 2);
  const fs::path dir = scratch();
  const fs::path bad = dir / "bad.json";
  std::ofstream(bad) << "{ \"presentation\": ";
  EXPECT_EQ(run({"run", "drift", "--config", bad.string()}).code, 2);
  std::ofstream(bad) << R"({"presentation": "nowhere.json"})";
  EXPECT_EQ(run({"run", "drift", "--config", bad.string()}).code, 2);
  EXPECT_EQ(run({"verify", "--combing", (dir / "absent.json").string()}).code, 2);
  fs::remove_all(dir);
}
