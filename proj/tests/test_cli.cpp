#include <gtest/gtest.h>

#include <json.hpp>

#include <array>
#include <cstdio>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <sys/wait.h>

using json = nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args, bool merge_stderr = false) {
  const std::string cmd = std::string(ENTBOUND_CLI_PATH) + " " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

json run_json(const std::string& args) {
  auto r = run(args);
  EXPECT_EQ(r.code, 0) << args << "\n" << r.out;
  return json::parse(r.out);
}

std::string temp_file(const std::string& name, const std::string& text) {
  auto p = std::filesystem::temp_directory_path() / ("entbound_cli_" + name);
  std::ofstream(p) << text;
  return p.string();
}

}  // namespace

TEST(Cli, BoundExamples) {
  auto smolin = run_json("bound --n 4 --c 0.401,0.362,0.397 --distance trace --M 3");
  EXPECT_NEAR(smolin["value"].get<double>(), 0.040, 5e-4);
  EXPECT_EQ(smolin["distance"], "trace");
  EXPECT_EQ(smolin["M"], 3);
  EXPECT_EQ(smolin["kind"], "lower_bound");
  auto inside = run_json("bound --n 4 --c 0.2,0.2,0.2 --distance trace --M 3");
  EXPECT_EQ(inside["value"].get<double>(), 0.0);
  auto withsigma = run_json("bound --n 4 --c 0.401,0.362,0.397 --sigma 0.004,0.004,0.008 --M 3");
  EXPECT_NEAR(withsigma["uncertainty"].get<double>(), 0.00245, 1e-5);
}

TEST(Cli, GenuineExample) {
  auto r = run_json("genuine --pmax 0.97 --distance infidelity");
  EXPECT_NEAR(r["value"].get<double>(), 0.329, 5e-4);
  EXPECT_EQ(r["M"], 2);
  auto all = run_json("genuine --pmax 0.97 --distance all");
  EXPECT_EQ(all.size(), 5u);
  auto spec = temp_file("spec.json", R"({"n": 3, "p": {"000+": 0.97375, "000-": 0.02625}})");
  auto s = run_json("genuine --spectrum " + spec);
  EXPECT_NEAR(s["value"].get<double>(), 0.47375, 1e-6);
  EXPECT_EQ(s["ghz_index"], "000+");
}

TEST(Cli, ExitCodes) {
  auto unknown = run("bound --bogus", true);
  EXPECT_EQ(unknown.code, 2);
  EXPECT_FALSE(unknown.out.empty());
  EXPECT_EQ(run("").code, 2);
  auto bad = temp_file("bad.json", R"({"n": 4, "c": [0.4, 0.3]})");
  auto schema = run("bound --input " + bad, true);
  EXPECT_EQ(schema.code, 2);
  EXPECT_NE(schema.out.find("'c'"), std::string::npos) << schema.out;
  EXPECT_EQ(run("bound --n 3 --c 0.9,0.5,0.1 --distance infidelity").code, 1);
  EXPECT_EQ(run("bound --n 4 --c 0.4,0.4,0.4 --distance nonsense").code, 2);
  EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, ReproduceTableIVa) {
  auto t = run_json(std::string("reproduce table-iv-a --data ") + ENTBOUND_DATA_DIR + "/experimental_inputs.json");
  const std::map<std::string, double> printed = {{"smolin4", 0.040}, {"dicke6_a", 0.15}, {"dicke6_b", 0.17},
                                                 {"ghz3", 0.102},    {"ghz4", 0.312},     {"w4_a", 0.0589},
                                                 {"w4_b", 0.0963}};
  ASSERT_EQ(t["rows"].size(), printed.size());
  for (const auto& row : t["rows"])
    EXPECT_NEAR(row["E_trace"].get<double>(), printed.at(row["label"]), 0.0015) << row["label"];
}

TEST(Cli, ReproduceTableIVbEmbedded) {
  auto t = run_json("reproduce table-iv-b");
  ASSERT_EQ(t["rows"].size(), 7u);
  EXPECT_NEAR(t["rows"][0]["relative_entropy"].get<double>(), 0.81, 0.005);
  EXPECT_NEAR(t["rows"][0]["trace"].get<double>(), 0.470, 0.005);
  EXPECT_NEAR(t["rows"][0]["infidelity"].get<double>(), 0.329, 0.005);
  EXPECT_NEAR(t["rows"][0]["bures"].get<double>(), 0.36, 0.005);
}

TEST(Cli, PrettyOutput) {
  auto r = run("reproduce table-iv-a --pretty");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("smolin4"), std::string::npos);
  EXPECT_THROW((void)json::parse(r.out), json::parse_error);
}

TEST(Cli, TripleRoundTripsThroughIngest) {
  auto t = run("triple --family ghz --n 4");
  ASSERT_EQ(t.code, 0);
  auto path = temp_file("triple.json", t.out);
  auto b = run_json("bound --input " + path + " --distance trace");
  EXPECT_NEAR(b["value"].get<double>(), 0.5, 1e-12);
}

TEST(Cli, SimulateIsDeterministicAndFeedsBound) {
  auto a = run("simulate --family w --n 3 --shots 2000 --seed 7 --angles 0.9553166181245093,0,0.7853981633974483");
  auto b = run("simulate --family w --n 3 --shots 2000 --seed 7 --angles 0.9553166181245093,0,0.7853981633974483");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  auto path = temp_file("records.json", a.out);
  auto r = run_json("bound --records " + path);
  EXPECT_GT(r["value"].get<double>(), 0.0);
  EXPECT_TRUE(r.contains("uncertainty"));
}

TEST(Cli, StateOptimiseOracle) {
  auto s = run_json("state --family dicke --n 4 --k 2");
  EXPECT_NEAR(s["p_max"].get<double>(), 1.0 / 3.0, 1e-6);
  auto o = run_json("optimise --family w --n 3");
  EXPECT_NEAR(o["objective"].get<double>(), std::sqrt(3.0), 1e-5);
  auto ov = run_json("optimise --family dicke --n 4 --k 2 --target overlap");
  EXPECT_NEAR(ov["p_max"].get<double>(), 0.75, 1e-5);
  auto orc = run_json("oracle --n 4 --c 1,1,1 --distance trace --grid 20");
  EXPECT_NEAR(orc["oracle_value"].get<double>(), 0.5, 1e-4);
  EXPECT_TRUE(orc.contains("config"));
  EXPECT_EQ(run("state --family ghz").code, 2);
}
