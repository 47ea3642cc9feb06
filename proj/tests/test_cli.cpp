#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "ams/cli.hpp"

using ams::cli::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome call(std::vector<std::string> args) {
  args.insert(args.begin(), "ams_cli");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = ams::cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string config(const std::string& name) { return std::string(AMS_CONFIG_DIR) + "/" + name; }

std::vector<std::string> data_lines(const std::string& csv) {
  std::vector<std::string> lines;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line[0] != '#') lines.push_back(line);
  return lines;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string f; std::getline(in, f, ',');) out.push_back(f);
  return out;
}

}  // namespace

TEST(Cli, RunAtTarget) {
  const auto r = call({"run", "-x", "1", "-a", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["J"], 0);
  EXPECT_EQ(j["C"], 1.0);
  EXPECT_EQ(j["estimate"], 1.0);
  EXPECT_TRUE(j["provenance"].contains("config_digest"));
  EXPECT_TRUE(j["provenance"].contains("build"));
}

TEST(Cli, GoldenRunFromConfig) {
  const auto r = call({"run", "--config", config("golden_run.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["J"], 3);
  EXPECT_EQ(j["samples_drawn"], 14);
  EXPECT_EQ(j["level_trace"][1].get<double>(), 0.7213535604974474);
  EXPECT_EQ(j["provenance"]["seed"], 42);
}

TEST(Cli, FlagsOverrideConfig) {
  const auto base = json::parse(call({"run", "--config", config("golden_run.json")}).out);
  const auto over = json::parse(call({"run", "--config", config("golden_run.json"), "-k", "1"}).out);
  EXPECT_EQ(over["k"], 1);
  EXPECT_NE(base["provenance"]["config_digest"], over["provenance"]["config_digest"]);
}

TEST(Cli, ConfigErrorsExit2) {
  auto r = call({"run", "-n", "5", "-k", "5"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("k must satisfy 1 <= k <= n-1"), std::string::npos) << r.err;
  EXPECT_EQ(call({"run", "--model", "gaussian"}).code, 2);
  EXPECT_EQ(call({"run", "-x", "2", "-a", "1"}).code, 2);
  EXPECT_EQ(call({"run", "--config", "/nonexistent.json"}).code, 2);
  EXPECT_EQ(call({"frobnicate"}).code, 2);
  EXPECT_EQ(call({"run", "-n", "notanumber"}).code, 2);
  EXPECT_EQ(call({"replicate", "-f", "xml"}).code, 2);
  EXPECT_EQ(call({"compare"}).code, 2);
  EXPECT_EQ(call({"run", "--model", "committor", "--params", "0.1", "-a", "2"}).code, 2);
}

TEST(Cli, MalformedConfigFile) {
  const std::string path = ::testing::TempDir() + "bad_config.json";
  {
    std::ofstream f(path);
    f << R"({"n": 10, "kk": 3})";
  }
  auto r = call({"run", "--config", path});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("unknown field 'kk'"), std::string::npos);
  {
    std::ofstream f(path);
    f << R"({"n": 10, )";
  }
  EXPECT_EQ(call({"run", "--config", path}).code, 2);
}

TEST(Cli, RunawayExit3) {
  const auto r = call({"run", "-a", "50", "--max-iterations", "2"});
  EXPECT_EQ(r.code, 3);
  const auto rr = call({"replicate", "-a", "50", "--max-iterations", "2", "-M", "10"});
  EXPECT_EQ(rr.code, 3);
  EXPECT_NE(rr.err.find("replication"), std::string::npos);
}

TEST(Cli, ReplicateCsvIsStable) {
  setenv("AMS_THREADS", "1", 1);
  const auto a = call({"replicate", "-n", "20", "-k", "2", "-M", "3000", "-s", "5"});
  setenv("AMS_THREADS", "3", 1);
  const auto b = call({"replicate", "-n", "20", "-k", "2", "-M", "3000", "-s", "5"});
  unsetenv("AMS_THREADS");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out.find('\r'), std::string::npos);
  EXPECT_EQ(a.out.rfind("# seed=5 config_digest=", 0), 0u);
  const auto la = data_lines(a.out), lb = data_lines(b.out);
  ASSERT_EQ(la.size(), 2u);
  EXPECT_EQ(la[0], "model,n,k,x,a,M,mean,var,se_mean,se_var,mean_J,var_J,mean_samples,wallclock");
  auto fa = split(la[1]), fb = split(lb[1]);
  fa.pop_back();
  fb.pop_back();
  EXPECT_EQ(fa, fb);
  // 17 significant digits round-trip
  EXPECT_EQ(std::to_string(std::stod(fa[6])).substr(0, 6), fa[6].substr(0, 6));
  EXPECT_EQ(ams::cli::num(0.1), "0.10000000000000001");
}

TEST(Cli, ReplicateJsonAndRunsCsv) {
  const std::string runs = ::testing::TempDir() + "runs.csv";
  const auto r = call({"replicate", "-M", "50", "-n", "10", "-f", "json", "--runs-csv", runs});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["M"], 50);
  EXPECT_NEAR(j["mean_samples"].get<double>(), 10 + j["mean_J"].get<double>(), 1e-12);
  std::ifstream f(runs);
  std::stringstream ss;
  ss << f.rdbuf();
  EXPECT_EQ(data_lines(ss.str()).size(), 51u);
}

TEST(Cli, OracleDumps) {
  auto r = call({"oracle", "--config", config("oracle_v.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["roots"].size(), 3u);
  EXPECT_EQ(j["coeffs"].size(), 3u);
  r = call({"oracle", "--kind", "T", "-n", "10", "-k", "2", "--points", "11", "-f", "csv"});
  ASSERT_EQ(r.code, 0);
  const auto lines = data_lines(r.out);
  ASSERT_EQ(lines.size(), 12u);
  EXPECT_EQ(lines[0], "x,value,error_estimate");
  EXPECT_EQ(split(lines.back())[1], "1");
  r = call({"oracle", "--kind", "p", "--method", "grid", "-n", "10", "-k", "3", "--grid-size", "256",
            "--points", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(data_lines(r.out).size(), 6u);
  EXPECT_EQ(call({"oracle", "--kind", "p", "--method", "spectral"}).code, 2);
  EXPECT_EQ(call({"oracle", "--model", "pareto"}).code, 2);
}

TEST(Cli, CompareTable) {
  const auto r = call({"compare", "--config", config("compare.json"), "--p", "0.36787944117144233",
                       "--p", "4.5399929762484854e-05"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = data_lines(r.out);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "p,n,k,ams_cost,direct_cost,ratio,ams_limit_cost,ams_wins");
  const auto e1 = split(lines[1]);
  const auto e10 = split(lines[2]);
  EXPECT_NEAR(std::stod(e1[4]), 100 * 1.718281828459045, 1e-9);
  EXPECT_NEAR(std::stod(e1[6]), 200.0, 1e-9);
  EXPECT_EQ(e1[7], "0");
  EXPECT_NEAR(std::stod(e10[6]), 11000.0, 1e-7);
  EXPECT_NEAR(std::stod(e10[4]), 100 * std::expm1(10.0), 1e-6);
  EXPECT_EQ(e10[7], "1");
  EXPECT_NE(r.out.find("# crossover_p=4.5399929762484854e-05"), std::string::npos);

  const auto half = call({"compare", "--config", config("compare.json"), "--epsilon", "0.05", "--p",
                          "0.36787944117144233", "--p", "4.5399929762484854e-05"});
  const auto h = data_lines(half.out);
  for (int row = 1; row <= 2; ++row) {
    const auto a = split(lines[row]), b = split(h[row]);
    EXPECT_NEAR(std::stod(b[3]) / std::stod(a[3]), 4.0, 1e-12);
    EXPECT_NEAR(std::stod(b[4]) / std::stod(a[4]), 4.0, 1e-12);
  }
  const auto grid = call({"compare", "--config", config("compare.json"), "--p-count", "6", "-f", "json"});
  ASSERT_EQ(grid.code, 0);
  EXPECT_EQ(json::parse(grid.out)["rows"].size(), 6u);
}

TEST(Cli, VerifySubset) {
  const auto r = call({"verify", "--criteria", "8", "9", "-f", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_GE(j["reports"].size(), 10u);
}

TEST(Cli, BinaryExitCodes) {
  const std::string bin = AMS_CLI_PATH;
  EXPECT_EQ(std::system((bin + " run -x 1 -a 1 > /dev/null").c_str()), 0);
  const int bad = std::system((bin + " run -n 5 -k 7 > /dev/null 2>&1").c_str());
  EXPECT_TRUE(WIFEXITED(bad));
  EXPECT_EQ(WEXITSTATUS(bad), 2);
  const int runaway = std::system((bin + " run -a 40 --max-iterations 1 > /dev/null 2>&1").c_str());
  EXPECT_EQ(WEXITSTATUS(runaway), 3);
}
