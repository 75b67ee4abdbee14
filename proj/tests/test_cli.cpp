#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cli_app.hpp"

using namespace lastiter;
using lastiter::cli::run_cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string f; std::getline(ss, f, ',');) out.push_back(f);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

TEST(Cli, RunOptimalOnAbs) {
  const Result r = call({"run", "--method", "optimal", "--N", "3", "--instance", "abs"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 2u);
  EXPECT_EQ(ls[0], cli::kCsvHeader);
  const auto f = fields(ls[1]);
  ASSERT_EQ(f.size(), 13u);
  EXPECT_EQ(f[0], "optimal");
  EXPECT_DOUBLE_EQ(std::stod(f[7]), 0.25);
  EXPECT_DOUBLE_EQ(std::stod(f[10]), 0.5);
}

TEST(Cli, RunLongStepIsTight) {
  const Result r = call({"run", "--method", "constant", "--N", "5", "--h", "0.3", "--instance", "longstep"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto f = fields(lines(r.out)[1]);
  EXPECT_NEAR(std::stod(f[7]), 0.52560728937743594, 1e-12);
  EXPECT_NEAR(std::stod(f[12]), 0.0, 1e-9);
}

TEST(Cli, ScaledRun) {
  const Result r = call({"run", "--method", "constant", "--N", "5", "--h", "0.3", "--instance", "longstep",
                         "--B", "2", "--R", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(std::stod(fields(lines(r.out)[1])[7]), 6.0 * 0.52560728937743594, 1e-10);
}

TEST(Cli, JsonOutput) {
  const Result r = call({"run", "--method", "custom", "--N", "2", "--instance", "lemma-ii", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(lines(r.out).at(0));
  EXPECT_EQ(j["method"], "custom");
  EXPECT_NEAR(j["last_gap"].get<double>(), 0.57864228191438028, 1e-9);
  EXPECT_TRUE(j["h"].is_null());
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(call({"run", "--method", "constant", "--N", "5", "--h", "-1"}).code, 2);
  EXPECT_EQ(call({"run", "--method", "constant", "--N", "5"}).code, 2);
  EXPECT_EQ(call({"run", "--method", "bogus"}).code, 2);
  EXPECT_EQ(call({"run", "--method", "optimal", "--N", "0"}).code, 2);
  EXPECT_EQ(call({"run", "--method", "constant", "--N", "3", "--h", "0.01", "--instance", "longstep"}).code, 2);
  EXPECT_EQ(call({"sweep", "--method", "constant", "--h-grid", "0.5:0.1:0.1"}).code, 2);
  EXPECT_EQ(call({"sweep", "--method", "constant"}).code, 2);
  EXPECT_EQ(call({"certify", "--trials", "0"}).code, 2);
  EXPECT_EQ(call({"certify", "--trials", "5", "--N", "4", "--debug-nonmonotone"}).code, 2);
  EXPECT_EQ(call({}).code, 2);
}

TEST(Cli, HelpExitsZero) {
  const Result r = call({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("sweep"), std::string::npos);
}

TEST(Cli, StepsFile) {
  const std::string path = ::testing::TempDir() + "lastiter_steps.txt";
  {
    std::ofstream f(path);
    f << "1.5\n";
  }
  const Result r = call({"run", "--method", "custom", "--N", "1", "--steps-file", path});
  std::remove(path.c_str());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto f = fields(lines(r.out)[1]);
  EXPECT_DOUBLE_EQ(std::stod(f[7]), 0.5);
  EXPECT_DOUBLE_EQ(std::stod(f[9]), 0.25);
}

TEST(Cli, SweepDeterministicAndParallelSafe) {
  const std::vector<std::string> base = {"sweep", "--method", "constant", "--instance", "random", "--seed", "4",
                                         "--N-list", "1:6,10", "--h-grid", "0.05:0.6:0.05"};
  const Result a = call(base);
  const Result b = call(base);
  auto par = base;
  par.push_back("--parallel");
  const Result c = call(par);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, c.out);
  const auto ls = lines(a.out);
  EXPECT_EQ(ls[0], std::string(cli::kCsvHeader) + ",bound_log");
  EXPECT_EQ(ls.size(), 1u + 7u * 12u);
}

TEST(Cli, SweepFindsOptimalConstantStep) {
  const std::size_t N = 10;
  const Result r = call({"sweep", "--method", "constant", "--instance", "tight", "--N-list", "10", "--h-grid",
                         "0.01:0.6:0.001"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ls = lines(r.out);
  double best = 1e9, arg = 0.0;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto f = fields(ls[i]);
    const double gap = std::stod(f[7]);
    EXPECT_NEAR(gap, std::stod(f[10]), 1e-9);
    if (gap < best) {
      best = gap;
      arg = std::stod(f[2]);
    }
  }
  const auto opt = optimal_constant_step(N);
  EXPECT_NEAR(arg, opt.h_star, 1e-3);
  EXPECT_NEAR(best, opt.rate, 1e-5);
}

TEST(Cli, OptimalSweepNeverViolates) {
  for (const char* inst : {"abs", "random"}) {
    for (const char* method : {"optimal", "optimal-length"}) {
      const Result r = call({"sweep", "--method", method, "--instance", inst, "--N-list", "1:30"});
      ASSERT_EQ(r.code, 0) << r.err;
      const auto ls = lines(r.out);
      ASSERT_EQ(ls.size(), 31u);
      for (std::size_t i = 1; i < ls.size(); ++i) {
        const auto f = fields(ls[i]);
        EXPECT_LE(std::stod(f[7]), 1.0 / std::sqrt(static_cast<double>(i) + 1.0) + 1e-9);
      }
    }
  }
}

TEST(Cli, CertifyReportsOk) {
  const Result r = call({"certify", "--trials", "50", "--N", "8", "--seed", "7"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("status=ok"), std::string::npos);
  EXPECT_NE(r.out.find("checks=50"), std::string::npos);
}

TEST(Cli, ParseHelpers) {
  EXPECT_EQ(cli::parse_n_list("1,2,5:8"), (std::vector<std::size_t>{1, 2, 5, 6, 7, 8}));
  EXPECT_THROW(cli::parse_n_list("a"), cli::UsageError);
  EXPECT_EQ(cli::parse_h_grid("0.1:0.3:0.1").size(), 3u);
  EXPECT_THROW(cli::parse_h_grid("0.1:0.3"), cli::UsageError);
}
