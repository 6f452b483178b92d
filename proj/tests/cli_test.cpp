// Copyright 2026 The ppdo Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "json.hpp"
#include "ppdo/cli.hpp"
#include "test_support.hpp"

namespace ppdo {
namespace {

namespace fs = std::filesystem;
using cli::parse_config;
using cli::RunConfig;
using Args = std::vector<std::string>;

class ScratchDir {
 public:
  ScratchDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("ppdo-cli-" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~ScratchDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write_text(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

int run_binary(const std::string& args) {
  const std::string cmd = std::string(PPDO_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct Captured {
  int code;
  std::string out;
  std::string err;
};

Captured run_in_process(const Args& args) {
  std::ostringstream out, err;
  const int code = cli::run(parse_config(args), out, err);
  return {code, out.str(), err.str()};
}

// Parsing -------------------------------------------------------------------------

TEST(ParseConfig, BasicRun) {
  const RunConfig c = parse_config({"run", "--experiment", "numerical", "--scheme", "singlemod",
                                    "--sigma", "3", "--seed", "42"});
  EXPECT_EQ(c.experiment, "numerical");
  EXPECT_EQ(c.scheme, cli::SchemeChoice::kSingleMod);
  EXPECT_EQ(c.sigma, 3u);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.method, Method::kSpds);
  EXPECT_EQ(c.format, cli::OutputFormat::kCsv);
}

TEST(ParseConfig, NoneSchemeForbidsKeyOptions) {
  EXPECT_THROW(parse_config({"run", "--experiment", "numerical", "--scheme", "none", "--key-bits", "64"}),
               ConfigError);
  EXPECT_THROW(parse_config({"run", "--experiment", "numerical", "--scheme", "none", "--sigma", "3"}),
               ConfigError);
  EXPECT_THROW(parse_config({"run", "--experiment", "numerical", "--scheme", "none",
                             "--compare-plaintext"}),
               ConfigError);
  EXPECT_NO_THROW(parse_config({"run", "--experiment", "numerical", "--scheme", "none"}));
}

TEST(ParseConfig, UnknownFileKeyIsNamed) {
  ScratchDir dir;
  write_text(dir.file("cfg.json"), R"({"experiment": "numerical", "sgima": 3})");
  try {
    parse_config({"run", "--config", dir.file("cfg.json")});
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("sgima"), std::string::npos) << e.what();
  }
}

TEST(ParseConfig, FlagsOverrideFile) {
  ScratchDir dir;
  write_text(dir.file("cfg.json"),
             R"({"experiment": "traffic", "sigma": 4, "seed": 7, "method": "rpds", "format": "jsonl"})");
  const RunConfig c = parse_config({"run", "--config", dir.file("cfg.json"), "--sigma", "6"});
  EXPECT_EQ(c.experiment, "traffic");
  EXPECT_EQ(c.sigma, 6u);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.method, Method::kRpds);
  EXPECT_EQ(c.format, cli::OutputFormat::kJsonl);
}

TEST(ParseConfig, MalformedInputsRejected) {
  ScratchDir dir;
  write_text(dir.file("bad.json"), "{ not json");
  EXPECT_THROW(parse_config({"run", "--config", dir.file("bad.json")}), ConfigError);
  EXPECT_THROW(parse_config({"run", "--config", dir.file("missing.json")}), ConfigError);
  EXPECT_THROW(parse_config({"run", "--scheme", "singlemod"}), ConfigError);
  EXPECT_THROW(parse_config({"run", "--experiment", "numerical", "--method", "admm"}), ConfigError);
  EXPECT_THROW(parse_config({"run", "--experiment", "numerical", "--bogus"}), ConfigError);
  write_text(dir.file("key.json"), R"({"experiment": "numerical", "key": {"q": "7"}})");
  EXPECT_THROW(parse_config({"run", "--config", dir.file("key.json")}), ConfigError);
}

TEST(ParseConfig, HelpIsReported) {
  EXPECT_THROW(parse_config({"run", "--help"}), cli::HelpRequested);
}

// Runs ------------------------------------------------------------------------------

TEST(CliRun, NumericalConvergesWithSummary) {
  const Captured r = run_in_process({"run", "--experiment", "numerical", "--seed", "42",
                                     "--compare-plaintext"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto summary = nlohmann::json::parse(r.err);
  EXPECT_TRUE(summary.at("converged").get<bool>());
  const int iterations = summary.at("iterations").get<int>();
  EXPECT_GE(iterations, 300);
  EXPECT_LE(iterations, 1000);
  EXPECT_LT(summary.at("max_P_e").get<double>(), 0.01);
  EXPECT_LE(summary.at("final_G_e").get<double>(), 1e-2);
}

TEST(CliRun, CsvColumns) {
  const Captured r = run_in_process({"run", "--experiment", "numerical", "--k-max", "5"});
  std::istringstream lines(r.out);
  std::string header, row;
  std::getline(lines, header);
  EXPECT_EQ(header, "k,x_1,x_2,x_3,x_4,lambda_1,lambda_2,P_e,G_e,eps");
  int rows = 0;
  while (std::getline(lines, row)) {
    ++rows;
    EXPECT_EQ(std::count(row.begin(), row.end(), ','), 9);
    EXPECT_EQ(row.rfind(std::to_string(rows) + ",", 0), 0u);
  }
  EXPECT_EQ(rows, 5);
  // P_e column stays empty without --compare-plaintext.
  EXPECT_NE(r.out.find(",,"), std::string::npos);
}

TEST(CliRun, JsonlRecordsCarrySchema) {
  const Captured r = run_in_process({"run", "--experiment", "traffic", "--k-max", "3", "--format",
                                     "jsonl", "--compare-plaintext"});
  EXPECT_EQ(r.code, 2);
  std::istringstream lines(r.out);
  std::string line;
  int k = 0;
  while (std::getline(lines, line)) {
    const auto rec = nlohmann::json::parse(line);
    EXPECT_EQ(rec.at("schema"), cli::kRecordSchema);
    EXPECT_EQ(rec.at("k").get<int>(), ++k);
    EXPECT_EQ(rec.at("x").size(), 5u);
    EXPECT_EQ(rec.at("lambda").size(), 9u);
    EXPECT_TRUE(rec.at("P_e").is_number());
    EXPECT_TRUE(rec.at("G_e").is_number());
  }
  EXPECT_EQ(k, 3);
}

TEST(CliRun, TwelveSignificantDigits) {
  const Captured r = run_in_process({"run", "--experiment", "numerical", "--scheme", "none",
                                     "--k-max", "2"});
  std::istringstream lines(r.out);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  // second cell of row 1: x_1 = 0, x_2 from the first step
  EXPECT_NE(row.find("0.00786130778842"), std::string::npos) << row;
}

TEST(CliRun, FileExperimentMatchesBuiltin) {
  const Captured a = run_in_process({"run", "--experiment", "traffic", "--k-max", "50", "--seed", "3"});
  const Captured b = run_in_process({"run", "--experiment", testing::fixture_path("traffic.json"),
                                     "--k-max", "50", "--seed", "3"});
  EXPECT_EQ(a.out, b.out);
}

TEST(CliRun, BadExperimentFileIsAnError) {
  const Captured r = run_in_process({"run", "--experiment", "/nonexistent/problem.json"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST(CliRun, ModuleQualifiedDiagnostics) {
  const Captured r = run_in_process({"run", "--experiment", "numerical", "--sigma", "12"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("crypto:"), std::string::npos) << r.err;
}

TEST(CliRun, SameSeedGivesIdenticalFiles) {
  ScratchDir dir;
  for (const char* name : {"a", "b"}) {
    const std::string n(name);
    const Captured r = run_in_process({"run", "--experiment", "numerical", "--seed", "11",
                                       "--compare-plaintext", "--output", dir.file(n + ".csv"),
                                       "--transcript", dir.file(n + ".jsonl"), "--k-max", "80"});
    EXPECT_EQ(r.code, 2);
  }
  const std::string a = testing::read_file(dir.file("a.csv"));
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, testing::read_file(dir.file("b.csv")));
  const std::string ta = testing::read_file(dir.file("a.jsonl"));
  EXPECT_FALSE(ta.empty());
  EXPECT_EQ(ta, testing::read_file(dir.file("b.jsonl")));
}

TEST(CliRun, OutputDirectoryFromEnvironment) {
  ScratchDir dir;
  ::setenv(cli::kOutputDirEnv, dir.path().c_str(), 1);
  const Captured r = run_in_process({"run", "--experiment", "numerical", "--seed", "5", "--k-max", "3"});
  ::unsetenv(cli::kOutputDirEnv);
  EXPECT_TRUE(r.out.empty());
  const std::string written = testing::read_file(dir.file("numerical-singlemod-5.csv"));
  EXPECT_EQ(written.rfind("k,x_1", 0), 0u);
}

TEST(CliRun, FixedKeyFromConfig) {
  ScratchDir dir;
  write_text(dir.file("cfg.json"),
             R"({"experiment": "numerical", "k_max": 20, "key": {"w": "1125899906842597"}})");
  const Captured a = run_in_process({"run", "--config", dir.file("cfg.json"), "--seed", "1"});
  EXPECT_EQ(a.code, 2) << a.err;
  write_text(dir.file("bad.json"), R"({"experiment": "numerical", "key": {"w": "1125899906842598"}})");
  EXPECT_EQ(run_in_process({"run", "--config", dir.file("bad.json")}).code, 1);
}

// Exit codes through the real binary ---------------------------------------------

TEST(CliBinary, ExitCodes) {
  EXPECT_EQ(run_binary("run --experiment numerical --seed 42"), 0);
  EXPECT_EQ(run_binary("run --experiment traffic --k-max 10"), 2);
  EXPECT_EQ(run_binary("run --experiment numerical --scheme none --key-bits 64"), 1);
  EXPECT_EQ(run_binary("run"), 1);
  EXPECT_EQ(run_binary("run --help"), 0);
}

}  // namespace
}  // namespace ppdo
