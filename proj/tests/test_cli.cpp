// This file is part of tcavar, a C++ library for computing risk-averse
// policies of transient total-cost Markov decision processes.
//
// MIT License
//
// Permission is hereby granted, free of charge, to any person obtaining a copy
// of this software and associated documentation files (the "Software"), to deal
// in the Software without restriction, including without limitation the rights
// to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
// copies of the Software, and to permit persons to whom the Software is
// furnished to do so, subject to the following conditions:
//
// The above copyright notice and this permission notice shall be included in
// all copies or substantial portions of the Software.
//
// THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
// IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
// FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
// AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
// LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
// OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
// SOFTWARE.

#include "commands.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace tcavar;
namespace fs = std::filesystem;

namespace {

std::string data(const std::string& name) {
    const char* dir = std::getenv("TCAVAR_DATA");
    return (fs::path(dir ? dir : "data") / name).string();
}

std::string slurp(const std::string& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("tcavar_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    cli::RunConfig config(const std::string& command, const std::string& input) {
        cli::RunConfig c;
        c.command = command;
        c.input = data(input);
        c.out = (dir_ / "out").string();
        return c;
    }
    int run(const cli::RunConfig& c) {
        out_.str("");
        err_.str("");
        return cli::run(c, out_, err_);
    }
    std::string file(const std::string& suffix) const { return slurp((dir_ / ("out" + suffix)).string()); }

    fs::path dir_;
    std::ostringstream out_, err_;
};

TEST_F(Cli, ValidateReportsHorizon) {
    auto c = config("validate", "tiny2.json");
    c.tau = 0.5;
    c.epsilon = 0.01;
    EXPECT_EQ(run(c), cli::kOk);
    EXPECT_NE(out_.str().find("gamma: 0.5 (exact)"), std::string::npos);
    EXPECT_NE(out_.str().find("d=21"), std::string::npos);
}

TEST_F(Cli, ExitCodes) {
    EXPECT_EQ(run(config("validate", "tiny2_zero_cost.json")), cli::kAssumptionViolated);
    EXPECT_EQ(run(config("validate", "malformed.json")), cli::kInvalidInput);
    EXPECT_EQ(run(config("validate", "does_not_exist.json")), cli::kInvalidInput);
    EXPECT_EQ(run(config("frobnicate", "tiny2.json")), cli::kInvalidInput);

    auto both = config("solve", "tiny2.json");
    both.epsilon = 0.1;
    both.horizon = 5;
    EXPECT_EQ(run(both), cli::kInvalidInput);
    EXPECT_EQ(run(config("solve", "tiny2.json")), cli::kInvalidInput);

    auto no_policy = config("simulate", "tiny2.json");
    no_policy.horizon = 3;
    EXPECT_EQ(run(no_policy), cli::kInvalidInput);
}

TEST_F(Cli, SolveThenSimulate) {
    auto c = config("solve", "tiny2.json");
    c.tau = 0.5;
    c.horizon = 19;
    ASSERT_EQ(run(c), cli::kOk) << err_.str();
    EXPECT_NE(out_.str().find("objective=2 s*=2"), std::string::npos);
    const auto sol = io::json::parse(file(".solution.json"));
    EXPECT_EQ(sol["kind"], "augmented");
    EXPECT_EQ(sol["d"], 19);
    const auto theta = io::distribution_from_csv(file(".theta.csv"));
    EXPECT_NEAR(theta.mean(), 2.0, 1e-9);

    auto sim = config("simulate", "tiny2.json");
    sim.policy = (dir_ / "out.solution.json").string();
    sim.runs = 500;
    ASSERT_EQ(run(sim), cli::kOk) << err_.str();
    const auto batch = file(".batch.csv");
    EXPECT_EQ(batch.rfind("run,cost,t_star,timeout_flag\n", 0), 0u);
    EXPECT_EQ(std::count(batch.begin(), batch.end(), '\n'), 501);

    sim.horizon = 40;
    EXPECT_EQ(run(sim), cli::kInvalidInput);
}

TEST_F(Cli, SimulateIsDeterministicForSeed) {
    auto c = config("simulate", "tiny2.json");
    c.policy = data("always_fast.json");
    c.horizon = 10;
    c.runs = 300;
    c.seed = 42;
    c.threads = 3;
    ASSERT_EQ(run(c), cli::kOk) << err_.str();
    const auto first = file(".batch.csv");
    c.threads = 1;
    ASSERT_EQ(run(c), cli::kOk);
    EXPECT_EQ(file(".batch.csv"), first);
    c.seed = 43;
    ASSERT_EQ(run(c), cli::kOk);
    EXPECT_NE(file(".batch.csv"), first);
}

TEST_F(Cli, PolicyMissingStateIsCoverageError) {
    const auto p = (dir_ / "partial.json").string();
    io::write_text_file(p, R"({"kind": "augmented", "d": 3, "tau": 0.5, "zeta": 1, "n_levels": 3,
        "policy": [{"x": "A", "y": 0, "z": 0, "action": "fast", "prob": 1.0}]})");
    auto c = config("simulate", "tiny2.json");
    c.policy = p;
    c.runs = 50;
    EXPECT_EQ(run(c), cli::kPolicyCoverage) << err_.str();
}

TEST_F(Cli, GraphInputAndCompare) {
    auto c = config("compare", "tiny2_graph.json");
    c.tau = 0.5;
    c.horizon = 10;
    c.runs = 200;
    c.taus = {0.5, 0.9};
    ASSERT_EQ(run(c), cli::kOk) << err_.str();
    EXPECT_NE(out_.str().find("baseline expected cost=2"), std::string::npos);
    EXPECT_FALSE(file(".baseline.histogram.csv").empty());
    EXPECT_FALSE(file(".risk-averse.histogram.csv").empty());
    EXPECT_FALSE(file(".tau-0.9.csv").empty());
}

TEST_F(Cli, BaselineWritesStationaryPolicy) {
    ASSERT_EQ(run(config("baseline", "tiny2b.json")), cli::kOk) << err_.str();
    const auto j = io::json::parse(file(".baseline.json"));
    EXPECT_EQ(j["kind"], "stationary");
    const auto loaded = io::policy_from_json(j, io::load_model(data("tiny2b.json")));
    EXPECT_EQ(std::get<StationaryPolicy>(loaded.policy).table()[0], (std::vector<double>{1.0, 0.0}));
}

} // namespace
