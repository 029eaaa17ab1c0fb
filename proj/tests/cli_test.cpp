/*
 * Copyright (C) 2026 The pickfreeze Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = pickfreeze::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

// "key   value" lines of the text output.
std::map<std::string, std::string> fields(const std::string& text)
{
    std::map<std::string, std::string> m;
    std::istringstream in(text);
    std::string key, value;
    while (in >> key && std::getline(in >> std::ws, value))
        m[key] = value;
    return m;
}

std::size_t count_lines(const std::string& s)
{
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST(CliEstimate, GFunctionCorrelation2)
{
    const auto r = run({"estimate", "--model", "g", "--u", "1", "--estimator",
                        "corr2", "--n", "1000000", "--seed", "7"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto f = fields(r.out);
    const double est = std::stod(f["estimate"]);
    const double se = std::stod(f["std_error"]);
    EXPECT_NEAR(est, 0.0675, 4 * se);
    EXPECT_EQ(f["evals"], "4000000");
}

TEST(CliEstimate, Product6Oracle2)
{
    const auto r = run({"estimate", "--model", "product6", "--u", "5",
                        "--estimator", "orcl2", "--center", "1", "--n",
                        "100000"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto f = fields(r.out);
    EXPECT_NEAR(std::stod(f["estimate"]), 0.0625, 4 * std::stod(f["std_error"]));
}

TEST(CliEstimate, BadCoordinate)
{
    const auto r = run({"estimate", "--model", "product6", "--u", "9"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("coordinate 9"), std::string::npos) << r.err;
}

TEST(CliEstimate, BadArguments)
{
    EXPECT_EQ(run({"estimate", "--u", "1", "--estimator", "gen", "--v", "1"})
                  .code,
              2);
    EXPECT_EQ(run({"estimate", "--u", "1", "--estimator", "corr1", "--center",
                   "2"})
                  .code,
              2);
    EXPECT_EQ(run({"estimate", "--u", "1", "--estimator", "bogus"}).code, 2);
    EXPECT_EQ(run({"estimate"}).code, 2);
    EXPECT_EQ(run({"estimate", "--u", "1", "--model", "/no/such.json"}).code, 2);
}

TEST(CliEstimate, GeneralizedAndReplicates)
{
    const auto r = run({"estimate", "--model", "product6", "--u", "1",
                        "--estimator", "gen", "--v", "2,3,4,5,6", "--v2",
                        "2,3,4,5,6", "--n", "20000", "--replicates", "4"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto f = fields(r.out);
    EXPECT_EQ(f["v"], "{2,3,4,5,6}");
    EXPECT_EQ(f["replicates"], "4");
    EXPECT_EQ(f["evals"], "320000");
}

TEST(CliEstimate, FormatsAgreeAndRepeat)
{
    const std::vector<std::string> base{"estimate", "--model", "g", "--u",
                                        "2,3", "--estimator", "orcl1", "--n",
                                        "5000", "--seed", "11"};
    auto with = [&](const char* fmt) {
        auto a = base;
        a.insert(a.end(), {"--format", fmt});
        return run(a);
    };
    const auto csv = with("csv");
    const auto json = with("json");
    ASSERT_EQ(csv.code, 0);
    ASSERT_EQ(json.code, 0);
    EXPECT_EQ(csv.out, with("csv").out);
    const auto doc = nlohmann::json::parse(json.out);
    std::istringstream in(csv.out);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    const auto est = row.substr(0, row.rfind(','));
    const auto se_pos = est.rfind(',');
    EXPECT_EQ(std::stod(est.substr(se_pos + 1)), doc["std_error"].get<double>());
    const auto est2 = est.substr(0, se_pos);
    EXPECT_EQ(std::stod(est2.substr(est2.rfind(',') + 1)),
              doc["estimate"].get<double>());
}

TEST(CliAnova, GFunction)
{
    const auto r = run({"anova", "--model", "g"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto f = fields(r.out);
    EXPECT_EQ(std::stod(f["mu"]), 27.0);
    EXPECT_NEAR(std::stod(f["sigma2"]), 1.418025, 5e-7);
    // Header plus seven nonempty sets.
    EXPECT_NE(r.out.find("{1,2,3}"), std::string::npos);
    EXPECT_EQ(r.out.find("note:"), std::string::npos);
}

TEST(CliAnova, Product6PairNote)
{
    const auto r = run({"anova", "--model", "product6", "--u", "1,2",
                        "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = nlohmann::json::parse(r.out);
    const auto& s = doc["sets"][0];
    EXPECT_NEAR(s["lower"].get<double>(), 3.0, 1e-14);
    EXPECT_NEAR(s["rel_lower"].get<double>(), 0.495, 5e-4);
    EXPECT_TRUE(s["discrepancy"].get<bool>());

    const auto text = run({"anova", "--model", "product6", "--u", "1,2"});
    EXPECT_NE(text.out.find("note:"), std::string::npos);
}

TEST(CliVerify, ExitCodes)
{
    const auto ok = run({"verify", "--levels", "3", "--dims", "2", "--trials",
                         "20", "--seed", "1"});
    EXPECT_EQ(ok.code, 0) << ok.out;
    EXPECT_NE(ok.out.find("80/80 checks passed"), std::string::npos);

    const auto budget = run({"verify", "--levels", "100", "--dims", "4"});
    EXPECT_EQ(budget.code, 2);
    EXPECT_NE(budget.err.find("budget"), std::string::npos);

    const auto corrupt = run({"verify", "--trials", "3", "--corrupt"});
    EXPECT_EQ(corrupt.code, 1);
    EXPECT_NE(corrupt.out.find("FAIL"), std::string::npos);
}

TEST(CliUsage, Errors)
{
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"anova", "--bogus"}).code, 2);
    EXPECT_EQ(run({"anova", "--format", "xml"}).code, 2);
    const auto help = run({"--help"});
    EXPECT_EQ(help.code, 0);
    EXPECT_NE(help.out.find("efficiency-table"), std::string::npos);
    EXPECT_EQ(run({"efficiency-table"}).code, 2);
    EXPECT_EQ(run({"efficiency-table", "--paper", "4"}).code, 2);
}

TEST(CliTable, Paper3)
{
    const auto r = run({"efficiency-table", "--paper", "3", "--n", "1000000",
                        "--replicates", "10"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(count_lines(r.out), 10u);  // header + 9 rows
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')),
              "u,rel_index,var_corr1,var_corr2,var_orcl1,var_orcl2,eff_corr1,"
              "eff_corr2,eff_orcl1,eff_orcl2,se_eff_corr2,se_eff_orcl1,"
              "se_eff_orcl2");
    EXPECT_NE(r.err.find("0.826"), std::string::npos);
}

TEST(CliTable, OutFileAndRepeatability)
{
    const std::string path = ::testing::TempDir() + "pickfreeze_table.json";
    const std::vector<std::string> args{"efficiency-table", "--paper", "2",
                                        "--n", "20000", "--replicates", "3",
                                        "--seed", "5", "--format", "json",
                                        "--out", path};
    ASSERT_EQ(run(args).code, 0);
    std::ifstream in(path);
    const auto a = nlohmann::json::parse(in);
    EXPECT_EQ(a["rows"].size(), 6u);
    EXPECT_EQ(a["seed"], 5);
    ASSERT_EQ(run(args).code, 0);
    std::ifstream in2(path);
    EXPECT_EQ(nlohmann::json::parse(in2), a);
}

TEST(CliTable, ConfigFile)
{
    const std::string path = ::testing::TempDir() + "pickfreeze_exp.json";
    {
        std::ofstream out(path);
        out << R"({"model": {"kind": "product", "mu": [1, 1], "tau": [1, 0.5]},
                   "sets": ["1", "2"], "n": 5000, "replicates": 2})";
    }
    const auto r = run({"efficiency-table", "--config", path});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(count_lines(r.out), 3u);
}
