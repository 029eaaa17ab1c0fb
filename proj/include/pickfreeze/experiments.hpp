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

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pickfreeze/estimators.hpp"
#include "pickfreeze/models.hpp"

#include <json.hpp>

namespace pickfreeze {

/// Columns of an efficiency table, baseline first.
enum class Compared { corr1 = 0, corr2 = 1, orcl1 = 2, orcl2 = 3 };
inline constexpr std::size_t kCompared = 4;

struct ExperimentConfig {
    Model model = builtin_g_function();
    std::string model_name = "g";
    std::vector<IndexSet> sets;
    std::uint64_t n = 1'000'000;      // samples per replicate
    std::uint32_t replicates = 10;
    std::uint64_t seed = 0;
    // Oracle center; empty means the model's analytic mean.
    std::optional<double> center;
    bool include_original = false;
    unsigned threads = 0;

    // Throws InvalidArgument unless n >= 2, replicates >= 1, sets nonempty
    // and of the model's dimension.
    void validate() const;
    double oracle_center() const;
};

/// Accumulated per-sample terms of one replicate.
struct ReplicateResult {
    std::uint32_t replicate = 0;
    // [set][Compared]
    std::vector<std::array<Accumulator, kCompared>> terms;
    // Original estimator pieces per set (only with include_original).
    std::vector<Accumulator> original_cross;
    std::vector<Accumulator> original_level;
    std::uint64_t evals = 0;
};

struct EfficiencyRow {
    IndexSet u;
    double rel_index = 0;  // lower_u / sigma^2, analytic
    std::array<double, kCompared> var{};
    std::array<double, kCompared> eff{};
    // Jackknife SEs over replicates for corr2, orcl1, orcl2 (NaN if R < 2).
    std::array<double, kCompared> se_eff{};
    std::optional<double> reference_rel_index;
    bool discrepancy = false;
    std::optional<double> original_estimate;
};

struct EfficiencyTable {
    std::string model_name;
    std::uint64_t n = 0;
    std::uint32_t replicates = 0;
    std::uint64_t seed = 0;
    double center = 0;
    std::uint64_t evals = 0;
    std::vector<EfficiencyRow> rows;
};

/// (cost_base / cost_other) * (var_base / var_other).
double efficiency(double var_base, double var_other, double cost_base,
                  double cost_other);

ReplicateResult run_replicate(const ExperimentConfig& config,
                              std::uint32_t replicate);

/// Pools replicates in the order given; efficiencies come from pooled
/// variances, their SEs from leave-one-replicate-out jackknife.
EfficiencyTable summarize(const ExperimentConfig& config,
                          std::span<const ReplicateResult> results);

EfficiencyTable run_experiment(const ExperimentConfig& config);

/// g-function benchmark: all nonempty u except {1,2,3}, center 27.
ExperimentConfig table2_config(std::uint64_t n, std::uint32_t replicates,
                               std::uint64_t seed);
/// Six-factor product benchmark: six singletons and {1,2},{3,4},{5,6},
/// center 1.
ExperimentConfig table3_config(std::uint64_t n, std::uint32_t replicates,
                               std::uint64_t seed);
EfficiencyTable reproduce_table2(std::uint64_t n, std::uint32_t replicates,
                                 std::uint64_t seed, unsigned threads = 0);
EfficiencyTable reproduce_table3(std::uint64_t n, std::uint32_t replicates,
                                 std::uint64_t seed, unsigned threads = 0);

/// Published relative index for a builtin benchmark set, if tabulated.
std::optional<double> reference_rel_index(const std::string& model_name,
                                          IndexSet u);
/// Published values are rounded to three places.
inline constexpr double kReferenceTolerance = 5e-4 + 1e-12;

inline constexpr const char* kCsvHeader
    = "u,rel_index,var_corr1,var_corr2,var_orcl1,var_orcl2,eff_corr1,"
      "eff_corr2,eff_orcl1,eff_orcl2,se_eff_corr2,se_eff_orcl1,se_eff_orcl2";

/// Shortest round-trip decimal ("1", "0.0675", "nan").
std::string format_real(double v);

void write_csv(const EfficiencyTable& table, std::ostream& out);
void write_csv(const EfficiencyTable& table, const std::filesystem::path& path);
nlohmann::json to_json(const EfficiencyTable& table);

}  // namespace pickfreeze
