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

#include "pickfreeze/experiments.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <system_error>

#include "pickfreeze/parallel.hpp"

namespace pickfreeze {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::array<EstimatorKind, kCompared> compared_kinds(double center)
{
    return {EstimatorKind::correlation1(), EstimatorKind::correlation2(),
            EstimatorKind::oracle1(center), EstimatorKind::oracle2(center)};
}

// Relative closed index lower_u / sigma^2 without building 2^d tables for
// product-form models.
class RelIndex {
  public:
    explicit RelIndex(const Model& model)
    {
        if (auto* g = std::get_if<GFunction>(&model))
            product_ = g_as_product(*g);
        else if (auto* p = std::get_if<ProductModel>(&model))
            product_ = *p;
        else
            anova_ = discrete_anova(std::get<DiscreteModel>(model));
    }
    double operator()(IndexSet u) const
    {
        if (product_)
            return product_->lower(u) / product_->variance();
        return anova_->lower(u) / anova_->sigma2;
    }

  private:
    std::optional<ProductModel> product_;
    std::optional<AnovaReport> anova_;
};

std::array<double, kCompared>
efficiencies(const std::array<double, kCompared>& var)
{
    const auto kinds = compared_kinds(0);
    std::array<double, kCompared> eff{};
    eff[0] = 1;
    for (std::size_t k = 1; k < kCompared; ++k) {
        if (var[0] > 0 && var[k] > 0)
            eff[k] = efficiency(var[0], var[k], cost(kinds[0]), cost(kinds[k]));
        else
            eff[k] = kNaN;
    }
    return eff;
}

std::array<double, kCompared>
pooled_variances(std::span<const ReplicateResult> results, std::size_t set,
                 std::optional<std::size_t> skip)
{
    std::array<Accumulator, kCompared> pooled;
    for (std::size_t r = 0; r < results.size(); ++r) {
        if (skip && *skip == r)
            continue;
        for (std::size_t k = 0; k < kCompared; ++k)
            pooled[k].merge(results[r].terms[set][k]);
    }
    std::array<double, kCompared> var{};
    for (std::size_t k = 0; k < kCompared; ++k)
        var[k] = pooled[k].variance();
    return var;
}

}  // namespace

void ExperimentConfig::validate() const
{
    if (n < 2)
        throw InvalidArgument("experiment needs n >= 2 samples per replicate");
    if (replicates < 1)
        throw InvalidArgument("experiment needs at least one replicate");
    if (sets.empty())
        throw InvalidArgument("experiment needs at least one index set");
    const int d = dimension(model);
    for (auto u : sets) {
        if (u.dim() != d)
            throw InvalidArgument("set " + u.to_string()
                                  + " does not match model dimension "
                                  + std::to_string(d));
        if (u.is_empty())
            throw InvalidArgument("experiment sets must be nonempty");
    }
    if (center && !std::isfinite(*center))
        throw InvalidArgument("oracle center must be finite");
}

double ExperimentConfig::oracle_center() const
{
    return center ? *center : analytic_mean(model);
}

double efficiency(double var_base, double var_other, double cost_base,
                  double cost_other)
{
    if (!(var_base > 0) || !(var_other > 0))
        throw InvalidArgument("efficiency needs positive variances");
    if (!(cost_base > 0) || !(cost_other > 0))
        throw InvalidArgument("efficiency needs positive costs");
    return (cost_base / cost_other) * (var_base / var_other);
}

ReplicateResult run_replicate(const ExperimentConfig& config,
                              std::uint32_t replicate)
{
    config.validate();
    const auto kinds = compared_kinds(config.oracle_center());
    const std::size_t n_sets = config.sets.size();

    ReplicateResult out;
    out.replicate = replicate;
    out.terms.resize(n_sets);
    if (config.include_original) {
        out.original_cross.resize(n_sets);
        out.original_level.resize(n_sets);
    }

    EvalCounter counter;
    CountingFunction f(config.model, counter);
    SampleStream stream({config.seed, replicate}, dimension(config.model));
    BlendCache cache;
    for (std::uint64_t i = 0; i < config.n; ++i) {
        const SampleBlock b = stream.next();
        cache.clear();
        CachedSource<CountingFunction> src{f, b, cache};
        for (std::size_t s = 0; s < n_sets; ++s) {
            const IndexSet u = config.sets[s];
            for (std::size_t k = 0; k < kCompared; ++k)
                out.terms[s][k].push(term_value(src, kinds[k], u));
            if (config.include_original) {
                const double fx = src.point(Role::x);
                const double fb = src.blended(Role::x, Role::y, u);
                out.original_cross[s].push(fx * fb);
                out.original_level[s].push(0.5 * (fx + fb));
            }
        }
    }
    out.evals = counter.count();
    return out;
}

EfficiencyTable summarize(const ExperimentConfig& config,
                          std::span<const ReplicateResult> results)
{
    config.validate();
    if (results.empty())
        throw InvalidArgument("no replicate results to summarize");
    const RelIndex rel(config.model);

    EfficiencyTable table;
    table.model_name = config.model_name;
    table.n = config.n;
    table.replicates = static_cast<std::uint32_t>(results.size());
    table.seed = config.seed;
    table.center = config.oracle_center();
    for (const auto& r : results)
        table.evals += r.evals;

    const std::size_t R = results.size();
    for (std::size_t s = 0; s < config.sets.size(); ++s) {
        EfficiencyRow row;
        row.u = config.sets[s];
        row.rel_index = rel(row.u);
        row.var = pooled_variances(results, s, std::nullopt);
        row.eff = efficiencies(row.var);

        row.se_eff.fill(kNaN);
        row.se_eff[0] = 0;
        if (R >= 2) {
            std::array<Accumulator, kCompared> loo;
            for (std::size_t r = 0; r < R; ++r) {
                auto e = efficiencies(pooled_variances(results, s, r));
                for (std::size_t k = 1; k < kCompared; ++k)
                    loo[k].push(e[k]);
            }
            for (std::size_t k = 1; k < kCompared; ++k) {
                // Jackknife: (R-1)/R * sum (e_r - e_bar)^2.
                const double rr = static_cast<double>(R);
                row.se_eff[k] = std::sqrt((rr - 1) / rr * loo[k].m2());
            }
        }

        row.reference_rel_index = reference_rel_index(config.model_name, row.u);
        if (row.reference_rel_index)
            row.discrepancy = std::fabs(row.rel_index - *row.reference_rel_index)
                              > kReferenceTolerance;

        if (config.include_original) {
            Accumulator per_rep;
            for (const auto& r : results) {
                const double lvl = r.original_level[s].mean();
                per_rep.push(r.original_cross[s].mean() - lvl * lvl);
            }
            row.original_estimate = per_rep.mean();
        }
        table.rows.push_back(row);
    }
    return table;
}

EfficiencyTable run_experiment(const ExperimentConfig& config)
{
    config.validate();
    std::vector<ReplicateResult> results(config.replicates);
    parallel_for(config.replicates, config.threads, [&](std::size_t r) {
        results[r] = run_replicate(config, static_cast<std::uint32_t>(r));
    });
    return summarize(config, results);
}

ExperimentConfig table2_config(std::uint64_t n, std::uint32_t replicates,
                               std::uint64_t seed)
{
    ExperimentConfig c;
    c.model = builtin_g_function();
    c.model_name = "g";
    for (const char* s : {"1", "2", "3", "1,2", "1,3", "2,3"})
        c.sets.push_back(IndexSet::parse(s, 3));
    c.n = n;
    c.replicates = replicates;
    c.seed = seed;
    c.center = 27.0;
    return c;
}

ExperimentConfig table3_config(std::uint64_t n, std::uint32_t replicates,
                               std::uint64_t seed)
{
    ExperimentConfig c;
    c.model = builtin_product6();
    c.model_name = "product6";
    for (const char* s : {"1", "2", "3", "4", "5", "6", "1,2", "3,4", "5,6"})
        c.sets.push_back(IndexSet::parse(s, 6));
    c.n = n;
    c.replicates = replicates;
    c.seed = seed;
    c.center = 1.0;
    return c;
}

EfficiencyTable reproduce_table2(std::uint64_t n, std::uint32_t replicates,
                                 std::uint64_t seed, unsigned threads)
{
    auto c = table2_config(n, replicates, seed);
    c.threads = threads;
    return run_experiment(c);
}

EfficiencyTable reproduce_table3(std::uint64_t n, std::uint32_t replicates,
                                 std::uint64_t seed, unsigned threads)
{
    auto c = table3_config(n, replicates, seed);
    c.threads = threads;
    return run_experiment(c);
}

std::optional<double> reference_rel_index(const std::string& model_name,
                                          IndexSet u)
{
    static const std::map<std::pair<std::string, std::string>, double> refs = {
        {{"g", "{1}"}, 0.048},          {{"g", "{2}"}, 0.190},
        {{"g", "{3}"}, 0.762},          {{"g", "{1,2}"}, 0.238},
        {{"g", "{1,3}"}, 0.809},        {{"g", "{2,3}"}, 0.952},
        {{"product6", "{1}"}, 0.165},   {{"product6", "{2}"}, 0.165},
        {{"product6", "{3}"}, 0.041},   {{"product6", "{4}"}, 0.041},
        {{"product6", "{5}"}, 0.010},   {{"product6", "{6}"}, 0.010},
        {{"product6", "{1,2}"}, 0.826}, {{"product6", "{3,4}"}, 0.176},
        {{"product6", "{5,6}"}, 0.042},
    };
    auto it = refs.find({model_name, u.to_string()});
    if (it == refs.end())
        return std::nullopt;
    return it->second;
}

//---------------------------------------------------------------------------//

std::string format_real(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{})
        throw std::runtime_error("failed to format a real number");
    return std::string(buf, ptr);
}

void write_csv(const EfficiencyTable& table, std::ostream& out)
{
    out << kCsvHeader << '\n';
    for (const auto& row : table.rows) {
        out << '"' << row.u.to_string() << '"' << ',' << format_real(row.rel_index);
        for (double v : row.var)
            out << ',' << format_real(v);
        for (double e : row.eff)
            out << ',' << format_real(e);
        for (std::size_t k = 1; k < kCompared; ++k)
            out << ',' << format_real(row.se_eff[k]);
        out << '\n';
    }
}

void write_csv(const EfficiencyTable& table, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::system_error(errno, std::generic_category(),
                                "cannot open '" + path.string()
                                    + "' for writing");
    write_csv(table, out);
    out.flush();
    if (!out)
        throw std::system_error(errno, std::generic_category(),
                                "failed writing '" + path.string() + "'");
}

nlohmann::json to_json(const EfficiencyTable& table)
{
    auto num = [](double v) -> nlohmann::json {
        if (!std::isfinite(v))
            return nullptr;
        return v;
    };
    static constexpr const char* names[kCompared]
        = {"corr1", "corr2", "orcl1", "orcl2"};

    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : table.rows) {
        nlohmann::json r;
        r["u"] = row.u.to_string();
        r["rel_index"] = num(row.rel_index);
        for (std::size_t k = 0; k < kCompared; ++k) {
            r[std::string("var_") + names[k]] = num(row.var[k]);
            r[std::string("eff_") + names[k]] = num(row.eff[k]);
            if (k > 0)
                r[std::string("se_eff_") + names[k]] = num(row.se_eff[k]);
        }
        if (row.reference_rel_index) {
            r["reference_rel_index"] = *row.reference_rel_index;
            r["discrepancy"] = row.discrepancy;
        }
        if (row.original_estimate)
            r["original_estimate"] = num(*row.original_estimate);
        rows.push_back(std::move(r));
    }
    return {{"model", table.model_name},
            {"n", table.n},
            {"replicates", table.replicates},
            {"seed", table.seed},
            {"center", num(table.center)},
            {"evals", table.evals},
            {"rows", std::move(rows)}};
}

}  // namespace pickfreeze
