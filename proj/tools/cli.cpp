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

#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pickfreeze/estimators.hpp"
#include "pickfreeze/experiments.hpp"
#include "pickfreeze/model_io.hpp"
#include "pickfreeze/models.hpp"
#include "pickfreeze/verification.hpp"

namespace pickfreeze::cli {

namespace {

using nlohmann::json;

struct Globals {
    std::uint64_t seed = 0;
    std::string model = "g";
    std::string out;
    std::string format;  // empty: command default
};

struct EstimateFlags {
    std::string u;
    std::string estimator = "corr1";
    std::string v = "{}";
    std::string v2 = "{}";
    std::uint64_t n = 100'000;
    std::optional<double> center;
    std::uint32_t replicates = 1;
};

struct TableFlags {
    int paper = 0;
    std::string config;
    std::uint64_t n = 1'000'000;
    std::uint32_t replicates = 10;
    std::optional<double> center;
    bool include_original = false;
};

struct AnovaFlags {
    std::string u;
};

struct VerifyFlags {
    int levels = 3;
    int dims = 2;
    int trials = 20;
    bool corrupt = false;
};

// Writes to --out when given, otherwise to the command's stream.
class Sink {
  public:
    Sink(const std::string& path, std::ostream& fallback) : out_(&fallback)
    {
        if (!path.empty()) {
            file_.open(path);
            if (!file_)
                throw InvalidArgument("cannot open '" + path + "' for writing");
            out_ = &file_;
        }
    }
    std::ostream& stream() { return *out_; }

  private:
    std::ofstream file_;
    std::ostream* out_;
};

std::string csv_set(IndexSet u)
{
    return '"' + u.to_string() + '"';
}

//---------------------------------------------------------------------------//

int cmd_estimate(const Globals& g, const EstimateFlags& fl, std::ostream& out)
{
    const auto named = load_model(g.model);
    const int d = dimension(named.model);
    const IndexSet u = IndexSet::parse(fl.u, d);
    if (u.is_empty())
        throw InvalidArgument("--u must name at least one coordinate");

    const EstimatorTag tag = parse_tag(fl.estimator);
    auto kind = EstimatorKind::of(tag);
    if (tag == EstimatorTag::oracle1 || tag == EstimatorTag::oracle2)
        kind.center = fl.center ? *fl.center : analytic_mean(named.model);
    else if (fl.center)
        throw InvalidArgument("--center only applies to orcl1 and orcl2");
    if (tag == EstimatorTag::generalized) {
        kind.v = IndexSet::parse(fl.v, d);
        kind.v2 = IndexSet::parse(fl.v2, d);
    }
    validate(kind, u);
    if (fl.replicates < 1)
        throw InvalidArgument("--replicates must be at least 1");

    double estimate, se = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t evals;
    if (fl.replicates == 1) {
        const auto r = run_estimator(named.model, kind, u, fl.n, {g.seed, 0});
        estimate = r.estimate;
        if (r.std_error)
            se = *r.std_error;
        evals = r.evals;
    } else {
        // The CLI stays single-threaded.
        const auto reps = run_replicates(named.model, kind, u, fl.n,
                                         fl.replicates, g.seed, 1);
        const auto s = summarize_replicates(reps);
        estimate = s.mean;
        se = s.std_error;
        evals = s.evals;
    }

    Sink sink(g.out, out);
    auto& os = sink.stream();
    if (g.format == "json") {
        json doc{{"model", named.name},
                 {"estimator", kind.name()},
                 {"u", u.to_string()},
                 {"n", fl.n},
                 {"replicates", fl.replicates},
                 {"seed", g.seed},
                 {"estimate", estimate},
                 {"std_error", std::isnan(se) ? json(nullptr) : json(se)},
                 {"evals", evals}};
        if (tag == EstimatorTag::oracle1 || tag == EstimatorTag::oracle2)
            doc["center"] = kind.center;
        if (tag == EstimatorTag::generalized) {
            doc["v"] = kind.v.to_string();
            doc["v2"] = kind.v2.to_string();
        }
        if (tag == EstimatorTag::original)
            doc["biased"] = true;
        os << doc.dump(2) << '\n';
    } else if (g.format == "csv") {
        os << "model,estimator,u,n,replicates,seed,estimate,std_error,evals\n"
           << named.name << ',' << kind.name() << ',' << csv_set(u) << ','
           << fl.n << ',' << fl.replicates << ',' << g.seed << ','
           << format_real(estimate) << ',' << format_real(se) << ',' << evals
           << '\n';
    } else {
        os << "model      " << named.name << '\n'
           << "estimator  " << kind.name();
        if (tag == EstimatorTag::original)
            os << " (biased)";
        os << '\n' << "u          " << u.to_string() << '\n';
        if (tag == EstimatorTag::generalized)
            os << "v          " << kind.v.to_string() << '\n'
               << "v2         " << kind.v2.to_string() << '\n';
        if (tag == EstimatorTag::oracle1 || tag == EstimatorTag::oracle2)
            os << "center     " << format_real(kind.center) << '\n';
        os << "n          " << fl.n << '\n'
           << "replicates " << fl.replicates << '\n'
           << "estimate   " << format_real(estimate) << '\n'
           << "std_error  " << format_real(se) << '\n'
           << "evals      " << evals << '\n';
    }
    return kOk;
}

//---------------------------------------------------------------------------//

int cmd_efficiency_table(const Globals& g, const TableFlags& fl,
                         std::ostream& out, std::ostream& err)
{
    ExperimentConfig config;
    if (fl.paper != 0 && !fl.config.empty())
        throw InvalidArgument("--paper and --config are mutually exclusive");
    if (fl.paper == 2) {
        config = table2_config(fl.n, fl.replicates, g.seed);
    } else if (fl.paper == 3) {
        config = table3_config(fl.n, fl.replicates, g.seed);
    } else if (!fl.config.empty()) {
        std::ifstream in(fl.config);
        if (!in)
            throw InvalidArgument("cannot read config '" + fl.config + "'");
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::exception& e) {
            throw InvalidArgument("config '" + fl.config + "': " + e.what());
        }
        config = experiment_from_json(doc);
    } else {
        throw InvalidArgument("efficiency-table needs --paper 2|3 or --config");
    }
    if (fl.center)
        config.center = fl.center;
    if (fl.include_original)
        config.include_original = true;

    const auto table = run_experiment(config);
    for (const auto& row : table.rows)
        if (row.discrepancy)
            err << "note: " << table.model_name << " u=" << row.u.to_string()
                << " rel_index " << format_real(row.rel_index)
                << " differs from the published "
                << format_real(*row.reference_rel_index) << '\n';

    Sink sink(g.out, out);
    if (g.format == "json")
        sink.stream() << to_json(table).dump(2) << '\n';
    else
        write_csv(table, sink.stream());
    return kOk;
}

//---------------------------------------------------------------------------//

int cmd_anova(const Globals& g, const AnovaFlags& fl, std::ostream& out)
{
    const auto named = load_model(g.model);
    const int d = dimension(named.model);
    std::vector<IndexSet> sets;
    if (!fl.u.empty()) {
        sets.push_back(IndexSet::parse(fl.u, d));
    } else {
        if (d > 12)
            throw InvalidArgument("anova lists every subset only for d <= 12; "
                                  "pass --u");
        for (IndexSet s : IndexSet::full(d).subsets())
            if (!s.is_empty())
                sets.push_back(s);
        std::stable_sort(sets.begin(), sets.end(), [](IndexSet a, IndexSet b) {
            return a.size() < b.size();
        });
    }

    const AnovaReport a = analytic_anova(named.model);
    struct Row {
        IndexSet u;
        double effect, lower, upper;
        std::optional<double> reference;
    };
    std::vector<Row> rows;
    for (IndexSet s : sets) {
        Row r{s, a.effect(s), a.lower(s), a.upper(s),
              reference_rel_index(named.name, s)};
        if (r.reference
            && std::fabs(r.lower / a.sigma2 - *r.reference)
                   <= kReferenceTolerance)
            r.reference.reset();
        rows.push_back(r);
    }

    Sink sink(g.out, out);
    auto& os = sink.stream();
    if (g.format == "json") {
        json doc{{"model", named.name}, {"mu", a.mu}, {"sigma2", a.sigma2}};
        json arr = json::array();
        for (const auto& r : rows) {
            json j{{"u", r.u.to_string()},
                   {"sigma2_u", r.effect},
                   {"lower", r.lower},
                   {"upper", r.upper},
                   {"rel_lower", r.lower / a.sigma2},
                   {"rel_upper", r.upper / a.sigma2}};
            if (r.reference) {
                j["published_rel_lower"] = *r.reference;
                j["discrepancy"] = true;
            }
            arr.push_back(j);
        }
        doc["sets"] = arr;
        os << doc.dump(2) << '\n';
        return kOk;
    }
    if (g.format == "csv") {
        os << "u,sigma2_u,lower,upper,rel_lower,rel_upper,published_rel_lower\n";
        for (const auto& r : rows)
            os << csv_set(r.u) << ',' << format_real(r.effect) << ','
               << format_real(r.lower) << ',' << format_real(r.upper) << ','
               << format_real(r.lower / a.sigma2) << ','
               << format_real(r.upper / a.sigma2) << ','
               << (r.reference ? format_real(*r.reference) : "") << '\n';
        return kOk;
    }
    os << "model  " << named.name << '\n'
       << "mu     " << format_real(a.mu) << '\n'
       << "sigma2 " << format_real(a.sigma2) << '\n'
       << "u\tsigma2_u\tlower\tupper\tlower/sigma2\tupper/sigma2\n";
    for (const auto& r : rows)
        os << r.u.to_string() << '\t' << format_real(r.effect) << '\t'
           << format_real(r.lower) << '\t' << format_real(r.upper) << '\t'
           << format_real(r.lower / a.sigma2) << '\t'
           << format_real(r.upper / a.sigma2) << '\n';
    for (const auto& r : rows)
        if (r.reference)
            os << "note: u=" << r.u.to_string() << " lower/sigma2 = "
               << format_real(r.lower / a.sigma2)
               << " from the product formula; the published table lists "
               << format_real(*r.reference) << '\n';
    return kOk;
}

//---------------------------------------------------------------------------//

int cmd_verify(const Globals& g, const VerifyFlags& fl, std::ostream& out)
{
    VerifyOptions opt;
    opt.levels = fl.levels;
    opt.dims = fl.dims;
    opt.trials = fl.trials;
    opt.seed = g.seed;
    opt.corrupt_correlation2 = fl.corrupt;
    const auto report = run_verification(opt);

    Sink sink(g.out, out);
    auto& os = sink.stream();
    std::size_t passed = 0;
    for (const auto& c : report.checks)
        passed += c.passed ? 1 : 0;
    if (g.format == "json") {
        json arr = json::array();
        for (const auto& c : report.checks)
            arr.push_back({{"check", c.name},
                           {"passed", c.passed},
                           {"max_rel_error", c.max_rel_error},
                           {"detail", c.detail}});
        os << json{{"checks", arr},
                   {"passed", passed},
                   {"total", report.checks.size()}}
                  .dump(2)
           << '\n';
    } else if (g.format == "csv") {
        os << "check,passed,max_rel_error,detail\n";
        for (const auto& c : report.checks)
            os << '"' << c.name << "\"," << (c.passed ? "true" : "false")
               << ',' << format_real(c.max_rel_error) << ",\"" << c.detail
               << "\"\n";
    } else {
        for (const auto& c : report.checks)
            os << (c.passed ? "PASS " : "FAIL ") << c.name << " ["
               << c.detail << ", max rel err " << format_real(c.max_rel_error)
               << "]\n";
        os << passed << '/' << report.checks.size() << " checks passed\n";
    }
    return report.all_passed() ? kOk : kFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err)
{
    CLI::App app{"Sobol' index estimation with pick-freeze estimators",
                 "pickfreeze"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "RNG seed");
    app.add_option("--model", g.model,
                   "builtin model (g, product6) or model JSON file");
    app.add_option("--out", g.out, "write output to this file");
    app.add_option("--format", g.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));

    EstimateFlags ef;
    auto* est = app.add_subcommand("estimate", "estimate one Sobol' index");
    est->add_option("--u", ef.u, "index set, e.g. \"1,3\"")->required();
    est->add_option("--estimator", ef.estimator)
        ->check(CLI::IsMember(
            {"orig", "corr1", "corr2", "orcl1", "orcl2", "gen", "upper"}));
    est->add_option("--v", ef.v, "generalized estimator set v");
    est->add_option("--v2", ef.v2, "generalized estimator set v2");
    est->add_option("--n", ef.n, "samples");
    est->add_option("--center", ef.center, "oracle center (default: mean)");
    est->add_option("--replicates", ef.replicates);

    TableFlags tf;
    auto* tab = app.add_subcommand("efficiency-table",
                                   "efficiency of estimators vs corr1");
    tab->add_option("--paper", tf.paper, "builtin benchmark table")
        ->check(CLI::IsMember({2, 3}));
    tab->add_option("--config", tf.config, "experiment JSON file");
    tab->add_option("--n", tf.n, "samples per replicate");
    tab->add_option("--replicates", tf.replicates);
    tab->add_option("--center", tf.center, "oracle center");
    tab->add_flag("--include-original", tf.include_original);

    AnovaFlags af;
    auto* an = app.add_subcommand("anova", "analytic ANOVA of the model");
    an->add_option("--u", af.u, "report only this set");

    VerifyFlags vf;
    auto* ver = app.add_subcommand("verify",
                                   "exact identity checks by enumeration");
    ver->add_option("--levels", vf.levels);
    ver->add_option("--dims", vf.dims);
    ver->add_option("--trials", vf.trials);
    ver->add_flag("--corrupt", vf.corrupt)->group("");

    for (auto* sub : {est, tab, an, ver})
        sub->fallthrough();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n'
            << "run with --help for usage\n";
        return kUsage;
    }

    try {
        if (est->parsed())
            return cmd_estimate(g, ef, out);
        if (tab->parsed())
            return cmd_efficiency_table(g, tf, out, err);
        if (an->parsed())
            return cmd_anova(g, af, out);
        return cmd_verify(g, vf, out);
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const ResourceError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
}

}  // namespace pickfreeze::cli
