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

#include "pickfreeze/verification.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pickfreeze/estimators.hpp"
#include "pickfreeze/rng.hpp"

namespace pickfreeze {

namespace {

class Tally {
  public:
    Tally(double rel_tol, double scale) : tol_(rel_tol), scale_(scale) {}

    void check(double got, double want, const std::string& what)
    {
        ++count_;
        const double denom = std::max(std::fabs(want), 1e-6 * scale_);
        const double err = std::fabs(got - want) / denom;
        max_err_ = std::max(max_err_, err);
        if (!(err <= tol_) && first_failure_.empty()) {
            std::ostringstream os;
            os.precision(17);
            os << what << ": got " << got << ", want " << want;
            first_failure_ = os.str();
        }
    }

    VerifyCheck result(std::string name) const
    {
        VerifyCheck c;
        c.name = std::move(name);
        c.passed = first_failure_.empty();
        c.max_rel_error = max_err_;
        c.detail = c.passed ? std::to_string(count_) + " identities"
                            : first_failure_;
        return c;
    }

  private:
    double tol_;
    double scale_;
    double max_err_ = 0;
    int count_ = 0;
    std::string first_failure_;
};

VerifyCheck check_anova(const DiscreteModel& model, const AnovaReport& a,
                        double tol, const std::string& prefix)
{
    const int d = model.dim();
    Tally t(tol, a.sigma2 + a.mu * a.mu);
    bool ordered = true;
    const auto full = IndexSet::full(d);
    CompensatedSum effects;
    for (IndexSet u : full.subsets()) {
        const double lo = a.lower(u), hi = a.upper(u);
        const double slack = 1e-12 * (a.sigma2 + 1);
        if (lo < -slack || lo > hi + slack || hi > a.sigma2 + slack)
            ordered = false;
        t.check(lo, a.sigma2 - a.upper(u.complement()),
                "complement identity at " + u.to_string());
        if (!u.is_empty())
            effects.add(a.effect(u));
    }
    t.check(effects.value(), a.sigma2, "effect variances sum");
    t.check(a.effect(IndexSet::empty(d)), 0.0, "empty effect");

    // Effects rebuild f on every grid cell.
    const auto tables = discrete_effects(model);
    for (std::size_t i = 0; i < model.size(); ++i) {
        CompensatedSum f;
        for (std::uint64_t u = 0; u < tables.size(); ++u) {
            std::size_t s = 0, stride = 1;
            for (int j = 0; j < d; ++j) {
                if ((u >> j) & 1u) {
                    s += stride * static_cast<std::size_t>(model.digit(i, j));
                    stride *= static_cast<std::size_t>(model.levels());
                }
            }
            f.add(tables[u][s]);
        }
        t.check(f.value(), model.table()[i], "reconstruction");
    }
    auto c = t.result(prefix + "anova invariants");
    if (!ordered) {
        c.passed = false;
        c.detail = "ordering 0 <= lower <= upper <= sigma2 violated";
    }
    return c;
}

}  // namespace

bool VerifyReport::all_passed() const
{
    return std::all_of(checks.begin(), checks.end(),
                       [](const VerifyCheck& c) { return c.passed; });
}

DiscreteModel random_discrete_model(int levels, int dims, std::uint64_t seed,
                                    std::uint32_t trial)
{
    if (levels < 1 || dims < 1)
        throw InvalidArgument("random model needs levels >= 1 and dims >= 1");
    UniformStream rng({seed, trial}, Role::x);
    constexpr std::size_t kMaxCells = std::size_t{1} << 26;
    std::size_t cells = 1;
    for (int j = 0; j < dims; ++j) {
        cells *= static_cast<std::size_t>(levels);
        if (cells > kMaxCells)
            throw ResourceError("random model of " + std::to_string(levels)
                                + "^" + std::to_string(dims)
                                + " cells is too large");
    }
    std::vector<double> table(cells);
    for (auto& v : table)
        v = 4.0 * rng.next() - 1.0;
    return DiscreteModel(levels, dims, std::move(table));
}

VerifyReport run_verification(const VerifyOptions& opt)
{
    if (opt.levels < 2 || opt.dims < 1 || opt.trials < 1)
        throw InvalidArgument("verify needs levels >= 2, dims >= 1, "
                              "trials >= 1");
    if (opt.dims > kMaxDim)
        throw InvalidArgument("verify dims must be at most "
                              + std::to_string(kMaxDim));
    {
        // Budget first: the generalized kind enumerates four vectors.
        std::uint64_t cells = 1;
        for (int j = 0; j < opt.dims; ++j) {
            if (cells > opt.budget.max_states / opt.levels) {
                cells = opt.budget.max_states + 1;
                break;
            }
            cells *= static_cast<std::uint64_t>(opt.levels);
        }
        std::uint64_t states = 1;
        for (int k = 0; k < 4; ++k) {
            if (states > opt.budget.max_states / cells) {
                states = opt.budget.max_states + 1;
                break;
            }
            states *= cells;
        }
        if (states > opt.budget.max_states)
            throw ResourceError("verify: enumeration of four vectors over "
                                + std::to_string(opt.levels) + "^"
                                + std::to_string(opt.dims)
                                + " cells exceeds the budget of "
                                + std::to_string(opt.budget.max_states)
                                + " states");
    }

    VerifyReport report;
    for (int trial = 0; trial < opt.trials; ++trial) {
        const auto model = random_discrete_model(
            opt.levels, opt.dims, opt.seed, static_cast<std::uint32_t>(trial));
        const auto anova = discrete_anova(model);
        const std::string prefix = "trial " + std::to_string(trial) + ": ";
        report.checks.push_back(check_anova(model, anova, opt.rel_tol, prefix));

        const double scale = anova.sigma2 + anova.mu * anova.mu;
        Tally kinds(opt.rel_tol, scale);
        Tally general(opt.rel_tol, scale);
        auto f = [&](const Point& p) { return model(p); };
        const auto full = IndexSet::full(opt.dims);
        for (IndexSet u : full.subsets()) {
            if (u.is_empty())
                continue;
            const double lower = anova.lower(u);
            for (const auto& kind :
                 {EstimatorKind::correlation1(), EstimatorKind::correlation2(),
                  EstimatorKind::oracle1(anova.mu),
                  EstimatorKind::oracle2(anova.mu)}) {
                double got;
                if (opt.corrupt_correlation2
                    && kind.tag == EstimatorTag::correlation2) {
                    got = enumerate_term(
                              model, 3,
                              [&](const SampleBlock& b) {
                                  return (f(b.x) - f(blend(b.x, b.z, u)))
                                         * (f(blend(b.x, b.y, u)) - f(b.y));
                              },
                              opt.budget)
                              .expectation;
                } else {
                    got = enumerate_expectation(model, kind, u, opt.budget)
                              .expectation;
                }
                kinds.check(got, lower, kind.name() + " at " + u.to_string());
            }
            kinds.check(enumerate_expectation(model, EstimatorKind::upper(), u,
                                              opt.budget)
                            .expectation,
                        anova.upper(u), "upper at " + u.to_string());
            kinds.check(enumerate_expectation(model, EstimatorKind::original(),
                                              u, opt.budget)
                            .expectation,
                        anova.mu * anova.mu + lower,
                        "original cross moment at " + u.to_string());

            const IndexSet rest = u.complement();
            for (IndexSet v : rest.subsets())
                for (IndexSet v2 : rest.subsets())
                    general.check(
                        enumerate_expectation(
                            model, EstimatorKind::generalized(v, v2), u,
                            opt.budget)
                            .expectation,
                        lower,
                        "generalized v=" + v.to_string() + " v2="
                            + v2.to_string() + " at " + u.to_string());
        }
        report.checks.push_back(kinds.result(prefix + "estimator expectations"));
        report.checks.push_back(
            general.result(prefix + "generalized four-vector identity"));

        // Variance identity Var(term) = E(Q_v Q_uv2) - lower^2 on a
        // discrete product model.
        std::vector<std::vector<double>> levels(opt.dims);
        UniformStream rng({opt.seed, static_cast<std::uint32_t>(trial)},
                          Role::y);
        for (auto& lv : levels)
            for (int k = 0; k < opt.levels; ++k)
                lv.push_back(0.5 + 2.0 * rng.next());
        const auto dp = discrete_product(levels);
        const IndexSet u = IndexSet::of(opt.dims, {1});
        const double lower = dp.product.lower(u);
        Tally prop(1e-9, dp.product.variance() + lower);
        for (IndexSet v : {u.complement(), IndexSet::empty(opt.dims)}) {
            const auto kind = EstimatorKind::generalized(v, v);
            const auto var = enumerate_expectation(dp.discrete, kind, u,
                                                   opt.budget);
            const auto qq = enumerate_term(
                dp.discrete, 4,
                [&](const SampleBlock& b) {
                    return q_v(dp.product, b.x, b.z, v)
                           * q_uv(dp.product, b.x, b.y, b.w, u, v);
                },
                opt.budget);
            prop.check(var.expectation, lower, "product lower at v=" + v.to_string());
            prop.check(var.variance, qq.expectation - lower * lower,
                       "variance identity at v=" + v.to_string());
        }
        report.checks.push_back(prop.result(prefix + "fourth-moment variance identity"));
    }
    return report;
}

}  // namespace pickfreeze
