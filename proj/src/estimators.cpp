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

#include "pickfreeze/estimators.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "pickfreeze/parallel.hpp"

namespace pickfreeze {

std::string_view tag_name(EstimatorTag tag)
{
    switch (tag) {
    case EstimatorTag::original: return "orig";
    case EstimatorTag::correlation1: return "corr1";
    case EstimatorTag::correlation2: return "corr2";
    case EstimatorTag::oracle1: return "orcl1";
    case EstimatorTag::oracle2: return "orcl2";
    case EstimatorTag::generalized: return "gen";
    case EstimatorTag::upper: return "upper";
    }
    return "?";
}

EstimatorTag parse_tag(std::string_view name)
{
    for (auto tag :
         {EstimatorTag::original, EstimatorTag::correlation1,
          EstimatorTag::correlation2, EstimatorTag::oracle1,
          EstimatorTag::oracle2, EstimatorTag::generalized,
          EstimatorTag::upper}) {
        if (tag_name(tag) == name)
            return tag;
    }
    throw InvalidArgument("unknown estimator '" + std::string(name)
                          + "' (expected orig, corr1, corr2, orcl1, orcl2, "
                            "gen or upper)");
}

std::string EstimatorKind::name() const
{
    return std::string(tag_name(tag));
}

int cost(const EstimatorKind& kind)
{
    switch (kind.tag) {
    case EstimatorTag::original: return 2;
    case EstimatorTag::correlation1: return 3;
    case EstimatorTag::correlation2: return 4;
    case EstimatorTag::oracle1: return 3;
    case EstimatorTag::oracle2: return 2;
    case EstimatorTag::generalized: return 4;
    case EstimatorTag::upper: return 2;
    }
    return 0;
}

int vector_count(const EstimatorKind& kind)
{
    switch (kind.tag) {
    case EstimatorTag::correlation2: return 3;
    case EstimatorTag::generalized: return 4;
    default: return 2;
    }
}

void validate(const EstimatorKind& kind, IndexSet u)
{
    if (kind.tag == EstimatorTag::oracle1 || kind.tag == EstimatorTag::oracle2)
        if (!std::isfinite(kind.center))
            throw InvalidArgument("oracle center must be finite");
    if (kind.tag != EstimatorTag::generalized)
        return;
    if (kind.v.dim() != u.dim() || kind.v2.dim() != u.dim())
        throw InvalidArgument("generalized estimator: v and v2 must have the "
                              "dimension of u");
    if (!kind.v.is_disjoint(u))
        throw InvalidArgument("generalized estimator: v = " + kind.v.to_string()
                              + " overlaps u = " + u.to_string());
    if (!kind.v2.is_disjoint(u))
        throw InvalidArgument("generalized estimator: v2 = "
                              + kind.v2.to_string() + " overlaps u = "
                              + u.to_string());
}

//---------------------------------------------------------------------------//

void Accumulator::merge(const Accumulator& other) noexcept
{
    if (other.n_ == 0)
        return;
    if (n_ == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(other.n_);
    const double n = na + nb;
    const double delta = other.mean_ - mean_;
    mean_ += delta * (nb / n);
    m2_ += other.m2_ + delta * delta * (na * nb / n);
    n_ += other.n_;
}

double Accumulator::variance() const noexcept
{
    if (n_ < 2)
        return std::numeric_limits<double>::quiet_NaN();
    return m2_ / static_cast<double>(n_ - 1);
}

double Accumulator::std_error() const noexcept
{
    return std::sqrt(variance() / static_cast<double>(n_));
}

//---------------------------------------------------------------------------//

namespace {

void check_set(const Model& model, IndexSet u)
{
    if (u.dim() != dimension(model))
        throw InvalidArgument("index set " + u.to_string() + " has dimension "
                              + std::to_string(u.dim())
                              + ", model has dimension "
                              + std::to_string(dimension(model)));
}

EstimateReport run_original(const Model& model, IndexSet u, std::uint64_t n,
                            RngSpec rng)
{
    if (n < 2)
        throw InvalidArgument("original estimator needs n >= 2");
    EvalCounter counter;
    CountingFunction f(model, counter);
    SampleStream stream(rng, dimension(model));
    Accumulator cross, level;
    for (std::uint64_t i = 0; i < n; ++i) {
        const SampleBlock b = stream.next();
        const double fx = f(b.x);
        const double fb = f(blend(b.x, b.y, u));
        cross.push(fx * fb);
        level.push(0.5 * (fx + fb));
    }
    EstimateReport r;
    r.kind = EstimatorKind::original();
    r.u = u;
    r.n = n;
    r.estimate = cross.mean() - level.mean() * level.mean();
    r.evals = counter.count();
    r.biased = true;
    return r;
}

EstimateReport make_report(const EstimatorKind& kind, IndexSet u,
                           const Accumulator& acc, std::uint64_t evals)
{
    EstimateReport r;
    r.kind = kind;
    r.u = u;
    r.n = acc.count();
    r.estimate = acc.mean();
    if (acc.count() >= 2) {
        r.term_variance = acc.variance();
        r.std_error = acc.std_error();
    }
    r.evals = evals;
    return r;
}

}  // namespace

EstimateReport run_estimator(const Model& model, const EstimatorKind& kind,
                             IndexSet u, std::uint64_t n, RngSpec rng)
{
    check_set(model, u);
    validate(kind, u);
    if (kind.tag == EstimatorTag::original)
        return run_original(model, u, n, rng);
    if (n < 1)
        throw InvalidArgument("need at least one sample");

    EvalCounter counter;
    CountingFunction f(model, counter);
    SampleStream stream(rng, dimension(model));
    Accumulator acc;
    for (std::uint64_t i = 0; i < n; ++i)
        acc.push(term(f, kind, stream.next(), u));
    return make_report(kind, u, acc, counter.count());
}

std::vector<EstimateReport> run_multi_u(const Model& model,
                                        const EstimatorKind& kind,
                                        std::span<const IndexSet> us,
                                        std::uint64_t n, RngSpec rng)
{
    if (kind.tag == EstimatorTag::original)
        throw InvalidArgument("run_multi_u does not support the original "
                              "estimator");
    if (n < 1)
        throw InvalidArgument("need at least one sample");
    for (auto u : us) {
        check_set(model, u);
        validate(kind, u);
    }

    EvalCounter counter;
    CountingFunction f(model, counter);
    SampleStream stream(rng, dimension(model));
    std::vector<Accumulator> acc(us.size());
    BlendCache cache;
    for (std::uint64_t i = 0; i < n; ++i) {
        const SampleBlock b = stream.next();
        cache.clear();
        CachedSource<CountingFunction> src{f, b, cache};
        for (std::size_t k = 0; k < us.size(); ++k)
            acc[k].push(term_value(src, kind, us[k]));
    }

    std::vector<EstimateReport> out;
    out.reserve(us.size());
    for (std::size_t k = 0; k < us.size(); ++k)
        out.push_back(make_report(kind, us[k], acc[k], counter.count()));
    return out;
}

std::vector<EstimateReport> run_replicates(const Model& model,
                                           const EstimatorKind& kind,
                                           IndexSet u, std::uint64_t n,
                                           std::uint32_t replicates,
                                           std::uint64_t seed,
                                           unsigned threads)
{
    if (replicates < 1)
        throw InvalidArgument("need at least one replicate");
    check_set(model, u);
    validate(kind, u);
    std::vector<EstimateReport> out(replicates);
    parallel_for(replicates, threads, [&](std::size_t r) {
        out[r] = run_estimator(model, kind, u, n,
                               {seed, static_cast<std::uint32_t>(r)});
    });
    return out;
}

ReplicateSummary summarize_replicates(std::span<const EstimateReport> reps)
{
    Accumulator acc;
    ReplicateSummary s;
    for (const auto& r : reps) {
        acc.push(r.estimate);
        s.evals += r.evals;
    }
    s.mean = acc.mean();
    s.std_error = reps.size() >= 2 ? acc.std_error() : 0.0;
    return s;
}

}  // namespace pickfreeze
