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

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pickfreeze/core.hpp"
#include "pickfreeze/models.hpp"
#include "pickfreeze/rng.hpp"

namespace pickfreeze {

enum class EstimatorTag {
    original,
    correlation1,
    correlation2,
    oracle1,
    oracle2,
    generalized,
    upper
};

//---------------------------------------------------------------------------//
/*!
 * Which per-sample term to average.
 *
 * All kinds except `original` and `upper` are unbiased for the closed index
 * lower_u; `upper` targets the total index upper_u; `original` is the
 * cross moment f(x) f(x_u:y) whose mean is mu^2 + lower_u.
 */
struct EstimatorKind {
    EstimatorTag tag = EstimatorTag::correlation1;
    double center = 0;  // oracle1/oracle2 only
    IndexSet v;         // generalized only, subset of u^c
    IndexSet v2;        // generalized only, subset of u^c

    static EstimatorKind of(EstimatorTag tag, double center = 0,
                            IndexSet v = {}, IndexSet v2 = {})
    {
        EstimatorKind k;
        k.tag = tag;
        k.center = center;
        k.v = v;
        k.v2 = v2;
        return k;
    }
    static EstimatorKind original() { return of(EstimatorTag::original); }
    static EstimatorKind correlation1() { return of(EstimatorTag::correlation1); }
    static EstimatorKind correlation2() { return of(EstimatorTag::correlation2); }
    static EstimatorKind oracle1(double c) { return of(EstimatorTag::oracle1, c); }
    static EstimatorKind oracle2(double c) { return of(EstimatorTag::oracle2, c); }
    static EstimatorKind generalized(IndexSet v, IndexSet v2)
    {
        return of(EstimatorTag::generalized, 0, v, v2);
    }
    static EstimatorKind upper() { return of(EstimatorTag::upper); }

    // Short name: orig, corr1, corr2, orcl1, orcl2, gen, upper.
    std::string name() const;
};

std::string_view tag_name(EstimatorTag tag);
EstimatorTag parse_tag(std::string_view name);

/// Function evaluations per sample: original 2, corr1 3, corr2 4,
/// orcl1 3, orcl2 2, generalized 4, upper 2.
int cost(const EstimatorKind& kind);
/// Independent input vectors a kind consumes (x, y[, z[, w]]).
int vector_count(const EstimatorKind& kind);
/// Throws InvalidArgument on dimension mismatch, a generalized v or v2
/// that meets u, or a non-finite oracle center.
void validate(const EstimatorKind& kind, IndexSet u);

/// Streaming count, mean and sum of squared deviations (Welford); merges
/// with the pairwise update of Chan et al.
class Accumulator {
  public:
    void push(double x) noexcept
    {
        ++n_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (x - mean_);
    }
    void merge(const Accumulator& other) noexcept;

    std::uint64_t count() const noexcept { return n_; }
    double mean() const noexcept { return mean_; }
    double m2() const noexcept { return m2_; }
    // Unbiased, (n - 1) divisor; NaN below two samples.
    double variance() const noexcept;
    double std_error() const noexcept;

  private:
    std::uint64_t n_ = 0;
    double mean_ = 0;
    double m2_ = 0;
};

struct EstimateReport {
    EstimatorKind kind;
    IndexSet u;
    std::uint64_t n = 0;
    double estimate = 0;
    // Absent for the biased original estimator.
    std::optional<double> term_variance;
    std::optional<double> std_error;
    std::uint64_t evals = 0;
    bool biased = false;
};

//---------------------------------------------------------------------------//
// Per-sample terms

namespace detail {

// Evaluates f at blends of the block's points, uncached.
template <class F>
struct DirectSource {
    F& f;
    const SampleBlock& block;

    double point(Role r) { return f(block[r]); }
    double blended(Role a, Role b, IndexSet m)
    {
        return f(blend(block[a], block[b], m));
    }
};

}  // namespace detail

/// The per-sample term of `kind` for set u, reading f values through a
/// source with point(Role) and blended(Role a, Role b, IndexSet m) =
/// f(blend(a, b, m)). Assumes validate(kind, u) has passed.
template <class Source>
double term_value(Source&& src, const EstimatorKind& kind, IndexSet u)
{
    using R = Role;
    switch (kind.tag) {
    case EstimatorTag::original: {
        const double fx = src.point(R::x);
        return fx * src.blended(R::x, R::y, u);
    }
    case EstimatorTag::correlation1: {
        const double fx = src.point(R::x);
        return fx * (src.blended(R::x, R::y, u) - src.point(R::y));
    }
    case EstimatorTag::correlation2: {
        const double left = src.point(R::x) - src.blended(R::z, R::x, u);
        return left * (src.blended(R::x, R::y, u) - src.point(R::y));
    }
    case EstimatorTag::oracle1: {
        const double left = src.point(R::x) - kind.center;
        return left * (src.blended(R::x, R::y, u) - src.point(R::y));
    }
    case EstimatorTag::oracle2: {
        const double left = src.point(R::x) - kind.center;
        return left * (src.blended(R::x, R::y, u) - kind.center);
    }
    case EstimatorTag::generalized: {
        const double left = src.point(R::x) - src.blended(R::x, R::z, kind.v);
        return left
               * (src.blended(R::x, R::y, u)
                  - src.blended(R::y, R::w, kind.v2));
    }
    case EstimatorTag::upper: {
        const double diff = src.point(R::x) - src.blended(R::y, R::x, u);
        return 0.5 * diff * diff;
    }
    }
    return 0;
}

template <class F>
double term(F&& f, const EstimatorKind& kind, const SampleBlock& block,
            IndexSet u)
{
    return term_value(detail::DirectSource<F>{f, block}, kind, u);
}

/// f(x) (f(x_u:y) - f(y))
template <class F>
double term_correlation1(F&& f, const Point& x, const Point& y, IndexSet u)
{
    return term(f, EstimatorKind::correlation1(), SampleBlock{x, y, {}, {}},
                u);
}

/// (f(x) - f(z_u:x)) (f(x_u:y) - f(y))
template <class F>
double term_correlation2(F&& f, const Point& x, const Point& y,
                         const Point& z, IndexSet u)
{
    return term(f, EstimatorKind::correlation2(), SampleBlock{x, y, z, {}},
                u);
}

/// (f(x) - c) (f(x_u:y) - f(y))
template <class F>
double term_oracle1(F&& f, const Point& x, const Point& y, IndexSet u,
                    double c)
{
    return term(f, EstimatorKind::oracle1(c), SampleBlock{x, y, {}, {}}, u);
}

/// (f(x) - c) (f(x_u:y) - c)
template <class F>
double term_oracle2(F&& f, const Point& x, const Point& y, IndexSet u,
                    double c)
{
    return term(f, EstimatorKind::oracle2(c), SampleBlock{x, y, {}, {}}, u);
}

/// (f(x) - f(x_v:z)) (f(x_u:y) - f(y_{v2}:w)), for v, v2 inside u^c.
template <class F>
double term_generalized(F&& f, const Point& x, const Point& y,
                        const Point& z, const Point& w, IndexSet u,
                        IndexSet v, IndexSet v2)
{
    auto kind = EstimatorKind::generalized(v, v2);
    validate(kind, u);
    return term(f, kind, SampleBlock{x, y, z, w}, u);
}

/// (1/2) (f(x) - f(y_u:x))^2, unbiased for the total index upper_u.
template <class F>
double term_upper(F&& f, const Point& x, const Point& y, IndexSet u)
{
    return term(f, EstimatorKind::upper(), SampleBlock{x, y, {}, {}}, u);
}

/// (1/n) sum f(x_i) f(x_i,u:y_i) - mu_hat^2 with
/// mu_hat = (1/2n) sum (f(x_i) + f(x_i,u:y_i)). Biased; no variance.
template <class F>
EstimateReport estimate_original(F&& f, std::span<const SampleBlock> samples,
                                 IndexSet u)
{
    if (samples.size() < 2)
        throw InvalidArgument("original estimator needs n >= 2");
    Accumulator cross, level;
    for (const auto& b : samples) {
        const double fx = f(b.x);
        const double fb = f(blend(b.x, b.y, u));
        cross.push(fx * fb);
        level.push(0.5 * (fx + fb));
    }
    EstimateReport r;
    r.kind = EstimatorKind::original();
    r.u = u;
    r.n = samples.size();
    r.estimate = cross.mean() - level.mean() * level.mean();
    r.evals = 2 * r.n;
    r.biased = true;
    return r;
}

//---------------------------------------------------------------------------//
/*!
 * Per-sample memo of f at blends of one SampleBlock.
 *
 * Blends are keyed canonically (x_u:y equals y_{-u}:x; an empty or full
 * mask collapses to a single point), so sets sharing a sample never pay
 * twice for the same input.
 */
class BlendCache {
  public:
    template <class F>
    double get(F& f, const SampleBlock& block, Role a, Role b, IndexSet m)
    {
        Key key = canonical(a, b, m);
        for (const auto& e : entries_)
            if (e.key == key)
                return e.value;
        const double v = key.a == key.b
                             ? f(block[key.a])
                             : f(blend(block[key.a], block[key.b],
                                       IndexSet::from_mask(key.mask, m.dim())));
        entries_.push_back({key, v});
        return v;
    }
    void clear() noexcept { entries_.clear(); }

  private:
    struct Key {
        Role a;
        Role b;
        std::uint64_t mask;
        bool operator==(const Key&) const = default;
    };
    struct Entry {
        Key key;
        double value;
    };
    static Key canonical(Role a, Role b, IndexSet m)
    {
        const std::uint64_t full = IndexSet::full_mask(m.dim());
        if (a == b || m.bits() == full)
            return {a, a, full};
        if (m.bits() == 0)
            return {b, b, full};
        if (a > b)
            return {b, a, ~m.bits() & full};
        return {a, b, m.bits()};
    }

    std::vector<Entry> entries_;
};

template <class F>
struct CachedSource {
    F& f;
    const SampleBlock& block;
    BlendCache& cache;

    double point(Role r)
    {
        return cache.get(f, block, r, r, IndexSet::full(block.x.dim()));
    }
    double blended(Role a, Role b, IndexSet m)
    {
        return cache.get(f, block, a, b, m);
    }
};

//---------------------------------------------------------------------------//
// Sampling runs

/// n i.i.d. samples of one replicate stream; estimate = mean term,
/// term_variance = m2 / (n - 1). Evals count every call (n * cost).
EstimateReport run_estimator(const Model& model, const EstimatorKind& kind,
                             IndexSet u, std::uint64_t n, RngSpec rng);

/// One pass over shared samples for several sets; evals counts distinct
/// evaluations only. Original is not supported here.
std::vector<EstimateReport> run_multi_u(const Model& model,
                                        const EstimatorKind& kind,
                                        std::span<const IndexSet> us,
                                        std::uint64_t n, RngSpec rng);

/// Replicates 0..R-1 of run_estimator, in parallel, ordered by replicate.
std::vector<EstimateReport> run_replicates(const Model& model,
                                           const EstimatorKind& kind,
                                           IndexSet u, std::uint64_t n,
                                           std::uint32_t replicates,
                                           std::uint64_t seed,
                                           unsigned threads = 0);

struct ReplicateSummary {
    double mean = 0;
    double std_error = 0;  // spread of replicate estimates / sqrt(R)
    std::uint64_t evals = 0;
};
ReplicateSummary summarize_replicates(std::span<const EstimateReport> reps);

}  // namespace pickfreeze
