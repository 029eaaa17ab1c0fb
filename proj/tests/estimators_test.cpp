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

#include <cmath>
#include <vector>

#include "oracle.hpp"
#include "pickfreeze/estimators.hpp"
#include "pickfreeze/models.hpp"
#include "pickfreeze/rng.hpp"

using namespace pickfreeze;

namespace {

double bilinear(const Point& p)
{
    return p[0] + 10 * p[1] + 100 * p[0] * p[1];
}

struct Fixture {
    Point x = Point::of({0.1, 0.2});
    Point y = Point::of({0.3, 0.4});
    Point z = Point::of({0.5, 0.6});
    Point w = Point::of({0.7, 0.8});
    IndexSet u = IndexSet::of(2, {1});
    SampleBlock block() const { return {x, y, z, w}; }
};

std::vector<EstimatorKind> all_kinds(IndexSet u)
{
    std::vector<EstimatorKind> out{
        EstimatorKind::correlation1(), EstimatorKind::correlation2(),
        EstimatorKind::oracle1(2.5), EstimatorKind::oracle2(2.5),
        EstimatorKind::upper(), EstimatorKind::original()};
    for (IndexSet v : u.complement().subsets())
        for (IndexSet v2 : u.complement().subsets())
            out.push_back(EstimatorKind::generalized(v, v2));
    return out;
}

}  // namespace

// f(x)=4.1, f(y)=16.3, f(x_u:y)=8.1, f(z_u:x)=12.5, f(y_u:x)=8.3,
// f(z)=36.5, f(w)=64.7, f(w_1,y_2)=32.7.
TEST(Terms, HandComputed)
{
    Fixture t;
    EXPECT_NEAR(term_correlation1(bilinear, t.x, t.y, t.u), -33.62, 1e-12);
    EXPECT_NEAR(term_correlation2(bilinear, t.x, t.y, t.z, t.u), 68.88, 1e-12);
    EXPECT_NEAR(term_oracle1(bilinear, t.x, t.y, t.u, 5.0), 7.38, 1e-12);
    EXPECT_NEAR(term_oracle2(bilinear, t.x, t.y, t.u, 5.0), -2.79, 1e-12);
    EXPECT_NEAR(term_upper(bilinear, t.x, t.y, t.u), 8.82, 1e-12);
    const auto v = t.u.complement();
    EXPECT_NEAR(term_generalized(bilinear, t.x, t.y, t.z, t.w, t.u, v, v),
                206.64, 1e-10);
    const auto e = IndexSet::empty(2);
    EXPECT_NEAR(term_generalized(bilinear, t.x, t.y, t.z, t.w, t.u, e, e),
                1833.84, 1e-9);
    EXPECT_NEAR(term(bilinear, EstimatorKind::original(), t.block(), t.u),
                33.21, 1e-12);
}

TEST(Terms, GeneralizedWithEmptyV)
{
    // v = {} and v2 = u^c with w = y: (f(x) - f(z)) (f(x_u:y) - f(y)).
    Fixture t;
    const auto v2 = t.u.complement();
    const auto e = IndexSet::empty(2);
    EXPECT_NEAR(term_generalized(bilinear, t.x, t.y, t.z, t.y, t.u, e, v2),
                (4.1 - 36.5) * (8.1 - 16.3), 1e-10);
}

TEST(Terms, Validation)
{
    Fixture t;
    const auto bad = IndexSet::of(2, {1});
    EXPECT_THROW(term_generalized(bilinear, t.x, t.y, t.z, t.w, t.u, bad,
                                  IndexSet::empty(2)),
                 InvalidArgument);
    EXPECT_THROW(term_generalized(bilinear, t.x, t.y, t.z, t.w, t.u,
                                  IndexSet::empty(2), bad),
                 InvalidArgument);
    EXPECT_THROW(validate(EstimatorKind::oracle2(NAN), t.u), InvalidArgument);
    EXPECT_THROW(validate(EstimatorKind::generalized(IndexSet::empty(3),
                                                     IndexSet::empty(2)),
                          t.u),
                 InvalidArgument);
}

TEST(Terms, ZeroWhenConstantInU)
{
    // f ignores coordinates 1 and 3.
    auto f = [](const Point& p) { return std::exp(p[1]) + p[3] * p[3]; };
    const auto u = IndexSet::of(4, {1, 3});
    SampleStream s({9, 0}, 4);
    for (int i = 0; i < 1000; ++i) {
        const auto b = s.next();
        EXPECT_EQ(term(f, EstimatorKind::correlation2(), b, u), 0.0);
        EXPECT_EQ(term(f, EstimatorKind::upper(), b, u), 0.0);
    }
}

TEST(Kinds, CostsAndNames)
{
    const auto e = IndexSet::empty(1);
    EXPECT_EQ(cost(EstimatorKind::original()), 2);
    EXPECT_EQ(cost(EstimatorKind::correlation1()), 3);
    EXPECT_EQ(cost(EstimatorKind::correlation2()), 4);
    EXPECT_EQ(cost(EstimatorKind::oracle1(0)), 3);
    EXPECT_EQ(cost(EstimatorKind::oracle2(0)), 2);
    EXPECT_EQ(cost(EstimatorKind::generalized(e, e)), 4);
    EXPECT_EQ(cost(EstimatorKind::upper()), 2);
    EXPECT_EQ(vector_count(EstimatorKind::correlation2()), 3);
    EXPECT_EQ(vector_count(EstimatorKind::generalized(e, e)), 4);
    EXPECT_EQ(vector_count(EstimatorKind::oracle2(0)), 2);
    for (const char* n : {"orig", "corr1", "corr2", "orcl1", "orcl2", "gen",
                          "upper"})
        EXPECT_EQ(tag_name(parse_tag(n)), n);
    EXPECT_THROW(parse_tag("corr3"), InvalidArgument);
}

TEST(Accumulator, MergeMatchesSequential)
{
    UniformStream s({4, 0}, Role::x);
    Accumulator all, a, b;
    for (int i = 0; i < 1000; ++i) {
        const double v = 1e6 + s.next();
        all.push(v);
        (i < 300 ? a : b).push(v);
    }
    a.merge(b);
    EXPECT_EQ(a.count(), all.count());
    EXPECT_NEAR(a.mean(), all.mean(), 1e-9);
    EXPECT_NEAR(a.variance(), all.variance(), 1e-10);

    Accumulator small;
    for (double v : {2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0})
        small.push(v);
    EXPECT_DOUBLE_EQ(small.mean(), 5.0);
    EXPECT_DOUBLE_EQ(small.variance(), 32.0 / 7.0);
    Accumulator one;
    one.push(1.0);
    EXPECT_TRUE(std::isnan(one.variance()));
    Accumulator empty;
    one.merge(empty);
    EXPECT_EQ(one.count(), 1u);
}

TEST(BlendCache, CachedMatchesDirect)
{
    const Model m = builtin_product6();
    auto f = [&](const Point& p) { return evaluate(m, p); };
    SampleStream s({2, 0}, 6);
    BlendCache cache;
    const IndexSet sets[] = {IndexSet::of(6, {1}), IndexSet::of(6, {2, 5}),
                             IndexSet::full(6)};
    for (int i = 0; i < 50; ++i) {
        const auto b = s.next();
        cache.clear();
        for (IndexSet u : sets) {
            for (const auto& kind : all_kinds(u)) {
                if (kind.tag == EstimatorTag::generalized && u.size() < 5
                    && kind.v.size() + kind.v2.size() > 2)
                    continue;
                CachedSource<decltype(f)&> src{f, b, cache};
                EXPECT_EQ(term_value(src, kind, u), term(f, kind, b, u))
                    << kind.name() << ' ' << u.to_string();
            }
        }
    }
}

TEST(Runs, EvalCountsAndDeterminism)
{
    const Model m = builtin_product6();
    const auto u = IndexSet::of(6, {5});
    for (const auto& kind :
         {EstimatorKind::correlation1(), EstimatorKind::correlation2(),
          EstimatorKind::oracle1(1), EstimatorKind::oracle2(1),
          EstimatorKind::upper(), EstimatorKind::original()}) {
        const auto a = run_estimator(m, kind, u, 1000, {3, 1});
        const auto b = run_estimator(m, kind, u, 1000, {3, 1});
        EXPECT_EQ(a.evals, 1000u * cost(kind)) << kind.name();
        EXPECT_EQ(a.estimate, b.estimate);
        EXPECT_EQ(a.biased, kind.tag == EstimatorTag::original);
        EXPECT_EQ(a.std_error.has_value(), !a.biased);
    }
    EXPECT_THROW(run_estimator(m, EstimatorKind::correlation1(),
                               IndexSet::of(3, {1}), 10, {}),
                 InvalidArgument);
}

TEST(Runs, OriginalSpanMatchesRunner)
{
    const Model m = builtin_g_function();
    const auto u = IndexSet::of(3, {2});
    SampleStream s({8, 0}, 3);
    std::vector<SampleBlock> blocks;
    for (int i = 0; i < 500; ++i)
        blocks.push_back(s.next());
    auto f = [&](const Point& p) { return evaluate(m, p); };
    const auto a = estimate_original(f, blocks, u);
    const auto b = run_estimator(m, EstimatorKind::original(), u, 500, {8, 0});
    EXPECT_EQ(a.estimate, b.estimate);
    EXPECT_EQ(a.evals, 1000u);
    EXPECT_TRUE(a.biased);
    EXPECT_THROW(estimate_original(f, std::span(blocks).first(1), u),
                 InvalidArgument);
}

TEST(Runs, MultiUSharesEvaluations)
{
    const Model m = builtin_g_function();
    const IndexSet us[] = {IndexSet::of(3, {1}), IndexSet::of(3, {2})};
    const auto reps = run_multi_u(m, EstimatorKind::correlation1(), us, 100,
                                  {1, 0});
    // f(x), f(y), f(x_1:y), f(x_2:y) per sample.
    EXPECT_EQ(reps[0].evals, 400u);
    const auto single = run_estimator(m, EstimatorKind::correlation1(), us[1],
                                      100, {1, 0});
    EXPECT_DOUBLE_EQ(reps[1].estimate, single.estimate);
    EXPECT_THROW(run_multi_u(m, EstimatorKind::original(), us, 10, {}),
                 InvalidArgument);
}

TEST(Runs, ReplicatesIndependentOfThreads)
{
    const Model m = builtin_g_function();
    const auto u = IndexSet::of(3, {3});
    const auto a = run_replicates(m, EstimatorKind::oracle2(27), u, 2000, 6, 5, 1);
    const auto b = run_replicates(m, EstimatorKind::oracle2(27), u, 2000, 6, 5, 4);
    ASSERT_EQ(a.size(), 6u);
    for (std::size_t r = 0; r < a.size(); ++r)
        EXPECT_EQ(a[r].estimate, b[r].estimate);
    const auto s = summarize_replicates(a);
    EXPECT_EQ(s.evals, 6u * 2000u * 2u);
    EXPECT_GT(s.std_error, 0.0);
}

TEST(Runs, UnbiasedOnProduct6)
{
    // lower_{5} = 1/16 exactly for the six-factor model.
    const Model m = builtin_product6();
    const auto u = IndexSet::of(6, {5});
    for (const auto& kind :
         {EstimatorKind::correlation1(), EstimatorKind::correlation2(),
          EstimatorKind::oracle1(1), EstimatorKind::oracle2(1)}) {
        const auto r = run_estimator(m, kind, u, 200'000, {21, 0});
        EXPECT_NEAR(r.estimate, 0.0625, 4 * *r.std_error) << kind.name();
    }
    const auto up = run_estimator(m, EstimatorKind::upper(), u, 200'000, {21, 0});
    const double upper = std::get<ProductModel>(m).upper(u);
    EXPECT_NEAR(up.estimate, upper, 4 * *up.std_error);
}
