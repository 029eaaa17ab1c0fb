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
#include <fstream>

#include "oracle.hpp"
#include "pickfreeze/model_io.hpp"
#include "pickfreeze/models.hpp"
#include "pickfreeze/rng.hpp"
#include "pickfreeze/theory.hpp"
#include "pickfreeze/verification.hpp"

using namespace pickfreeze;

namespace {

// Exact rationals evaluated offline.
constexpr double kGSigma2 = 9571669.0 / 6750000.0;
constexpr double kProduct6Sigma2 = 6201.0 / 1024.0;

}  // namespace

TEST(Shape, BuiltinsStandardized)
{
    for (const Shape& s : {Shape::uniform(), Shape::tent()}) {
        EXPECT_EQ(s.moments().gamma, 0.0);
        EXPECT_DOUBLE_EQ(s.moments().kappa, 9.0 / 5.0);
    }
    EXPECT_DOUBLE_EQ(Shape::uniform()(0.75), std::sqrt(12.0) * 0.25);
    EXPECT_DOUBLE_EQ(Shape::tent()(0.0), std::sqrt(3.0));
    EXPECT_DOUBLE_EQ(Shape::tent()(0.5), -std::sqrt(3.0));
}

TEST(Shape, CustomChecked)
{
    // Two-point shape +-1: gamma 0, kappa 1.
    auto sign = [](double x) { return x < 0.5 ? -1.0 : 1.0; };
    EXPECT_NO_THROW(Shape::custom(sign, {0.0, 1.0}, {0.5}));
    EXPECT_THROW(Shape::custom(sign, {0.0, 2.0}, {0.5}), InvalidArgument);
    EXPECT_THROW(Shape::custom([](double x) { return x; }, {0.0, 1.0}, {}),
                 InvalidArgument);
    EXPECT_THROW(Shape::custom(sign, {1.0, 1.5}, {0.5}), InvalidArgument);
}

TEST(GFunction, PointValuesAndMean)
{
    const auto g = builtin_g_function();
    EXPECT_NEAR(g(Point::of({0.5, 0.5, 0.5})), 23.954, 1e-12);
    EXPECT_NEAR(g(Point::of({0.0, 0.0, 0.0})), 3.05 * 3.1 * 3.2, 1e-12);
    EXPECT_DOUBLE_EQ(g.mean(), 27.0);
    EXPECT_THROW(GFunction({-1.0}), InvalidArgument);
}

TEST(GFunction, ProductFormAgreesPointwise)
{
    const auto g = builtin_g_function();
    const auto p = g_as_product(g);
    UniformStream s({3, 0}, Role::x);
    for (int i = 0; i < 1000; ++i) {
        const auto x = s.next_point(3);
        EXPECT_NEAR(p(x), g(x), 1e-12);
    }
}

TEST(GFunction, Anova)
{
    const auto a = product_anova(g_as_product(builtin_g_function()));
    EXPECT_NEAR(a.mu, 27.0, 1e-12);
    EXPECT_NEAR(a.sigma2, kGSigma2, 1e-13);
    auto s = [&](std::initializer_list<int> c) {
        return a.effect(IndexSet::of(3, c));
    };
    EXPECT_NEAR(s({1}), 0.0675, 1e-15);
    EXPECT_NEAR(s({2}), 0.27, 1e-14);
    EXPECT_NEAR(s({3}), 1.08, 1e-14);
    EXPECT_NEAR(s({1, 2}), 0.000025, 1e-17);
    EXPECT_NEAR(s({1, 3}), 0.0001, 1e-16);
    EXPECT_NEAR(s({2, 3}), 0.0004, 1e-16);
    EXPECT_NEAR(s({1, 2, 3}), 1.0 / 27e6, 1e-20);
}

TEST(ProductModel, Product6Anova)
{
    const auto p = builtin_product6();
    EXPECT_DOUBLE_EQ(p.mean(), 1.0);
    EXPECT_NEAR(p.variance(), kProduct6Sigma2, 1e-14);
    EXPECT_NEAR(p.lower(IndexSet::of(6, {5})), 0.0625, 1e-15);
    EXPECT_NEAR(p.lower(IndexSet::of(6, {1, 2})), 3.0, 1e-14);
    EXPECT_NEAR(p.lower(IndexSet::of(6, {1})) / p.variance(),
                0.16513465570069344, 1e-15);
    EXPECT_NEAR(p.lower(IndexSet::of(6, {3, 4})) / p.variance(),
                0.09288824383164006, 1e-15);
    const auto a = product_anova(p);
    for (IndexSet u : IndexSet::full(6).subsets()) {
        EXPECT_NEAR(a.lower(u), p.lower(u), 1e-12);
        EXPECT_NEAR(a.upper(u), p.upper(u), 1e-12);
        EXPECT_NEAR(a.effect(u), p.sigma2(u), 1e-12);
    }
}

TEST(ProductModel, Validation)
{
    EXPECT_THROW(ProductModel::with_shape({1.0}, {1.0, 2.0}, Shape::uniform()),
                 InvalidArgument);
    EXPECT_THROW(ProductModel::with_shape({1.0}, {-1.0}, Shape::uniform()),
                 InvalidArgument);
    EXPECT_THROW(ProductModel({}), InvalidArgument);
}

TEST(ProductModel, RawMoments)
{
    // mu = 2, tau = 1 uniform: m1 = 2, m2 = 5, m3 = 2^3 + 3*2 = 14,
    // m4 = 16 + 6*4 + 9/5.
    const auto p = ProductModel::with_shape({2.0}, {1.0}, Shape::uniform());
    const auto m = factor_raw_moments(p, 0);
    EXPECT_DOUBLE_EQ(m.m1, 2.0);
    EXPECT_DOUBLE_EQ(m.m2, 5.0);
    EXPECT_DOUBLE_EQ(m.m3, 14.0);
    EXPECT_DOUBLE_EQ(m.m4, 16.0 + 24.0 + 1.8);
}

TEST(DiscreteModel, Layout)
{
    // Coordinate 1 varies fastest.
    const DiscreteModel m(2, 2, {1.0, 2.0, 3.0, 4.0});
    EXPECT_EQ(m(Point::of({0.75, 0.25})), 2.0);
    EXPECT_EQ(m(Point::of({0.25, 0.75})), 3.0);
    EXPECT_EQ(m.digit(1, 0), 1);
    EXPECT_EQ(m.digit(1, 1), 0);
    EXPECT_EQ(m.grid_point(3), Point::of({0.75, 0.75}));
    EXPECT_THROW(DiscreteModel(2, 2, {1.0, 2.0}), InvalidArgument);
    EXPECT_THROW(DiscreteModel(2, 1, {1.0, NAN}), InvalidArgument);
}

TEST(DiscreteModel, AnovaMatchesNaiveOracle)
{
    for (auto [L, d] : {std::pair{3, 2}, {3, 3}, {4, 3}, {2, 5}}) {
        for (std::uint32_t trial = 0; trial < 5; ++trial) {
            const auto m = random_discrete_model(L, d, 11, trial);
            const auto a = discrete_anova(m);
            const double s2 = static_cast<double>(oracle::total_variance(m));
            EXPECT_NEAR(a.sigma2, s2, 1e-13 * s2);
            for (IndexSet u : IndexSet::full(d).subsets()) {
                const double lo
                    = static_cast<double>(oracle::closed_index(m, u.bits()));
                const double hi
                    = static_cast<double>(oracle::total_index(m, u.bits()));
                EXPECT_NEAR(a.lower(u), lo, 1e-12 * s2) << u.to_string();
                EXPECT_NEAR(a.upper(u), hi, 1e-12 * s2) << u.to_string();
            }
        }
    }
}

TEST(DiscreteModel, AnovaBudget)
{
    const DiscreteModel m(2, 10, std::vector<double>(1024, 1.0));
    EXPECT_THROW(discrete_anova(m, 1000), ResourceError);
    const auto a = discrete_anova(m);
    EXPECT_EQ(a.sigma2, 0.0);
}

TEST(DiscreteProduct, MatchesProductAnova)
{
    const auto dp = discrete_product({{1.0, 2.0, 4.0}, {0.5, 0.5, 3.0},
                                      {2.0, 1.0, 1.5}});
    const auto a = discrete_anova(dp.discrete);
    for (IndexSet u : IndexSet::full(3).subsets()) {
        EXPECT_NEAR(dp.product.lower(u), a.lower(u), 1e-12);
        EXPECT_NEAR(dp.product.upper(u), a.upper(u), 1e-12);
    }
    UniformStream s({1, 1}, Role::x);
    for (int i = 0; i < 200; ++i) {
        const auto x = s.next_point(3);
        EXPECT_NEAR(dp.product(x), dp.discrete(x), 1e-12);
    }
}

TEST(ModelDispatch, Variant)
{
    const Model g = builtin_g_function();
    EXPECT_EQ(dimension(g), 3);
    EXPECT_DOUBLE_EQ(analytic_mean(g), 27.0);
    EvalCounter c;
    evaluate(g, Point::of({0.1, 0.2, 0.3}), c);
    evaluate(g, Point::of({0.1, 0.2, 0.3}), c);
    EXPECT_EQ(c.count(), 2u);
    EXPECT_THROW(evaluate(g, Point::of({0.1}), c), InvalidArgument);
    EXPECT_NEAR(analytic_anova(g).sigma2, kGSigma2, 1e-13);
}

TEST(ModelIo, RoundTrip)
{
    const Model models[] = {builtin_g_function(), builtin_product6(),
                            DiscreteModel(2, 2, {1.0, 2.0, 3.0, 5.0})};
    for (const auto& m : models) {
        const auto back = model_from_json(model_to_json(m));
        const Point x = Point(dimension(m));
        EXPECT_EQ(evaluate(back, x), evaluate(m, x));
        EXPECT_EQ(model_to_json(back), model_to_json(m));
    }
}

TEST(ModelIo, Rejects)
{
    using nlohmann::json;
    EXPECT_THROW(model_from_json(json{{"kind", "nope"}}), InvalidArgument);
    EXPECT_THROW(model_from_json(json{{"kind", "g-function"}, {"a", {1}},
                                      {"tau", {1}}}),
                 InvalidArgument);
    EXPECT_THROW(model_from_json(json{{"kind", "product"}, {"mu", {1, 2}},
                                      {"tau", {1}}}),
                 InvalidArgument);
    EXPECT_THROW(model_from_json(json{{"kind", "discrete"}, {"levels", 2},
                                      {"table", {1, 2, 3}}}),
                 InvalidArgument);
    EXPECT_THROW(load_model("/nonexistent/model.json"), InvalidArgument);
}

TEST(ModelIo, LoadFromFile)
{
    const std::string path = ::testing::TempDir() + "pickfreeze_model.json";
    {
        std::ofstream out(path);
        out << R"({"kind": "product", "mu": [1, 2], "tau": [0.5, 1],
                   "g": ["uniform", "tent"]})";
    }
    const auto nm = load_model(path);
    const auto& p = std::get<ProductModel>(nm.model);
    EXPECT_EQ(p.dim(), 2);
    EXPECT_EQ(p.factors()[1].shape.kind(), ShapeKind::tent);
    EXPECT_DOUBLE_EQ(p.mean(), 2.0);
    EXPECT_EQ(load_model("g").name, "g");
}
