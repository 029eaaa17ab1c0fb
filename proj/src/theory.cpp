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

#include "pickfreeze/theory.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace pickfreeze {

namespace {

void require_dim(const ProductModel& model, IndexSet s, const char* name)
{
    if (s.dim() != model.dim())
        throw InvalidArgument(std::string(name)
                              + " dimension does not match the model");
}

void require_points(const ProductModel& model,
                    std::initializer_list<const Point*> pts)
{
    for (const Point* p : pts)
        if (p->dim() != model.dim())
            throw InvalidArgument("point dimension does not match the model");
}

}  // namespace

QFactors QFactors::of(const ProductModel& model)
{
    QFactors q;
    for (int j = 0; j < model.dim(); ++j)
        q.moments.push_back(factor_raw_moments(model, j));
    return q;
}

double q_v(const ProductModel& model, const Point& x, const Point& z,
           IndexSet v)
{
    require_dim(model, v, "v");
    require_points(model, {&x, &z});
    double all_x = 1, swapped = 1, cross = 1;
    for (int j = 0; j < model.dim(); ++j) {
        const double hx = model.factor_value(j, x[j]);
        all_x *= hx * hx;
        if (v.contains(j)) {
            swapped *= hx * hx;
            cross *= hx * hx;
        } else {
            const double hz = model.factor_value(j, z[j]);
            swapped *= hz * hz;
            cross *= hx * hz;
        }
    }
    return all_x + swapped - 2 * cross;
}

double q_uv(const ProductModel& model, const Point& x, const Point& y,
            const Point& w, IndexSet u, IndexSet v2)
{
    require_dim(model, u, "u");
    require_dim(model, v2, "v2");
    require_points(model, {&x, &y, &w});
    if (!v2.is_disjoint(u))
        throw InvalidArgument("q_uv: v2 = " + v2.to_string()
                              + " must lie in the complement of u = "
                              + u.to_string());
    double left = 1, right = 1, cross = 1;
    for (int j = 0; j < model.dim(); ++j) {
        const double hx = model.factor_value(j, x[j]);
        const double hy = model.factor_value(j, y[j]);
        const double hw = model.factor_value(j, w[j]);
        const bool in_u = u.contains(j);
        const bool in_v2 = v2.contains(j);
        left *= in_u ? hx * hx : hy * hy;
        right *= in_v2 ? hy * hy : hw * hw;
        if (in_u)
            cross *= hx * hw;
        else if (in_v2)
            cross *= hy * hy;
        else
            cross *= hy * hw;
    }
    return left + right - 2 * cross;
}

double eq_sq_paper(const ProductModel& model, IndexSet v)
{
    require_dim(model, v, "v");
    const auto q = QFactors::of(model);
    // prod m4 - prod_v m4 prod_{-v} m2^2 = prod_v m4 * (prod_{-v} m4 -
    // prod_{-v} m2^2), accumulated without cancellation since m4 >= m2^2.
    double kept = 1, diff = 0, base = 1;
    for (int j = 0; j < model.dim(); ++j) {
        const auto& m = q.moments[j];
        if (v.contains(j)) {
            kept *= m.m4;
            continue;
        }
        const double sq = m.m2 * m.m2;
        const double gap = m.m4 - sq;
        diff = diff * m.m4 + base * gap;
        base *= sq;
    }
    return 2 * kept * diff;
}

double eq_sq_exact(const ProductModel& model, IndexSet v)
{
    require_dim(model, v, "v");
    const auto q = QFactors::of(model);
    double kept = 1, p4 = 1, p22 = 1, p13 = 1;
    for (int j = 0; j < model.dim(); ++j) {
        const auto& m = q.moments[j];
        if (v.contains(j)) {
            kept *= m.m4;
        } else {
            p4 *= m.m4;
            p22 *= m.m2 * m.m2;
            p13 *= m.m1 * m.m3;
        }
    }
    return kept * (2 * p4 + 6 * p22 - 8 * p13);
}

IndexSet argmin_v(const ProductModel& model, IndexSet u, QObjective objective)
{
    require_dim(model, u, "u");
    const IndexSet rest = u.complement();
    if (rest.size() > 20)
        throw InvalidArgument("argmin_v: exhaustive search limited to "
                              "|u^c| <= 20");
    auto objective_at = [&](IndexSet v) {
        return objective == QObjective::paper ? eq_sq_paper(model, v)
                                              : eq_sq_exact(model, v);
    };
    // Subsets arrive in increasing mask order, so keeping the first of a
    // tie keeps the smallest mask.
    IndexSet best = IndexSet::empty(model.dim());
    double best_value = objective_at(best);
    for (IndexSet v : rest.subsets()) {
        const double value = objective_at(v);
        const double tol = 1e-12 * std::fabs(best_value);
        if (value < best_value - tol) {
            best_value = value;
            best = v;
        }
    }
    return best;
}

//---------------------------------------------------------------------------//

ExactMoments detail::ExactMomentSum::result() const
{
    if (n_ == 0)
        return {};
    const double n = static_cast<double>(n_);
    const double s1 = s1_.value();
    const double mean_shifted = s1 / n;
    double var = (s2_.value() - s1 * mean_shifted) / n;
    if (var < 0)
        var = 0;
    return {shift_ + mean_shifted, var};
}

std::uint64_t enumeration_states(const DiscreteModel& model, int vectors)
{
    const std::uint64_t cells = model.size();
    std::uint64_t states = 1;
    for (int k = 0; k < vectors; ++k) {
        if (cells != 0 && states > std::numeric_limits<std::uint64_t>::max()
                                       / cells)
            return std::numeric_limits<std::uint64_t>::max();
        states *= cells;
    }
    return states;
}

void check_budget(const DiscreteModel& model, int vectors,
                  EnumerationBudget budget)
{
    const std::uint64_t states = enumeration_states(model, vectors);
    if (states > budget.max_states)
        throw ResourceError(
            "enumeration over " + std::to_string(vectors) + " vectors of "
            + std::to_string(model.levels()) + "^" + std::to_string(model.dim())
            + " cells exceeds the budget of "
            + std::to_string(budget.max_states) + " states");
}

ExactMoments enumerate_expectation(const DiscreteModel& model,
                                   const EstimatorKind& kind, IndexSet u,
                                   EnumerationBudget budget)
{
    if (u.dim() != model.dim())
        throw InvalidArgument("index set dimension does not match the model");
    validate(kind, u);
    auto f = [&](const Point& p) { return model(p); };
    return enumerate_term(
        model, vector_count(kind),
        [&](const SampleBlock& b) { return term(f, kind, b, u); }, budget);
}

//---------------------------------------------------------------------------//

McEstimate mc_generalized_term_variance(const ProductModel& model, IndexSet u,
                                        IndexSet v, IndexSet v2,
                                        std::uint64_t n, RngSpec rng)
{
    if (n < 2)
        throw InvalidArgument("need n >= 2");
    const auto kind = EstimatorKind::generalized(v, v2);
    validate(kind, u);
    auto f = [&](const Point& p) { return model(p); };

    Accumulator first;
    {
        SampleStream stream(rng, model.dim());
        for (std::uint64_t i = 0; i < n; ++i)
            first.push(term(f, kind, stream.next(), u));
    }
    Accumulator sq_dev;
    {
        SampleStream stream(rng, model.dim());
        for (std::uint64_t i = 0; i < n; ++i) {
            const double d = term(f, kind, stream.next(), u) - first.mean();
            sq_dev.push(d * d);
        }
    }
    const double scale = static_cast<double>(n) / static_cast<double>(n - 1);
    return {sq_dev.mean() * scale, sq_dev.std_error() * scale};
}

McEstimate mc_q_product(const ProductModel& model, IndexSet u, IndexSet v,
                        IndexSet v2, std::uint64_t n, RngSpec rng)
{
    if (n < 2)
        throw InvalidArgument("need n >= 2");
    validate(EstimatorKind::generalized(v, v2), u);
    SampleStream stream(rng, model.dim());
    Accumulator acc;
    for (std::uint64_t i = 0; i < n; ++i) {
        const SampleBlock b = stream.next();
        acc.push(q_v(model, b.x, b.z, v) * q_uv(model, b.x, b.y, b.w, u, v2));
    }
    const double lower = model.lower(u);
    return {acc.mean() - lower * lower, acc.std_error()};
}

McEstimate mc_fourth_moment(const ProductModel& model, IndexSet v,
                            std::uint64_t n, RngSpec rng)
{
    if (n < 2)
        throw InvalidArgument("need n >= 2");
    require_dim(model, v, "v");
    SampleStream stream(rng, model.dim());
    Accumulator acc;
    for (std::uint64_t i = 0; i < n; ++i) {
        const SampleBlock b = stream.next();
        const double d = model(b.x) - model(blend(b.x, b.z, v));
        acc.push(d * d * d * d);
    }
    return {acc.mean(), acc.std_error()};
}

DiscreteProduct discrete_product(const std::vector<std::vector<double>>& levels)
{
    if (levels.empty())
        throw InvalidArgument("discrete product needs at least one factor");
    const std::size_t L = levels.front().size();
    if (L == 0)
        throw InvalidArgument("discrete product needs at least one level");
    for (const auto& lv : levels)
        if (lv.size() != L)
            throw InvalidArgument("all factors need the same level count");

    std::vector<double> breaks;
    for (std::size_t k = 1; k < L; ++k)
        breaks.push_back(static_cast<double>(k) / static_cast<double>(L));

    std::vector<Factor> factors;
    for (const auto& lv : levels) {
        CompensatedSum s;
        for (double h : lv)
            s.add(h);
        const double mu = s.value() / static_cast<double>(L);
        CompensatedSum s2, s3, s4;
        for (double h : lv) {
            const double c = h - mu;
            s2.add(c * c);
        }
        const double tau = std::sqrt(s2.value() / static_cast<double>(L));
        if (tau == 0) {
            factors.push_back({mu, 0.0, Shape::uniform()});
            continue;
        }
        for (double h : lv) {
            const double g = (h - mu) / tau;
            s3.add(g * g * g);
            s4.add(g * g * g * g);
        }
        FactorMoments mom{s3.value() / static_cast<double>(L),
                          s4.value() / static_cast<double>(L)};
        std::vector<double> values = lv;
        auto g = [values, mu, tau](double x) {
            const auto n = values.size();
            auto k = static_cast<std::size_t>(x * static_cast<double>(n));
            if (k >= n)
                k = n - 1;
            return (values[k] - mu) / tau;
        };
        factors.push_back({mu, tau, Shape::custom(g, mom, breaks)});
    }

    const int d = static_cast<int>(levels.size());
    std::size_t cells = 1;
    for (int j = 0; j < d; ++j)
        cells *= L;
    std::vector<double> table(cells);
    for (std::size_t i = 0; i < cells; ++i) {
        std::size_t rem = i;
        double v = 1;
        for (int j = 0; j < d; ++j) {
            v *= levels[j][rem % L];
            rem /= L;
        }
        table[i] = v;
    }
    return {ProductModel(std::move(factors)),
            DiscreteModel(static_cast<int>(L), d, std::move(table))};
}

}  // namespace pickfreeze
