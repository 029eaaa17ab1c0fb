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

#include <cstdint>
#include <string>
#include <vector>

#include "pickfreeze/core.hpp"
#include "pickfreeze/estimators.hpp"
#include "pickfreeze/models.hpp"
#include "pickfreeze/rng.hpp"

namespace pickfreeze {

/// Raw moments of every factor h_j of a product model.
struct QFactors {
    std::vector<RawMoments> moments;

    static QFactors of(const ProductModel& model);
};

/// Q_v = (f(x) - f(x_v:z))^2 written in per-factor products.
double q_v(const ProductModel& model, const Point& x, const Point& z,
           IndexSet v);

/// Q_{uv2} = (f(x_u:y) - f(y_{v2}:w))^2 written in per-factor products;
/// requires v2 inside u^c.
double q_uv(const ProductModel& model, const Point& x, const Point& y,
            const Point& w, IndexSet u, IndexSet v2);

/// 2 prod_j m4_j - 2 prod_{j in v} m4_j prod_{j not in v} m2_j^2: the
/// gathered form of E(Q_v^2) used to rank choices of v.
double eq_sq_paper(const ProductModel& model, IndexSet v);

/// Exact E[(f(x) - f(x_v:z))^4] = 2 prod m4 + 6 prod_v m4 prod_{-v} m2^2
/// - 8 prod_v m4 prod_{-v} m1 m3. Agrees with eq_sq_paper when
/// m1 m3 = m2^2 outside v.
double eq_sq_exact(const ProductModel& model, IndexSet v);

enum class QObjective { paper, exact };

/// Exhaustive minimizer over v subset of u^c (|u^c| <= 20). Values within
/// 1e-12 relative of the minimum tie; ties go to the smallest mask.
IndexSet argmin_v(const ProductModel& model, IndexSet u, QObjective objective);

//---------------------------------------------------------------------------//
// Exact enumeration over discrete grids

struct EnumerationBudget {
    std::uint64_t max_states = 10'000'000;
};

struct ExactMoments {
    double expectation = 0;
    double variance = 0;
};

/// Number of joint grid states for `vectors` independent points, or
/// UINT64_MAX on overflow.
std::uint64_t enumeration_states(const DiscreteModel& model, int vectors);

/// Throws ResourceError when the joint grid exceeds the budget.
void check_budget(const DiscreteModel& model, int vectors,
                  EnumerationBudget budget);

namespace detail {
// Shifted compensated sums for a stable one-pass mean and variance.
class ExactMomentSum {
  public:
    void add(double t)
    {
        if (n_ == 0)
            shift_ = t;
        const double d = t - shift_;
        s1_.add(d);
        s2_.add(d * d);
        ++n_;
    }
    ExactMoments result() const;

  private:
    std::uint64_t n_ = 0;
    double shift_ = 0;
    CompensatedSum s1_;
    CompensatedSum s2_;
};
}  // namespace detail

/*!
 * Exact E[T] and Var[T] of a per-sample term T(block) when each of the
 * first `vectors` points of the block ranges independently over all grid
 * cell midpoints with equal weight. Unused roles are left at the origin.
 */
template <class Term>
ExactMoments enumerate_term(const DiscreteModel& model, int vectors,
                            Term&& term_fn, EnumerationBudget budget = {})
{
    if (vectors < 1 || vectors > 4)
        throw InvalidArgument("enumeration needs 1 to 4 vectors");
    check_budget(model, vectors, budget);

    const std::size_t cells = model.size();
    std::vector<Point> grid;
    grid.reserve(cells);
    for (std::size_t i = 0; i < cells; ++i)
        grid.push_back(model.grid_point(i));

    std::size_t idx[4] = {0, 0, 0, 0};
    SampleBlock block{Point(model.dim()), Point(model.dim()),
                      Point(model.dim()), Point(model.dim())};
    Point* slots[4] = {&block.x, &block.y, &block.z, &block.w};
    for (int k = 0; k < vectors; ++k)
        *slots[k] = grid[0];

    detail::ExactMomentSum sum;
    for (;;) {
        sum.add(term_fn(static_cast<const SampleBlock&>(block)));
        // Odometer over the last vector fastest.
        int k = vectors - 1;
        for (; k >= 0; --k) {
            if (++idx[k] < cells) {
                *slots[k] = grid[idx[k]];
                break;
            }
            idx[k] = 0;
            *slots[k] = grid[0];
        }
        if (k < 0)
            break;
    }
    return sum.result();
}

/// Exact moments of one estimator's per-sample term on a discrete model.
/// For `original` this is the cross moment f(x) f(x_u:y).
ExactMoments enumerate_expectation(const DiscreteModel& model,
                                   const EstimatorKind& kind, IndexSet u,
                                   EnumerationBudget budget = {});

//---------------------------------------------------------------------------//
// Monte Carlo counterparts

struct McEstimate {
    double value = 0;
    double std_error = 0;
};

/// Sample variance of the generalized term (two passes over the same
/// stream) with its standard error.
McEstimate mc_generalized_term_variance(const ProductModel& model, IndexSet u,
                                        IndexSet v, IndexSet v2,
                                        std::uint64_t n, RngSpec rng);

/// Mean of Q_v Q_{uv2} minus lower_u^2, over an independent stream.
McEstimate mc_q_product(const ProductModel& model, IndexSet u, IndexSet v,
                        IndexSet v2, std::uint64_t n, RngSpec rng);

/// Mean of (f(x) - f(x_v:z))^4.
McEstimate mc_fourth_moment(const ProductModel& model, IndexSet v,
                            std::uint64_t n, RngSpec rng);

/// Product model whose factor j takes value levels[j][k] on cell k of an
/// equal L-cell partition, plus the matching discrete table. Factors with
/// zero spread get tau = 0.
struct DiscreteProduct {
    ProductModel product;
    DiscreteModel discrete;
};
DiscreteProduct discrete_product(const std::vector<std::vector<double>>& levels);

}  // namespace pickfreeze
