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
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pickfreeze/core.hpp"

namespace pickfreeze {

/// Third and fourth moments of a standardized factor shape g
/// (the first two are fixed at 0 and 1).
struct FactorMoments {
    double gamma = 0;
    double kappa = 0;
};

enum class ShapeKind { uniform, tent, custom };

//---------------------------------------------------------------------------//
/*!
 * A standardized univariate shape g on [0,1): mean 0, second moment 1.
 *
 * Construction checks both moments by composite Gauss-Legendre quadrature
 * (64 panels between consecutive breakpoints) to within 1e-10.
 */
class Shape {
  public:
    // sqrt(12) (x - 1/2)
    static Shape uniform();
    // sqrt(3) (|4x - 2| - 1)
    static Shape tent();
    // User-supplied g with its moments. Breakpoints mark kinks or jumps in
    // (0,1) so quadrature panels do not straddle them.
    static Shape custom(std::function<double(double)> g, FactorMoments moments,
                        std::vector<double> breakpoints = {});

    double operator()(double x) const;
    ShapeKind kind() const noexcept { return kind_; }
    const FactorMoments& moments() const noexcept { return moments_; }
    std::string name() const;

  private:
    Shape(ShapeKind kind, FactorMoments m) : kind_(kind), moments_(m) {}

    ShapeKind kind_;
    FactorMoments moments_;
    std::function<double(double)> fn_;
};

struct Factor {
    double mu = 1;
    double tau = 0;
    Shape shape = Shape::uniform();
};

/// Raw moments E[h^k], k = 1..4, of one factor h = mu + tau g.
struct RawMoments {
    double m1 = 0;
    double m2 = 0;
    double m3 = 0;
    double m4 = 0;
};

//---------------------------------------------------------------------------//
/*!
 * f(x) = prod_j (mu_j + tau_j g_j(x_j)).
 *
 * Its ANOVA is closed form: sigma2_u = prod_{j in u} tau_j^2
 * prod_{j not in u} mu_j^2.
 */
class ProductModel {
  public:
    explicit ProductModel(std::vector<Factor> factors);
    static ProductModel with_shape(const std::vector<double>& mu,
                                   const std::vector<double>& tau,
                                   const Shape& shape);

    int dim() const noexcept { return static_cast<int>(factors_.size()); }
    const std::vector<Factor>& factors() const noexcept { return factors_; }

    // h_j(x) for zero-based j.
    double factor_value(int j, double x) const
    {
        const Factor& f = factors_[j];
        return f.mu + f.tau * f.shape(x);
    }
    double operator()(const Point& x) const;

    double mean() const;
    double variance() const;
    double sigma2(IndexSet u) const;
    double lower(IndexSet u) const;
    double upper(IndexSet u) const;

  private:
    std::vector<Factor> factors_;
};

/// f(x) = prod_j (|4 x_j - 2| + 2 + 3 a_j) / (1 + a_j); mean 3^d.
class GFunction {
  public:
    explicit GFunction(std::vector<double> a);

    int dim() const noexcept { return static_cast<int>(a_.size()); }
    const std::vector<double>& a() const noexcept { return a_; }
    double operator()(const Point& x) const;
    double mean() const;

  private:
    std::vector<double> a_;
};

//---------------------------------------------------------------------------//
/*!
 * Piecewise-constant function on an L^d grid of equal cells.
 *
 * Table entry order is mixed radix with coordinate 1 varying fastest. A
 * point x maps to cell floor(L x_j) per coordinate, so the function's
 * continuous ANOVA equals the equal-weight ANOVA of the table.
 */
class DiscreteModel {
  public:
    DiscreteModel(int levels, int dim, std::vector<double> table);

    int levels() const noexcept { return levels_; }
    int dim() const noexcept { return dim_; }
    const std::vector<double>& table() const noexcept { return table_; }
    std::size_t size() const noexcept { return table_.size(); }

    int cell(double x) const noexcept
    {
        int k = static_cast<int>(x * levels_);
        return k < levels_ ? k : levels_ - 1;
    }
    double midpoint(int k) const noexcept
    {
        return (2.0 * k + 1.0) / (2.0 * levels_);
    }
    // Cell digits of flat index i, zero-based coordinate j.
    int digit(std::size_t i, int j) const noexcept;
    // Cell-midpoint point for flat index i.
    Point grid_point(std::size_t i) const;

    double operator()(const Point& x) const;

  private:
    int levels_;
    int dim_;
    std::vector<double> table_;
    std::vector<std::size_t> stride_;
};

using Model = std::variant<GFunction, ProductModel, DiscreteModel>;

int dimension(const Model& m);
double evaluate(const Model& m, const Point& x);
double evaluate(const Model& m, const Point& x, EvalCounter& counter);
std::string describe(const Model& m);

/// Evaluates a model and counts calls; the f handed to estimator terms.
class CountingFunction {
  public:
    CountingFunction(const Model& m, EvalCounter& counter)
        : model_(&m), counter_(&counter)
    {
    }
    double operator()(const Point& x) const
    {
        return evaluate(*model_, x, *counter_);
    }

  private:
    const Model* model_;
    EvalCounter* counter_;
};

//---------------------------------------------------------------------------//
/*!
 * Full ANOVA table, indexed by subset mask.
 *
 * Invariants: 0 <= lower_u <= upper_u <= sigma2; lower_u = sigma2 -
 * upper_{-u}; sum of sigma2_u over nonempty u is sigma2; sigma2_{} = 0.
 */
struct AnovaReport {
    int dim = 0;
    double mu = 0;
    double sigma2 = 0;
    std::vector<double> sigma2_u;
    std::vector<double> lower_u;
    std::vector<double> upper_u;

    double effect(IndexSet u) const;
    double lower(IndexSet u) const;
    double upper(IndexSet u) const;
};

/// Largest dimension for which full 2^d ANOVA tables are materialized.
inline constexpr int kMaxAnovaDim = 20;

AnovaReport product_anova(const ProductModel& model);
ProductModel g_as_product(const GFunction& g);
RawMoments factor_raw_moments(const ProductModel& model, int j);

/// Default cap on L^d * 2^d work for exact discrete ANOVA.
inline constexpr std::uint64_t kDefaultAnovaBudget = 100'000'000;

/// ANOVA effect tables f_u(x_u), one per mask; table for u has L^|u|
/// entries in mixed radix over the coordinates of u in increasing order.
/// Effect of the empty set is the single entry mu.
std::vector<std::vector<double>>
discrete_effects(const DiscreteModel& model,
                 std::uint64_t budget = kDefaultAnovaBudget);
AnovaReport discrete_anova(const DiscreteModel& model,
                           std::uint64_t budget = kDefaultAnovaBudget);

/// Analytic ANOVA where one exists (all three model kinds, d <= 20).
AnovaReport analytic_anova(const Model& model);
double analytic_mean(const Model& model);

/// a = (19, 9, 4); reproduces mu = 27 and the benchmark effect variances.
GFunction builtin_g_function();
/// Six uniform-shape factors, mu_j = 1, tau = (4,4,2,2,1,1)/4.
ProductModel builtin_product6();

}  // namespace pickfreeze
