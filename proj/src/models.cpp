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

#include "pickfreeze/models.hpp"

#include <array>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

namespace pickfreeze {

namespace {

constexpr double kMomentTol = 1e-10;

// Five-point Gauss-Legendre rule on [-1, 1].
constexpr std::array<double, 5> kGlNodes = {
    -0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
    0.9061798459386640};
constexpr std::array<double, 5> kGlWeights = {
    0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
    0.4786286704993665, 0.2369268850561891};

template <class F>
double composite_quadrature(F&& f, const std::vector<double>& breakpoints)
{
    constexpr int kPanels = 64;
    std::vector<double> edges{0.0};
    for (double b : breakpoints) {
        if (!(b > edges.back() && b < 1.0))
            throw InvalidArgument(
                "shape breakpoints must be increasing and inside (0,1)");
        edges.push_back(b);
    }
    edges.push_back(1.0);

    CompensatedSum total;
    for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
        const double h = (edges[s + 1] - edges[s]) / kPanels;
        for (int p = 0; p < kPanels; ++p) {
            const double mid = edges[s] + (p + 0.5) * h;
            for (std::size_t k = 0; k < kGlNodes.size(); ++k)
                total.add(0.5 * h * kGlWeights[k] * f(mid + 0.5 * h * kGlNodes[k]));
        }
    }
    return total.value();
}

void check_shape(const Shape& g, const std::vector<double>& breakpoints)
{
    const double m1 = composite_quadrature(g, breakpoints);
    const double m2
        = composite_quadrature([&](double x) { return g(x) * g(x); },
                               breakpoints);
    if (std::fabs(m1) > kMomentTol || std::fabs(m2 - 1.0) > kMomentTol) {
        std::ostringstream msg;
        msg << "shape '" << g.name() << "' is not standardized: mean " << m1
            << ", second moment " << m2;
        throw InvalidArgument(msg.str());
    }
    const auto& mom = g.moments();
    if (!std::isfinite(mom.gamma) || !std::isfinite(mom.kappa)
        || mom.kappa < 1.0 + mom.gamma * mom.gamma - 1e-12)
        throw InvalidArgument("shape moments infeasible: need finite kappa "
                              ">= 1 + gamma^2");
    const double m3 = composite_quadrature(
        [&](double x) { return g(x) * g(x) * g(x); }, breakpoints);
    const double m4 = composite_quadrature(
        [&](double x) {
            const double s = g(x) * g(x);
            return s * s;
        },
        breakpoints);
    if (std::fabs(m3 - mom.gamma) > kMomentTol * std::max(1.0, std::fabs(m3))
        || std::fabs(m4 - mom.kappa) > kMomentTol * std::max(1.0, m4)) {
        std::ostringstream msg;
        msg << "shape '" << g.name() << "' declares gamma " << mom.gamma
            << ", kappa " << mom.kappa << " but integrates to " << m3 << ", "
            << m4;
        throw InvalidArgument(msg.str());
    }
}

void check_model_dim(int d, const char* what)
{
    if (d < 1 || d > kMaxDim)
        throw InvalidArgument(std::string(what) + " dimension "
                              + std::to_string(d) + " outside 1.."
                              + std::to_string(kMaxDim));
}

// prod_j (a_j + b_j) - prod_j a_j over j in mask, for a_j, b_j >= 0,
// without cancellation.
double product_increment(const std::vector<double>& a,
                         const std::vector<double>& b, std::uint64_t mask)
{
    double diff = 0;
    double base = 1;
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (!((mask >> j) & 1u))
            continue;
        diff = diff * (a[j] + b[j]) + base * b[j];
        base *= a[j];
    }
    return diff;
}

std::uint64_t checked_pow(std::uint64_t base, int exp, std::uint64_t cap)
{
    std::uint64_t r = 1;
    for (int i = 0; i < exp; ++i) {
        if (base != 0 && r > cap / base)
            return cap + 1;
        r *= base;
    }
    return r;
}

void check_anova_dim(int d)
{
    if (d > kMaxAnovaDim)
        throw ResourceError("full ANOVA table needs 2^" + std::to_string(d)
                            + " entries; limit is d <= "
                            + std::to_string(kMaxAnovaDim));
}

}  // namespace

//---------------------------------------------------------------------------//
// Shape

Shape Shape::uniform()
{
    return Shape(ShapeKind::uniform, {0.0, 9.0 / 5.0});
}

Shape Shape::tent()
{
    return Shape(ShapeKind::tent, {0.0, 9.0 / 5.0});
}

Shape Shape::custom(std::function<double(double)> g, FactorMoments moments,
                    std::vector<double> breakpoints)
{
    if (!g)
        throw InvalidArgument("custom shape needs an evaluator");
    Shape s(ShapeKind::custom, moments);
    s.fn_ = std::move(g);
    check_shape(s, breakpoints);
    return s;
}

double Shape::operator()(double x) const
{
    switch (kind_) {
    case ShapeKind::uniform: return std::sqrt(12.0) * (x - 0.5);
    case ShapeKind::tent:
        return std::sqrt(3.0) * (std::fabs(4.0 * x - 2.0) - 1.0);
    case ShapeKind::custom: break;
    }
    return fn_(x);
}

std::string Shape::name() const
{
    switch (kind_) {
    case ShapeKind::uniform: return "uniform";
    case ShapeKind::tent: return "tent";
    case ShapeKind::custom: break;
    }
    return "custom";
}

//---------------------------------------------------------------------------//
// ProductModel

ProductModel::ProductModel(std::vector<Factor> factors)
    : factors_(std::move(factors))
{
    check_model_dim(dim(), "product model");
    for (std::size_t j = 0; j < factors_.size(); ++j) {
        const auto& f = factors_[j];
        if (!std::isfinite(f.mu) || !std::isfinite(f.tau) || f.tau < 0)
            throw InvalidArgument("factor " + std::to_string(j + 1)
                                  + ": need finite mu and finite tau >= 0");
    }
    static const bool builtin_shapes_ok = [] {
        check_shape(Shape::uniform(), {});
        check_shape(Shape::tent(), {0.5});
        return true;
    }();
    (void)builtin_shapes_ok;
}

ProductModel ProductModel::with_shape(const std::vector<double>& mu,
                                      const std::vector<double>& tau,
                                      const Shape& shape)
{
    if (mu.size() != tau.size())
        throw InvalidArgument("product model: mu has "
                              + std::to_string(mu.size()) + " entries, tau "
                              + std::to_string(tau.size()));
    std::vector<Factor> factors;
    factors.reserve(mu.size());
    for (std::size_t j = 0; j < mu.size(); ++j)
        factors.push_back({mu[j], tau[j], shape});
    return ProductModel(std::move(factors));
}

double ProductModel::operator()(const Point& x) const
{
    double v = 1;
    for (int j = 0; j < dim(); ++j)
        v *= factor_value(j, x[j]);
    return v;
}

double ProductModel::mean() const
{
    double m = 1;
    for (const auto& f : factors_)
        m *= f.mu;
    return m;
}

namespace {

struct SquaredParts {
    std::vector<double> mu2;
    std::vector<double> tau2;
};

SquaredParts squared_parts(const ProductModel& m)
{
    SquaredParts p;
    for (const auto& f : m.factors()) {
        p.mu2.push_back(f.mu * f.mu);
        p.tau2.push_back(f.tau * f.tau);
    }
    return p;
}

}  // namespace

double ProductModel::variance() const
{
    auto p = squared_parts(*this);
    return product_increment(p.mu2, p.tau2, IndexSet::full_mask(dim()));
}

double ProductModel::sigma2(IndexSet u) const
{
    if (u.dim() != dim())
        throw InvalidArgument("index set dimension does not match model");
    if (u.is_empty())
        return 0;
    double v = 1;
    for (int j = 0; j < dim(); ++j) {
        const auto& f = factors_[j];
        v *= u.contains(j) ? f.tau * f.tau : f.mu * f.mu;
    }
    return v;
}

double ProductModel::lower(IndexSet u) const
{
    if (u.dim() != dim())
        throw InvalidArgument("index set dimension does not match model");
    auto p = squared_parts(*this);
    double rest = 1;
    for (int j = 0; j < dim(); ++j)
        if (!u.contains(j))
            rest *= p.mu2[j];
    return rest * product_increment(p.mu2, p.tau2, u.bits());
}

double ProductModel::upper(IndexSet u) const
{
    if (u.dim() != dim())
        throw InvalidArgument("index set dimension does not match model");
    auto p = squared_parts(*this);
    double rest = 1;
    for (int j = 0; j < dim(); ++j)
        if (!u.contains(j))
            rest *= p.mu2[j] + p.tau2[j];
    return rest * product_increment(p.mu2, p.tau2, u.bits());
}

//---------------------------------------------------------------------------//
// GFunction

GFunction::GFunction(std::vector<double> a) : a_(std::move(a))
{
    check_model_dim(dim(), "g-function");
    for (std::size_t j = 0; j < a_.size(); ++j)
        if (!std::isfinite(a_[j]) || a_[j] < 0)
            throw InvalidArgument("g-function: a_" + std::to_string(j + 1)
                                  + " must be finite and nonnegative");
}

double GFunction::operator()(const Point& x) const
{
    double v = 1;
    for (int j = 0; j < dim(); ++j)
        v *= (std::fabs(4.0 * x[j] - 2.0) + 2.0 + 3.0 * a_[j])
             / (1.0 + a_[j]);
    return v;
}

double GFunction::mean() const
{
    return std::pow(3.0, dim());
}

//---------------------------------------------------------------------------//
// DiscreteModel

DiscreteModel::DiscreteModel(int levels, int dim, std::vector<double> table)
    : levels_(levels), dim_(dim), table_(std::move(table))
{
    check_model_dim(dim, "discrete model");
    if (levels < 1)
        throw InvalidArgument("discrete model needs at least one level");
    const std::uint64_t cap = std::numeric_limits<std::uint32_t>::max();
    const std::uint64_t n = checked_pow(static_cast<std::uint64_t>(levels),
                                        dim, cap);
    if (n > cap)
        throw ResourceError("discrete grid of " + std::to_string(levels)
                            + "^" + std::to_string(dim)
                            + " cells is too large");
    if (table_.size() != n)
        throw InvalidArgument("discrete table has "
                              + std::to_string(table_.size())
                              + " entries, expected " + std::to_string(n));
    for (double v : table_)
        if (!std::isfinite(v))
            throw InvalidArgument("discrete table entries must be finite");
    stride_.resize(dim);
    std::size_t s = 1;
    for (int j = 0; j < dim; ++j) {
        stride_[j] = s;
        s *= static_cast<std::size_t>(levels);
    }
}

int DiscreteModel::digit(std::size_t i, int j) const noexcept
{
    return static_cast<int>((i / stride_[j]) % levels_);
}

Point DiscreteModel::grid_point(std::size_t i) const
{
    std::array<double, kMaxDim> c{};
    for (int j = 0; j < dim_; ++j)
        c[j] = midpoint(digit(i, j));
    return Point::from(std::span<const double>(c.data(), dim_));
}

double DiscreteModel::operator()(const Point& x) const
{
    std::size_t i = 0;
    for (int j = 0; j < dim_; ++j)
        i += stride_[j] * static_cast<std::size_t>(cell(x[j]));
    return table_[i];
}

//---------------------------------------------------------------------------//
// Model dispatch

int dimension(const Model& m)
{
    return std::visit([](const auto& v) { return v.dim(); }, m);
}

double evaluate(const Model& m, const Point& x)
{
    return std::visit(
        [&](const auto& v) {
            if (x.dim() != v.dim())
                throw InvalidArgument(
                    "point dimension " + std::to_string(x.dim())
                    + " does not match model dimension "
                    + std::to_string(v.dim()));
            return v(x);
        },
        m);
}

double evaluate(const Model& m, const Point& x, EvalCounter& counter)
{
    counter.increment();
    return evaluate(m, x);
}

std::string describe(const Model& m)
{
    std::ostringstream os;
    os.precision(17);
    auto list = [&](const std::vector<double>& v) {
        os << '(';
        for (std::size_t i = 0; i < v.size(); ++i)
            os << (i ? "," : "") << v[i];
        os << ')';
    };
    if (auto* g = std::get_if<GFunction>(&m)) {
        os << "g-function a=";
        list(g->a());
    } else if (auto* p = std::get_if<ProductModel>(&m)) {
        std::vector<double> mu, tau;
        for (const auto& f : p->factors()) {
            mu.push_back(f.mu);
            tau.push_back(f.tau);
        }
        os << "product mu=";
        list(mu);
        os << " tau=";
        list(tau);
    } else {
        const auto& dm = std::get<DiscreteModel>(m);
        os << "discrete L=" << dm.levels() << " d=" << dm.dim();
    }
    return os.str();
}

//---------------------------------------------------------------------------//
// ANOVA

double AnovaReport::effect(IndexSet u) const
{
    if (u.dim() != dim)
        throw InvalidArgument("index set dimension does not match report");
    return sigma2_u[u.bits()];
}

double AnovaReport::lower(IndexSet u) const
{
    if (u.dim() != dim)
        throw InvalidArgument("index set dimension does not match report");
    return lower_u[u.bits()];
}

double AnovaReport::upper(IndexSet u) const
{
    if (u.dim() != dim)
        throw InvalidArgument("index set dimension does not match report");
    return upper_u[u.bits()];
}

AnovaReport product_anova(const ProductModel& model)
{
    const int d = model.dim();
    check_anova_dim(d);
    const std::size_t n_sets = std::size_t{1} << d;
    AnovaReport r;
    r.dim = d;
    r.mu = model.mean();
    r.sigma2 = model.variance();
    r.sigma2_u.resize(n_sets);
    r.lower_u.resize(n_sets);
    r.upper_u.resize(n_sets);
    for (std::size_t mask = 0; mask < n_sets; ++mask) {
        auto u = IndexSet::from_mask(mask, d);
        r.sigma2_u[mask] = model.sigma2(u);
        r.lower_u[mask] = model.lower(u);
        r.upper_u[mask] = model.upper(u);
    }
    return r;
}

ProductModel g_as_product(const GFunction& g)
{
    std::vector<Factor> factors;
    for (double a : g.a())
        factors.push_back({3.0, 1.0 / (std::sqrt(3.0) * (1.0 + a)),
                           Shape::tent()});
    return ProductModel(std::move(factors));
}

RawMoments factor_raw_moments(const ProductModel& model, int j)
{
    if (j < 0 || j >= model.dim())
        throw InvalidArgument("factor index out of range");
    const Factor& f = model.factors()[j];
    const double mu = f.mu, tau = f.tau;
    const double gamma = f.shape.moments().gamma;
    const double kappa = f.shape.moments().kappa;
    const double mu2 = mu * mu, tau2 = tau * tau;
    return {mu, mu2 + tau2, mu2 * mu + 3 * mu * tau2 + tau2 * tau * gamma,
            mu2 * mu2 + 6 * mu2 * tau2 + 4 * mu * tau2 * tau * gamma
                + tau2 * tau2 * kappa};
}

std::vector<std::vector<double>> discrete_effects(const DiscreteModel& model,
                                                  std::uint64_t budget)
{
    const int d = model.dim();
    check_anova_dim(d);
    const std::uint64_t L = static_cast<std::uint64_t>(model.levels());
    const std::uint64_t cells = model.size();
    const std::uint64_t n_sets = std::uint64_t{1} << d;
    if (cells > budget / n_sets)
        throw ResourceError("discrete ANOVA needs " + std::to_string(cells)
                            + " x " + std::to_string(n_sets)
                            + " operations, over the budget of "
                            + std::to_string(budget));

    // Conditional means E[f | x_u] for every u.
    std::vector<std::vector<CompensatedSum>> sums(n_sets);
    std::vector<std::size_t> table_size(n_sets);
    for (std::uint64_t u = 0; u < n_sets; ++u) {
        table_size[u] = checked_pow(L, std::popcount(u), cells);
        sums[u].resize(table_size[u]);
    }
    std::vector<int> digits(d);
    for (std::size_t i = 0; i < cells; ++i) {
        for (int j = 0; j < d; ++j)
            digits[j] = model.digit(i, j);
        const double fi = model.table()[i];
        for (std::uint64_t u = 0; u < n_sets; ++u) {
            std::size_t s = 0, stride = 1;
            for (int j = 0; j < d; ++j) {
                if ((u >> j) & 1u) {
                    s += stride * digits[j];
                    stride *= L;
                }
            }
            sums[u][s].add(fi);
        }
    }

    std::vector<std::vector<double>> effects(n_sets);
    std::vector<int> sub_digits(d);
    for (std::uint64_t u = 0; u < n_sets; ++u) {
        const double weight = static_cast<double>(table_size[u])
                              / static_cast<double>(cells);
        auto& eff = effects[u];
        eff.resize(table_size[u]);
        for (std::size_t s = 0; s < table_size[u]; ++s) {
            // Decode digits of coordinates in u (increasing order).
            std::size_t rem = s;
            for (int j = 0; j < d; ++j) {
                if ((u >> j) & 1u) {
                    sub_digits[j] = static_cast<int>(rem % L);
                    rem /= L;
                }
            }
            CompensatedSum value;
            value.add(sums[u][s].value() * weight);
            // Subtract effects of proper subsets (all have smaller masks).
            for (std::uint64_t w = (u - 1) & u;; w = (w - 1) & u) {
                if (w == u)
                    break;
                std::size_t t = 0, stride = 1;
                for (int j = 0; j < d; ++j) {
                    if ((w >> j) & 1u) {
                        t += stride * sub_digits[j];
                        stride *= L;
                    }
                }
                value.add(-effects[w][t]);
                if (w == 0)
                    break;
            }
            eff[s] = value.value();
        }
        if (u == 0)
            eff[0] = sums[0][0].value() / static_cast<double>(cells);
    }
    return effects;
}

AnovaReport discrete_anova(const DiscreteModel& model, std::uint64_t budget)
{
    const auto effects = discrete_effects(model, budget);
    const int d = model.dim();
    const std::size_t n_sets = effects.size();

    AnovaReport r;
    r.dim = d;
    r.mu = effects[0][0];
    r.sigma2_u.assign(n_sets, 0.0);
    for (std::size_t u = 1; u < n_sets; ++u) {
        CompensatedSum sq;
        for (double e : effects[u])
            sq.add(e * e);
        r.sigma2_u[u] = sq.value() / static_cast<double>(effects[u].size());
    }
    CompensatedSum total;
    for (std::size_t u = 1; u < n_sets; ++u)
        total.add(r.sigma2_u[u]);
    r.sigma2 = total.value();

    r.lower_u.assign(n_sets, 0.0);
    r.upper_u.assign(n_sets, 0.0);
    for (std::size_t u = 0; u < n_sets; ++u) {
        CompensatedSum lo, hi;
        for (std::size_t w = 1; w < n_sets; ++w) {
            if ((w & ~u) == 0)
                lo.add(r.sigma2_u[w]);
            if ((w & u) != 0)
                hi.add(r.sigma2_u[w]);
        }
        r.lower_u[u] = lo.value();
        r.upper_u[u] = hi.value();
    }
    return r;
}

AnovaReport analytic_anova(const Model& model)
{
    if (auto* g = std::get_if<GFunction>(&model))
        return product_anova(g_as_product(*g));
    if (auto* p = std::get_if<ProductModel>(&model))
        return product_anova(*p);
    return discrete_anova(std::get<DiscreteModel>(model));
}

double analytic_mean(const Model& model)
{
    if (auto* g = std::get_if<GFunction>(&model))
        return g->mean();
    if (auto* p = std::get_if<ProductModel>(&model))
        return p->mean();
    const auto& t = std::get<DiscreteModel>(model).table();
    CompensatedSum s;
    for (double v : t)
        s.add(v);
    return s.value() / static_cast<double>(t.size());
}

GFunction builtin_g_function()
{
    return GFunction({19.0, 9.0, 4.0});
}

ProductModel builtin_product6()
{
    return ProductModel::with_shape({1, 1, 1, 1, 1, 1},
                                    {1.0, 1.0, 0.5, 0.5, 0.25, 0.25},
                                    Shape::uniform());
}

}  // namespace pickfreeze
