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

#include <array>
#include <bit>
#include <cmath>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pickfreeze {

/// Largest supported input dimension; an IndexSet must fit in one word.
inline constexpr int kMaxDim = 63;

/// Bad caller input: dimension mismatch, malformed set, out-of-range value.
class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A computation refused to start because it would exceed a configured cap.
class ResourceError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

//---------------------------------------------------------------------------//
/*!
 * Subset of the coordinates {1, ..., d}.
 *
 * Stored as a bitmask where bit j (zero-based) marks coordinate j+1. Bits at
 * or above the dimension are always clear. Text forms use one-based
 * coordinates, e.g. "{1,3}".
 */
class IndexSet {
  public:
    class SubsetIterator;
    class SubsetRange;

    constexpr IndexSet() = default;

    static IndexSet empty(int dim);
    static IndexSet full(int dim);
    static IndexSet from_mask(std::uint64_t bits, int dim);
    // One-based coordinates, e.g. IndexSet::of(3, {1, 3}).
    static IndexSet of(int dim, std::initializer_list<int> coords);
    // Accepts "1,3", "{1,3}", "{}" or "" (one-based).
    static IndexSet parse(std::string_view text, int dim);

    constexpr std::uint64_t bits() const noexcept { return bits_; }
    constexpr int dim() const noexcept { return dim_; }
    constexpr int size() const noexcept { return std::popcount(bits_); }
    constexpr bool is_empty() const noexcept { return bits_ == 0; }
    constexpr bool is_full() const noexcept { return bits_ == full_mask(dim_); }

    // Zero-based membership test.
    constexpr bool contains(int j) const noexcept
    {
        return j >= 0 && j < dim_ && ((bits_ >> j) & 1u) != 0;
    }

    IndexSet complement() const noexcept;
    IndexSet operator&(IndexSet other) const;
    IndexSet operator|(IndexSet other) const;
    bool is_subset_of(IndexSet other) const;
    bool is_disjoint(IndexSet other) const;

    // All 2^|u| subsets of this set, each exactly once, starting at the
    // empty set in increasing mask order.
    SubsetRange subsets() const noexcept;

    std::string to_string() const;

    friend constexpr bool operator==(IndexSet, IndexSet) = default;
    friend constexpr auto operator<=>(IndexSet a, IndexSet b)
    {
        if (auto c = a.dim_ <=> b.dim_; c != 0)
            return c;
        return a.bits_ <=> b.bits_;
    }

    static constexpr std::uint64_t full_mask(int dim) noexcept
    {
        return dim >= 64 ? ~std::uint64_t{0}
                         : ((std::uint64_t{1} << dim) - 1);
    }

  private:
    constexpr IndexSet(std::uint64_t bits, int dim) : bits_(bits), dim_(dim)
    {
    }

    std::uint64_t bits_ = 0;
    int dim_ = 0;
};

class IndexSet::SubsetIterator {
  public:
    using value_type = IndexSet;
    using difference_type = std::ptrdiff_t;

    SubsetIterator() = default;
    SubsetIterator(std::uint64_t parent, int dim, bool done)
        : parent_(parent), dim_(dim), done_(done)
    {
    }

    IndexSet operator*() const { return IndexSet::from_mask(cur_, dim_); }
    SubsetIterator& operator++()
    {
        cur_ = (cur_ - parent_) & parent_;
        done_ = (cur_ == 0);
        return *this;
    }
    SubsetIterator operator++(int)
    {
        auto tmp = *this;
        ++*this;
        return tmp;
    }
    bool operator==(const SubsetIterator& o) const
    {
        return done_ == o.done_ && (done_ || cur_ == o.cur_);
    }

  private:
    std::uint64_t parent_ = 0;
    std::uint64_t cur_ = 0;
    int dim_ = 0;
    bool done_ = true;
};

class IndexSet::SubsetRange {
  public:
    SubsetRange(std::uint64_t parent, int dim) : parent_(parent), dim_(dim) {}
    SubsetIterator begin() const { return {parent_, dim_, false}; }
    SubsetIterator end() const { return {parent_, dim_, true}; }

  private:
    std::uint64_t parent_;
    int dim_;
};

inline IndexSet::SubsetRange IndexSet::subsets() const noexcept
{
    return {bits_, dim_};
}

//---------------------------------------------------------------------------//
/*!
 * A point in the half-open unit cube [0,1)^d.
 *
 * Fixed-capacity storage so points can be copied around the sampling loops
 * without touching the heap.
 */
class Point {
  public:
    Point() = default;
    // The origin in dimension dim.
    explicit Point(int dim);

    static Point from(std::span<const double> coords);
    static Point of(std::initializer_list<double> coords);

    int dim() const noexcept { return dim_; }
    double operator[](int j) const noexcept { return c_[j]; }
    std::span<const double> coords() const noexcept
    {
        return {c_.data(), static_cast<std::size_t>(dim_)};
    }

    friend bool operator==(const Point& a, const Point& b);

  private:
    friend Point blend(const Point&, const Point&, IndexSet);
    friend class UniformStream;

    std::array<double, kMaxDim> c_{};
    int dim_ = 0;
};

/// Coordinates j in u taken from x, the rest from y (written x_u:y_{-u}).
Point blend(const Point& x, const Point& y, IndexSet u);

/// Which of the four independent vectors a coordinate comes from.
enum class Role : std::uint32_t { x = 0, y = 1, z = 2, w = 3 };

struct SampleBlock {
    Point x;
    Point y;
    Point z;
    Point w;

    const Point& operator[](Role r) const noexcept
    {
        switch (r) {
        case Role::x: return x;
        case Role::y: return y;
        case Role::z: return z;
        case Role::w: break;
        }
        return w;
    }
};

/// Number of function evaluations. Thread-confined; merge with add().
class EvalCounter {
  public:
    std::uint64_t count() const noexcept { return count_; }
    void increment() noexcept { ++count_; }
    void add(std::uint64_t k) noexcept { count_ += k; }

  private:
    std::uint64_t count_ = 0;
};

/// Neumaier-compensated running sum.
class CompensatedSum {
  public:
    void add(double v) noexcept
    {
        double t = sum_ + v;
        if (std::fabs(sum_) >= std::fabs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

  private:
    double sum_ = 0;
    double comp_ = 0;
};

}  // namespace pickfreeze
