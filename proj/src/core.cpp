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

#include "pickfreeze/core.hpp"

#include <algorithm>
#include <charconv>
#include <string>

namespace pickfreeze {

namespace {

void check_dim(int dim)
{
    if (dim < 0 || dim > kMaxDim)
        throw InvalidArgument("dimension " + std::to_string(dim)
                              + " outside supported range 0.."
                              + std::to_string(kMaxDim));
}

void check_same_dim(IndexSet a, IndexSet b)
{
    if (a.dim() != b.dim())
        throw InvalidArgument("index sets of different dimension ("
                              + std::to_string(a.dim()) + " vs "
                              + std::to_string(b.dim()) + ")");
}

std::string_view trim(std::string_view s)
{
    auto is_space = [](char c) { return c == ' ' || c == '\t'; };
    while (!s.empty() && is_space(s.front()))
        s.remove_prefix(1);
    while (!s.empty() && is_space(s.back()))
        s.remove_suffix(1);
    return s;
}

}  // namespace

IndexSet IndexSet::empty(int dim)
{
    check_dim(dim);
    return {0, dim};
}

IndexSet IndexSet::full(int dim)
{
    check_dim(dim);
    return {full_mask(dim), dim};
}

IndexSet IndexSet::from_mask(std::uint64_t bits, int dim)
{
    check_dim(dim);
    if ((bits & ~full_mask(dim)) != 0)
        throw InvalidArgument("mask has bits outside dimension "
                              + std::to_string(dim));
    return {bits, dim};
}

IndexSet IndexSet::of(int dim, std::initializer_list<int> coords)
{
    check_dim(dim);
    std::uint64_t bits = 0;
    for (int c : coords) {
        if (c < 1 || c > dim)
            throw InvalidArgument("coordinate " + std::to_string(c)
                                  + " out of range 1.."
                                  + std::to_string(dim));
        bits |= std::uint64_t{1} << (c - 1);
    }
    return {bits, dim};
}

IndexSet IndexSet::parse(std::string_view text, int dim)
{
    check_dim(dim);
    text = trim(text);
    if (!text.empty() && text.front() == '{') {
        if (text.back() != '}')
            throw InvalidArgument("unbalanced braces in index set '"
                                  + std::string(text) + "'");
        text = trim(text.substr(1, text.size() - 2));
    }
    std::uint64_t bits = 0;
    while (!text.empty()) {
        auto comma = text.find(',');
        auto item = trim(text.substr(0, comma));
        int c = 0;
        auto [ptr, ec]
            = std::from_chars(item.data(), item.data() + item.size(), c);
        if (item.empty() || ec != std::errc{}
            || ptr != item.data() + item.size())
            throw InvalidArgument("malformed coordinate '" + std::string(item)
                                  + "' in index set");
        if (c < 1 || c > dim)
            throw InvalidArgument("coordinate " + std::to_string(c)
                                  + " out of range 1.."
                                  + std::to_string(dim));
        bits |= std::uint64_t{1} << (c - 1);
        if (comma == std::string_view::npos)
            break;
        text = text.substr(comma + 1);
        if (trim(text).empty())
            throw InvalidArgument("trailing comma in index set");
    }
    return {bits, dim};
}

IndexSet IndexSet::complement() const noexcept
{
    return {~bits_ & full_mask(dim_), dim_};
}

IndexSet IndexSet::operator&(IndexSet other) const
{
    check_same_dim(*this, other);
    return {bits_ & other.bits_, dim_};
}

IndexSet IndexSet::operator|(IndexSet other) const
{
    check_same_dim(*this, other);
    return {bits_ | other.bits_, dim_};
}

bool IndexSet::is_subset_of(IndexSet other) const
{
    check_same_dim(*this, other);
    return (bits_ & ~other.bits_) == 0;
}

bool IndexSet::is_disjoint(IndexSet other) const
{
    check_same_dim(*this, other);
    return (bits_ & other.bits_) == 0;
}

std::string IndexSet::to_string() const
{
    std::string out = "{";
    bool first = true;
    for (int j = 0; j < dim_; ++j) {
        if (!contains(j))
            continue;
        if (!first)
            out += ',';
        out += std::to_string(j + 1);
        first = false;
    }
    out += '}';
    return out;
}

//---------------------------------------------------------------------------//

Point::Point(int dim)
{
    if (dim < 0 || dim > kMaxDim)
        throw InvalidArgument("point dimension " + std::to_string(dim)
                              + " outside 0.." + std::to_string(kMaxDim));
    dim_ = dim;
}

Point Point::from(std::span<const double> coords)
{
    Point p(static_cast<int>(
        std::min<std::size_t>(coords.size(), kMaxDim + std::size_t{1})));
    for (std::size_t j = 0; j < coords.size(); ++j) {
        double c = coords[j];
        if (!(c >= 0.0 && c < 1.0))
            throw InvalidArgument("coordinate " + std::to_string(j + 1)
                                  + " = " + std::to_string(c)
                                  + " is outside [0,1)");
        p.c_[j] = c;
    }
    return p;
}

Point Point::of(std::initializer_list<double> coords)
{
    return from(std::span<const double>(coords.begin(), coords.size()));
}

bool operator==(const Point& a, const Point& b)
{
    return a.dim_ == b.dim_
           && std::equal(a.c_.begin(), a.c_.begin() + a.dim_, b.c_.begin());
}

Point blend(const Point& x, const Point& y, IndexSet u)
{
    if (x.dim_ != y.dim_ || x.dim_ != u.dim())
        throw InvalidArgument("blend: dimension mismatch (x "
                              + std::to_string(x.dim_) + ", y "
                              + std::to_string(y.dim_) + ", u "
                              + std::to_string(u.dim()) + ")");
    Point out;
    out.dim_ = x.dim_;
    const std::uint64_t bits = u.bits();
    for (int j = 0; j < x.dim_; ++j)
        out.c_[j] = ((bits >> j) & 1u) ? x.c_[j] : y.c_[j];
    return out;
}

}  // namespace pickfreeze
