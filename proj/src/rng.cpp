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

#include "pickfreeze/rng.hpp"

#include <string>

namespace pickfreeze {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53;
constexpr std::uint32_t kMul1 = 0xCD9E8D57;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo)
{
    std::uint64_t p = std::uint64_t{a} * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

// 53 random bits onto [0,1).
inline double to_unit(std::uint32_t hi, std::uint32_t lo)
{
    std::uint64_t bits = (std::uint64_t{hi} << 32) | lo;
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key)
{
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

UniformStream::UniformStream(RngSpec spec, Role role)
    : key_{static_cast<std::uint32_t>(spec.seed),
           static_cast<std::uint32_t>(spec.seed >> 32)}
    , replicate_(spec.replicate)
    , role_(static_cast<std::uint32_t>(role))
{
}

double UniformStream::next()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    auto out = philox4x32_10({static_cast<std::uint32_t>(position_),
                              static_cast<std::uint32_t>(position_ >> 32),
                              replicate_, role_},
                             key_);
    ++position_;
    spare_ = to_unit(out[3], out[2]);
    has_spare_ = true;
    return to_unit(out[1], out[0]);
}

Point UniformStream::next_point(int dim)
{
    Point p(dim);
    for (int j = 0; j < dim; ++j)
        p.c_[j] = next();
    return p;
}

SampleStream::SampleStream(RngSpec spec, int dim)
    : dim_(dim)
    , streams_{UniformStream(spec, Role::x), UniformStream(spec, Role::y),
               UniformStream(spec, Role::z), UniformStream(spec, Role::w)}
{
    if (dim < 1 || dim > kMaxDim)
        throw InvalidArgument("sample dimension " + std::to_string(dim)
                              + " outside 1.." + std::to_string(kMaxDim));
}

SampleBlock SampleStream::next()
{
    SampleBlock b;
    b.x = streams_[0].next_point(dim_);
    b.y = streams_[1].next_point(dim_);
    b.z = streams_[2].next_point(dim_);
    b.w = streams_[3].next_point(dim_);
    return b;
}

}  // namespace pickfreeze
