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

#include <set>

#include "pickfreeze/estimators.hpp"
#include "pickfreeze/rng.hpp"

using namespace pickfreeze;

// Known-answer vectors from the Random123 distribution (kat_vectors).
TEST(Philox, KnownAnswers)
{
    using A4 = std::array<std::uint32_t, 4>;
    EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}),
              (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                            {0xffffffff, 0xffffffff}),
              (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                            {0xa4093822, 0x299f31d0}),
              (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(UniformStream, Deterministic)
{
    UniformStream a({42, 3}, Role::z), b({42, 3}, Role::z);
    for (int i = 0; i < 1000; ++i)
        ASSERT_EQ(a.next(), b.next());
    // Two draws per Philox block.
    EXPECT_EQ(a.position(), 500u);
}

TEST(UniformStream, StreamsDiffer)
{
    std::set<double> firsts;
    for (std::uint64_t seed : {0ull, 1ull})
        for (std::uint32_t rep : {0u, 1u})
            for (Role r : {Role::x, Role::y, Role::z, Role::w})
                firsts.insert(UniformStream({seed, rep}, r).next());
    EXPECT_EQ(firsts.size(), 16u);
}

TEST(UniformStream, RangeAndMoments)
{
    UniformStream s({7, 0}, Role::x);
    Accumulator acc;
    for (int i = 0; i < 1'000'000; ++i) {
        const double u = s.next();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        acc.push(u);
    }
    EXPECT_NEAR(acc.mean(), 0.5, 0.002);
    EXPECT_NEAR(acc.variance(), 1.0 / 12.0, 0.001);
}

TEST(SampleStream, RolesIndependentOfDimensionUse)
{
    SampleStream s({5, 2}, 3);
    UniformStream y({5, 2}, Role::y);
    for (int i = 0; i < 10; ++i) {
        const auto b = s.next();
        EXPECT_EQ(b.x.dim(), 3);
        for (int j = 0; j < 3; ++j)
            EXPECT_EQ(b.y[j], y.next());
    }
    EXPECT_THROW(SampleStream({0, 0}, 0), InvalidArgument);
    EXPECT_THROW(SampleStream({0, 0}, kMaxDim + 1), InvalidArgument);
}
