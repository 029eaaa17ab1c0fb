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
#include <cstdint>

#include "pickfreeze/core.hpp"

namespace pickfreeze {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11). Pure function of
/// (counter, key); the stream layout below relies on that.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key);

/// Identifies one replicate's sample streams under a master seed.
struct RngSpec {
    std::uint64_t seed = 0;
    std::uint32_t replicate = 0;
};

//---------------------------------------------------------------------------//
/*!
 * Sequential uniform draws on [0,1) for one (seed, replicate, role) stream.
 *
 * The Philox counter is laid out as (position lo, position hi, replicate,
 * role) and keyed by the seed, so distinct streams never share a counter
 * value and any stream can be restarted from position zero.
 */
class UniformStream {
  public:
    UniformStream(RngSpec spec, Role role);

    double next();
    Point next_point(int dim);
    std::uint64_t position() const noexcept { return position_; }

  private:
    std::array<std::uint32_t, 2> key_;
    std::uint32_t replicate_;
    std::uint32_t role_;
    std::uint64_t position_ = 0;
    double spare_ = 0;
    bool has_spare_ = false;
};

/// Independent x, y, z, w points for successive samples of one replicate.
class SampleStream {
  public:
    SampleStream(RngSpec spec, int dim);

    SampleBlock next();
    int dim() const noexcept { return dim_; }

  private:
    int dim_;
    std::array<UniformStream, 4> streams_;
};

}  // namespace pickfreeze
