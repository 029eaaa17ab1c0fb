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

#include "pickfreeze/models.hpp"
#include "pickfreeze/theory.hpp"

namespace pickfreeze {

struct VerifyOptions {
    int levels = 3;
    int dims = 2;
    int trials = 20;
    std::uint64_t seed = 0;
    double rel_tol = 1e-10;
    EnumerationBudget budget;
    // Test hook: swap in a Correlation 2 term that blends the wrong
    // coordinates, to show the suite notices.
    bool corrupt_correlation2 = false;
};

struct VerifyCheck {
    std::string name;
    bool passed = false;
    double max_rel_error = 0;
    std::string detail;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool all_passed() const;
};

/// Random L^d discrete table with entries in [-1, 3), from (seed, trial).
DiscreteModel random_discrete_model(int levels, int dims, std::uint64_t seed,
                                    std::uint32_t trial);

/*!
 * Exact-identity suite on `trials` random discrete models: ANOVA
 * invariants and reconstruction, unbiasedness of every estimator kind by
 * enumeration (including every generalized (v, v2) pair), the cross-moment
 * expectation of the original estimator, and the fourth-moment variance
 * identity on a random discrete product model.
 *
 * Throws ResourceError before doing any work if the largest enumeration
 * would exceed the budget.
 */
VerifyReport run_verification(const VerifyOptions& options);

}  // namespace pickfreeze
