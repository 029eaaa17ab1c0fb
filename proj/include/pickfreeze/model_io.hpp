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

#include <string>
#include <string_view>

#include "pickfreeze/experiments.hpp"
#include "pickfreeze/models.hpp"

#include <json.hpp>

namespace pickfreeze {

/*!
 * Model configuration document:
 *
 *   { "kind": "g-function" | "product" | "discrete",
 *     "a": [...],                        // g-function
 *     "mu": [...], "tau": [...],         // product
 *     "g": "uniform" | "tent" | [...],   // product, default uniform
 *     "levels": L, "table": [...] }      // discrete, L^d entries
 *
 * Unknown keys, and keys that do not apply to the kind, are rejected.
 */
Model model_from_json(const nlohmann::json& doc);
nlohmann::json model_to_json(const Model& model);

struct NamedModel {
    Model model;
    std::string name;
};

/// "g" and "product6" name the builtin benchmarks; anything else is read
/// as a path to a model document.
NamedModel load_model(std::string_view spec);

/*!
 * Experiment document:
 *
 *   { "model": "g" | "product6" | "<path>" | { model document },
 *     "sets": ["1", "2,3", ...], "n": 1000000, "replicates": 10,
 *     "seed": 0, "center": "exact" | <number>, "include_original": false }
 */
ExperimentConfig experiment_from_json(const nlohmann::json& doc);

}  // namespace pickfreeze
