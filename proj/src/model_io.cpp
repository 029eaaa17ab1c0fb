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

#include "pickfreeze/model_io.hpp"

#include <cstdint>
#include <fstream>
#include <limits>
#include <set>

namespace pickfreeze {

namespace {

using nlohmann::json;

void reject_unknown(const json& doc, const std::set<std::string>& allowed,
                    std::string_view what)
{
    for (const auto& item : doc.items())
        if (!allowed.count(item.key()))
            throw InvalidArgument("unknown key '" + item.key() + "' in "
                                  + std::string(what));
}

std::vector<double> real_list(const json& doc, const char* key)
{
    if (!doc.contains(key))
        throw InvalidArgument(std::string("missing key '") + key + "'");
    const auto& v = doc.at(key);
    if (!v.is_array())
        throw InvalidArgument(std::string("'") + key + "' must be an array");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number())
            throw InvalidArgument(std::string("'") + key
                                  + "' must contain only numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

Shape shape_named(const std::string& name)
{
    if (name == "uniform")
        return Shape::uniform();
    if (name == "tent")
        return Shape::tent();
    throw InvalidArgument("unknown shape '" + name
                          + "' (expected uniform or tent)");
}

int infer_dim(std::size_t entries, int levels)
{
    if (levels < 2) {
        throw InvalidArgument("discrete model needs levels >= 2 to infer "
                              "its dimension from the table");
    }
    int d = 0;
    std::size_t n = entries;
    while (n > 1 && n % static_cast<std::size_t>(levels) == 0) {
        n /= static_cast<std::size_t>(levels);
        ++d;
    }
    if (n != 1 || d == 0)
        throw InvalidArgument("discrete table has " + std::to_string(entries)
                              + " entries, not a power of levels = "
                              + std::to_string(levels));
    return d;
}

json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw InvalidArgument("cannot open model file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidArgument("malformed JSON in '" + path + "': " + e.what());
    }
}

}  // namespace

Model model_from_json(const json& doc)
{
    if (!doc.is_object())
        throw InvalidArgument("model document must be a JSON object");
    reject_unknown(doc, {"kind", "a", "mu", "tau", "g", "levels", "table"},
                   "model document");
    if (!doc.contains("kind") || !doc.at("kind").is_string())
        throw InvalidArgument("model document needs a string 'kind'");
    const auto kind = doc.at("kind").get<std::string>();

    if (kind == "g-function") {
        reject_unknown(doc, {"kind", "a"}, "g-function model");
        return GFunction(real_list(doc, "a"));
    }
    if (kind == "product") {
        reject_unknown(doc, {"kind", "mu", "tau", "g"}, "product model");
        auto mu = real_list(doc, "mu");
        auto tau = real_list(doc, "tau");
        if (mu.size() != tau.size())
            throw InvalidArgument("product model: 'mu' and 'tau' differ in "
                                  "length");
        std::vector<Shape> shapes(mu.size(), Shape::uniform());
        if (doc.contains("g")) {
            const auto& g = doc.at("g");
            if (g.is_string()) {
                shapes.assign(mu.size(), shape_named(g.get<std::string>()));
            } else if (g.is_array() && g.size() == mu.size()) {
                for (std::size_t j = 0; j < g.size(); ++j) {
                    if (!g[j].is_string())
                        throw InvalidArgument("'g' entries must be strings");
                    shapes[j] = shape_named(g[j].get<std::string>());
                }
            } else {
                throw InvalidArgument("'g' must be a shape name or one name "
                                      "per coordinate");
            }
        }
        std::vector<Factor> factors;
        for (std::size_t j = 0; j < mu.size(); ++j)
            factors.push_back({mu[j], tau[j], shapes[j]});
        return ProductModel(std::move(factors));
    }
    if (kind == "discrete") {
        reject_unknown(doc, {"kind", "levels", "table"}, "discrete model");
        if (!doc.contains("levels") || !doc.at("levels").is_number_integer())
            throw InvalidArgument("discrete model needs integer 'levels'");
        const int levels = doc.at("levels").get<int>();
        auto table = real_list(doc, "table");
        const int d = infer_dim(table.size(), levels);
        return DiscreteModel(levels, d, std::move(table));
    }
    throw InvalidArgument("unknown model kind '" + kind
                          + "' (expected g-function, product or discrete)");
}

json model_to_json(const Model& model)
{
    if (auto* g = std::get_if<GFunction>(&model))
        return {{"kind", "g-function"}, {"a", g->a()}};
    if (auto* p = std::get_if<ProductModel>(&model)) {
        std::vector<double> mu, tau;
        std::vector<std::string> shapes;
        for (const auto& f : p->factors()) {
            if (f.shape.kind() == ShapeKind::custom)
                throw InvalidArgument("custom shapes cannot be serialized");
            mu.push_back(f.mu);
            tau.push_back(f.tau);
            shapes.push_back(f.shape.name());
        }
        return {{"kind", "product"}, {"mu", mu}, {"tau", tau}, {"g", shapes}};
    }
    const auto& d = std::get<DiscreteModel>(model);
    return {{"kind", "discrete"}, {"levels", d.levels()}, {"table", d.table()}};
}

NamedModel load_model(std::string_view spec)
{
    if (spec == "g")
        return {builtin_g_function(), "g"};
    if (spec == "product6")
        return {builtin_product6(), "product6"};
    const std::string path(spec);
    return {model_from_json(read_json_file(path)), path};
}

ExperimentConfig experiment_from_json(const json& doc)
{
    if (!doc.is_object())
        throw InvalidArgument("experiment document must be a JSON object");
    reject_unknown(doc,
                   {"model", "sets", "n", "replicates", "seed", "center",
                    "include_original"},
                   "experiment document");
    ExperimentConfig c;
    if (!doc.contains("model"))
        throw InvalidArgument("experiment document needs 'model'");
    const auto& m = doc.at("model");
    if (m.is_string()) {
        auto named = load_model(m.get<std::string>());
        c.model = std::move(named.model);
        c.model_name = std::move(named.name);
    } else {
        c.model = model_from_json(m);
        c.model_name = "inline";
    }
    const int d = dimension(c.model);

    if (!doc.contains("sets") || !doc.at("sets").is_array())
        throw InvalidArgument("experiment document needs a 'sets' array");
    for (const auto& s : doc.at("sets")) {
        if (!s.is_string())
            throw InvalidArgument("'sets' entries must be strings like "
                                  "\"1,3\"");
        c.sets.push_back(IndexSet::parse(s.get<std::string>(), d));
    }
    auto get_uint = [&](const char* key, std::uint64_t fallback) {
        if (!doc.contains(key))
            return fallback;
        const auto& v = doc.at(key);
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
            throw InvalidArgument(std::string("'") + key
                                  + "' must be a nonnegative integer");
        return v.get<std::uint64_t>();
    };
    c.n = get_uint("n", c.n);
    const auto reps = get_uint("replicates", c.replicates);
    if (reps > std::numeric_limits<std::uint32_t>::max())
        throw InvalidArgument("'replicates' is too large");
    c.replicates = static_cast<std::uint32_t>(reps);
    c.seed = get_uint("seed", c.seed);
    if (doc.contains("center")) {
        const auto& v = doc.at("center");
        if (v.is_number())
            c.center = v.get<double>();
        else if (!(v.is_string() && v.get<std::string>() == "exact"))
            throw InvalidArgument("'center' must be a number or \"exact\"");
    }
    if (doc.contains("include_original")) {
        if (!doc.at("include_original").is_boolean())
            throw InvalidArgument("'include_original' must be a boolean");
        c.include_original = doc.at("include_original").get<bool>();
    }
    c.validate();
    return c;
}

}  // namespace pickfreeze
