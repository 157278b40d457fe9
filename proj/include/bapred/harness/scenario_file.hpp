// Copyright 2026 The bapred Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bapred/harness/scenario.hpp"

namespace bapred {

inline constexpr const char* scenario_schema = "bapred.scenario/1";

/// A scenario file that does not parse or does not fit the schema. Line and
/// column are 1-based; 0 when unknown.
class ScenarioFileError : public std::runtime_error {
 public:
    ScenarioFileError(const std::string& msg, int line, int column)
        : std::runtime_error(format(msg, line, column)), line_(line), column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }

 private:
    static std::string format(const std::string& msg, int line, int column) {
        if (line <= 0) return msg;
        return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg;
    }
    int line_;
    int column_;
};

// ---------------------------------------------------------------------------
// Single scenarios as JSON (the form stored inside metrics records).

inline nlohmann::json to_json(const AdversarySpec& a) {
    nlohmann::json j = {{"name", a.name}};
    for (const auto& [k, v] : a.params) j[k] = v;
    return j;
}

inline AdversarySpec adversary_from_json(const nlohmann::json& j) {
    AdversarySpec a;
    if (j.is_string()) {
        a.name = j.get<std::string>();
        return a;
    }
    if (!j.is_object() || !j.contains("name") || !j["name"].is_string())
        throw ConfigError("adversary must be a name or an object with a \"name\"");
    a.name = j["name"].get<std::string>();
    for (const auto& [k, v] : j.items()) {
        if (k == "name") continue;
        if (!v.is_number_integer()) throw ConfigError("adversary parameter \"" + k + "\" must be an integer");
        a.params[k] = v.get<std::int64_t>();
    }
    return a;
}

inline nlohmann::json to_json(const Scenario& s) {
    nlohmann::json faulty = nlohmann::json::array();
    for (ProcessId p : s.faulty) faulty.push_back(p.value());
    return {
        {"protocol", std::string(to_string(s.protocol))},
        {"variant", to_string(s.variant)},
        {"scheme", to_string(s.scheme)},
        {"n", s.n},
        {"t", s.t},
        {"faulty", faulty},
        {"inputs", s.inputs},
        {"domain", s.domain},
        {"B", s.budget},
        {"allocation", to_string(s.allocation)},
        {"adversary", to_json(s.adversary)},
        {"seed", s.seed},
        {"shuffle_salt", s.shuffle_salt},
        {"mutant", s.skip_grade_guard},
        {"params", s.params},
    };
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
    Scenario s;
    s.protocol = parse_protocol(j.at("protocol").get<std::string>());
    s.variant = parse_variant(j.at("variant").get<std::string>());
    s.scheme = parse_scheme(j.value("scheme", std::string("simulated")));
    s.n = j.at("n").get<int>();
    s.t = j.at("t").get<int>();
    for (int p : j.at("faulty")) s.faulty.emplace_back(p);
    s.inputs = j.at("inputs").get<std::vector<Value>>();
    s.domain = j.value("domain", Value{2});
    s.budget = j.value("B", std::int64_t{0});
    s.allocation = parse_allocation_policy(j.value("allocation", std::string("spread-uniform")));
    s.adversary = adversary_from_json(j.value("adversary", nlohmann::json("none")));
    s.seed = j.value("seed", std::uint64_t{0});
    s.shuffle_salt = j.value("shuffle_salt", std::uint64_t{0});
    s.skip_grade_guard = j.value("mutant", false);
    if (j.contains("params")) s.params = j["params"].get<std::map<std::string, std::int64_t>>();
    return s;
}

// ---------------------------------------------------------------------------
// Sweep files: scenario fields where any of n, t, f, B, allocation,
// adversary, seeds and variant may be a list (the cross product is run).

/// Axis value such as 3, "n", "4n", "t", "t/2", "2t".
struct AxisExpr {
    std::int64_t coefficient = 0;
    char symbol = 0;  // 0, 'n' or 't'
    std::int64_t divisor = 1;

    std::int64_t eval(std::int64_t n, std::int64_t t) const {
        const std::int64_t base = symbol == 'n' ? n : symbol == 't' ? t : 1;
        return coefficient * base / divisor;
    }
};

inline AxisExpr parse_axis_expr(const nlohmann::json& j) {
    if (j.is_number_integer()) return {j.get<std::int64_t>(), 0, 1};
    if (!j.is_string()) throw ConfigError("expected an integer or an expression like \"4n\" or \"t/2\"");
    const std::string s = j.get<std::string>();
    std::size_t i = 0;
    AxisExpr e;
    std::string digits;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) digits += s[i++];
    e.coefficient = digits.empty() ? 1 : std::stoll(digits);
    if (i < s.size() && (s[i] == 'n' || s[i] == 't')) e.symbol = s[i++];
    else if (digits.empty()) throw ConfigError("bad axis expression \"" + s + "\"");
    if (i < s.size() && s[i] == '/') {
        ++i;
        std::string d;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) d += s[i++];
        if (d.empty() || std::stoll(d) == 0) throw ConfigError("bad divisor in \"" + s + "\"");
        e.divisor = std::stoll(d);
    }
    if (i != s.size()) throw ConfigError("bad axis expression \"" + s + "\"");
    return e;
}

struct SweepPoint {
    std::size_t index = 0;
    std::optional<Scenario> scenario;
    std::string skipped;  // reason, when scenario is absent
};

namespace detail {

/// 1-based line and column of a byte offset.
inline std::pair<int, int> line_column(const std::string& text, std::size_t offset) {
    int line = 1;
    int col = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

/// Where a top-level key is written, for schema errors.
inline std::pair<int, int> key_position(const std::string& text, const std::string& key) {
    const auto pos = text.find("\"" + key + "\"");
    if (pos == std::string::npos) return {0, 0};
    return line_column(text, pos);
}

inline std::vector<nlohmann::json> as_list(const nlohmann::json& j) {
    if (j.is_array()) return std::vector<nlohmann::json>(j.begin(), j.end());
    return {j};
}

inline std::vector<Value> resolve_inputs(const nlohmann::json& spec, int n, Value domain, std::uint64_t seed) {
    if (spec.is_array()) {
        auto v = spec.get<std::vector<Value>>();
        if (static_cast<int>(v.size()) != n) throw ConfigError("inputs list must have n entries");
        return v;
    }
    const std::string s = spec.get<std::string>();
    std::vector<Value> v(static_cast<std::size_t>(n), 0);
    if (s == "random") return draw_inputs(n, domain, seed);
    if (s == "alternating") {
        for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i % domain;
        return v;
    }
    if (s == "split") {
        for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = (2 * i >= n) ? 1 % domain : 0;
        return v;
    }
    if (s.rfind("unanimous-", 0) == 0) {
        const Value x = std::stoll(s.substr(10));
        if (x < 0 || x >= domain) throw ConfigError("unanimous input outside the domain");
        std::fill(v.begin(), v.end(), x);
        return v;
    }
    throw ConfigError("unknown input pattern \"" + s + "\"");
}

inline constexpr std::array<AllocationPolicy, 4> all_policies = {
    AllocationPolicy::concentrated_on_faulty, AllocationPolicy::concentrated_on_honest,
    AllocationPolicy::spread_uniform, AllocationPolicy::adversarial_worst};

/// "auto": starting from a seed-dependent policy, the first that can realize B.
inline std::optional<AllocationPolicy> auto_policy(const FaultSet& faults, std::int64_t budget, std::uint64_t seed) {
    for (std::size_t i = 0; i < all_policies.size(); ++i) {
        const AllocationPolicy p = all_policies[(seed + i) % all_policies.size()];
        if (budget <= max_realizable_budget(faults, p)) return p;
    }
    return std::nullopt;
}

}  // namespace detail

/// Expands a parsed sweep document into points, in axis order variant, n,
/// t, f, B, allocation, adversary, inputs, seed (seed varies fastest). Infeasible
/// points are kept with a reason.
inline std::vector<SweepPoint> expand_sweep(const nlohmann::json& doc, const std::string& text = {}) {
    auto fail = [&](const std::string& key, const std::string& msg) -> ScenarioFileError {
        const auto [line, col] = detail::key_position(text, key);
        return ScenarioFileError("\"" + key + "\": " + msg, line, col);
    };
    if (!doc.is_object()) throw ScenarioFileError("top level must be an object", 1, 1);
    if (doc.value("schema", std::string()) != scenario_schema)
        throw fail("schema", std::string("expected \"") + scenario_schema + "\"");
    static const std::vector<std::string> known = {"schema",  "protocol", "variant",  "scheme", "n",      "t",
                                                   "f",       "faulty",   "B",        "allocation", "adversary",
                                                   "seeds",   "inputs",   "domain",   "params", "shuffle_salt",
                                                   "mutant",  "comment"};
    for (const auto& [k, v] : doc.items())
        if (std::find(known.begin(), known.end(), k) == known.end()) throw fail(k, "unknown field");

    auto field = [&](const std::string& key, auto&& parse) {
        try {
            return parse();
        } catch (const ScenarioFileError&) {
            throw;
        } catch (const std::exception& e) {
            throw fail(key, e.what());
        }
    };

    const ProtocolKind protocol =
        field("protocol", [&] { return parse_protocol(doc.value("protocol", std::string("ba-with-predictions"))); });
    const auto variants = field("variant", [&] {
        std::vector<Variant> out;
        for (const auto& v : detail::as_list(doc.value("variant", nlohmann::json("unauthenticated"))))
            out.push_back(parse_variant(v.get<std::string>()));
        return out;
    });
    const SchemeKind scheme = field("scheme", [&] { return parse_scheme(doc.value("scheme", std::string("simulated"))); });
    if (!doc.contains("n")) throw ScenarioFileError("missing required field \"n\"", 0, 0);
    const auto ns = field("n", [&] {
        std::vector<int> out;
        for (const auto& v : detail::as_list(doc["n"])) out.push_back(v.get<int>());
        return out;
    });
    const auto ts = field("t", [&] {
        std::vector<std::optional<AxisExpr>> out;  // nullopt = "max"
        for (const auto& v : detail::as_list(doc.value("t", nlohmann::json("max")))) {
            if (v.is_string() && v.get<std::string>() == "max") out.push_back(std::nullopt);
            else out.push_back(parse_axis_expr(v));
        }
        return out;
    });
    const bool explicit_faults = doc.contains("faulty");
    const auto fs = field("f", [&] {
        std::vector<AxisExpr> out;
        for (const auto& v : detail::as_list(doc.value("f", nlohmann::json(0)))) out.push_back(parse_axis_expr(v));
        return out;
    });
    const auto explicit_faulty = field("faulty", [&] {
        std::vector<ProcessId> out;
        if (explicit_faults)
            for (int p : doc["faulty"]) out.emplace_back(p);
        return out;
    });
    const auto budgets = field("B", [&] {
        std::vector<AxisExpr> out;
        for (const auto& v : detail::as_list(doc.value("B", nlohmann::json(0)))) out.push_back(parse_axis_expr(v));
        return out;
    });
    const auto allocations = field("allocation", [&] {
        std::vector<std::optional<AllocationPolicy>> out;  // nullopt = auto
        for (const auto& v : detail::as_list(doc.value("allocation", nlohmann::json("spread-uniform")))) {
            const auto s = v.get<std::string>();
            if (s == "auto") out.push_back(std::nullopt);
            else out.push_back(parse_allocation_policy(s));
        }
        return out;
    });
    const auto adversaries = field("adversary", [&] {
        std::vector<AdversarySpec> out;
        for (const auto& v : detail::as_list(doc.value("adversary", nlohmann::json("none")))) {
            out.push_back(adversary_from_json(v));
            make_adversary(out.back());  // validates the name
        }
        return out;
    });
    const auto seeds = field("seeds", [&] {
        std::vector<std::uint64_t> out;
        const auto& j = doc.value("seeds", nlohmann::json(0));
        if (j.is_object()) {
            const auto from = j.at("from").get<std::uint64_t>();
            const auto count = j.at("count").get<std::uint64_t>();
            for (std::uint64_t i = 0; i < count; ++i) out.push_back(from + i);
        } else {
            for (const auto& v : detail::as_list(j)) out.push_back(v.get<std::uint64_t>());
        }
        return out;
    });
    const Value domain = field("domain", [&] {
        const Value d = doc.value("domain", Value{2});
        if (d < 1) throw ConfigError("must be at least 1");
        return d;
    });
    // A list of pattern names is an axis; a list of integers is one explicit vector.
    std::vector<nlohmann::json> input_specs;
    {
        const nlohmann::json j = doc.value("inputs", nlohmann::json("random"));
        if (j.is_array() && !j.empty() && j.front().is_string()) input_specs.assign(j.begin(), j.end());
        else input_specs.push_back(j);
    }
    const auto params = field("params", [&] {
        return doc.value("params", nlohmann::json::object()).get<std::map<std::string, std::int64_t>>();
    });
    const std::uint64_t salt = field("shuffle_salt", [&] { return doc.value("shuffle_salt", std::uint64_t{0}); });
    const bool mutant = field("mutant", [&] { return doc.value("mutant", false); });

    std::vector<SweepPoint> points;
    auto push_skip = [&](std::string why) {
        SweepPoint p;
        p.index = points.size();
        p.skipped = std::move(why);
        points.push_back(std::move(p));
    };

    auto emit = [&](Variant variant, int n, int t, int f, std::int64_t budget,
                    const std::optional<AllocationPolicy>& alloc, const AdversarySpec& adv,
                    const nlohmann::json& inputs_spec, std::uint64_t seed) {
        std::ostringstream where;
        where << "variant=" << to_string(variant) << " n=" << n << " t=" << t << " f=" << f << " B=" << budget
              << " adversary=" << adv.name << " seed=" << seed;
        const bool bad_t = variant == Variant::unauthenticated ? 3 * t >= n : 2 * t >= n;
        if (n < 1 || t < 0 || bad_t) return push_skip(where.str() + ": t violates the resilience bound");
        if (f > t || f < 0) return push_skip(where.str() + ": f exceeds t");
        if (variant == Variant::unauthenticated)
            for (const auto& info : strategy_catalog())
                if (info.name == adv.name && info.authenticated_only)
                    return push_skip(where.str() + ": adversary needs signatures");
        Scenario s;
        s.protocol = protocol;
        s.variant = variant;
        s.scheme = scheme;
        s.n = n;
        s.t = t;
        s.faulty = explicit_faults ? explicit_faulty : draw_fault_set(n, f, seed);
        s.domain = domain;
        s.budget = budget;
        s.adversary = adv;
        s.seed = seed;
        s.shuffle_salt = salt;
        s.skip_grade_guard = mutant;
        s.params = params;
        const FaultSet faults(n, s.faulty);
        if (alloc) {
            s.allocation = *alloc;
            if (budget > max_realizable_budget(faults, *alloc))
                return push_skip(where.str() + ": B not realizable under " + to_string(*alloc));
        } else if (auto p = detail::auto_policy(faults, budget, seed)) {
            s.allocation = *p;
        } else {
            return push_skip(where.str() + ": B not realizable under any allocation policy");
        }
        try {
            s.inputs = detail::resolve_inputs(inputs_spec, n, domain, seed);
        } catch (const std::exception& e) {
            throw fail("inputs", e.what());
        }
        SweepPoint p;
        p.index = points.size();
        p.scenario = std::move(s);
        points.push_back(std::move(p));
    };

    for (Variant variant : variants) {
        for (int n : ns) {
            for (const auto& t_expr : ts) {
                const int t = t_expr ? static_cast<int>(t_expr->eval(n, 0)) : default_t(variant, n);
                std::vector<int> f_values;
                if (explicit_faults) {
                    f_values.push_back(static_cast<int>(explicit_faulty.size()));
                } else {
                    for (const auto& e : fs) {
                        const int f = static_cast<int>(e.eval(n, t));
                        if (std::find(f_values.begin(), f_values.end(), f) == f_values.end()) f_values.push_back(f);
                    }
                }
                for (int f : f_values)
                    for (const auto& b_expr : budgets)
                        for (const auto& alloc : allocations)
                            for (const auto& adv : adversaries)
                                for (const auto& inputs_spec : input_specs)
                                    for (std::uint64_t seed : seeds)
                                        emit(variant, n, t, f, b_expr.eval(n, t), alloc, adv, inputs_spec, seed);
            }
        }
    }
    return points;
}

/// Parses JSON text, reporting syntax errors with line and column.
inline nlohmann::json parse_scenario_document(const std::string& text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, col] = detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0);
        std::string what = e.what();
        if (auto pos = what.find("error while parsing"); pos != std::string::npos) what = what.substr(pos);
        throw ScenarioFileError(what, line, col);
    }
}

inline std::vector<SweepPoint> parse_sweep_text(const std::string& text) {
    return expand_sweep(parse_scenario_document(text), text);
}

inline std::vector<SweepPoint> load_sweep_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioFileError("cannot open " + path, 0, 0);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_sweep_text(ss.str());
}

}  // namespace bapred
