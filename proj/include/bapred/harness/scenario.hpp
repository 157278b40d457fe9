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

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bapred/adversary/strategies.hpp"
#include "bapred/agreement/classification_auth.hpp"
#include "bapred/agreement/classification_unauth.hpp"
#include "bapred/agreement/classify.hpp"
#include "bapred/agreement/wrapper.hpp"
#include "bapred/blocks/conciliation.hpp"
#include "bapred/blocks/early_stopping.hpp"
#include "bapred/blocks/graded_consensus.hpp"
#include "bapred/predictions.hpp"
#include "bapred/sim/engine.hpp"

namespace bapred {

enum class ProtocolKind { ba_with_predictions, classification_ba, graded_consensus, core_set_gc, conciliation, early_stopping };

inline constexpr std::array<std::pair<ProtocolKind, std::string_view>, 6> protocol_names = {{
    {ProtocolKind::ba_with_predictions, "ba-with-predictions"},
    {ProtocolKind::classification_ba, "classification-ba"},
    {ProtocolKind::graded_consensus, "graded-consensus"},
    {ProtocolKind::core_set_gc, "core-set-gc"},
    {ProtocolKind::conciliation, "conciliation"},
    {ProtocolKind::early_stopping, "early-stopping"},
}};

inline std::string_view to_string(ProtocolKind k) {
    for (const auto& [kind, name] : protocol_names)
        if (kind == k) return name;
    return "?";
}

inline ProtocolKind parse_protocol(std::string_view s) {
    for (const auto& [kind, name] : protocol_names)
        if (name == s) return kind;
    throw ConfigError("unknown protocol: " + std::string(s));
}

inline Variant parse_variant(std::string_view s) {
    if (s == "unauthenticated") return Variant::unauthenticated;
    if (s == "authenticated") return Variant::authenticated;
    throw ConfigError("unknown variant: " + std::string(s));
}

inline const char* to_string(SchemeKind s) { return s == SchemeKind::simulated ? "simulated" : "ed25519"; }

inline SchemeKind parse_scheme(std::string_view s) {
    if (s == "simulated") return SchemeKind::simulated;
    if (s == "ed25519") return SchemeKind::ed25519;
    throw ConfigError("unknown signature scheme: " + std::string(s));
}

/// One fully resolved execution.
struct Scenario {
    ProtocolKind protocol = ProtocolKind::ba_with_predictions;
    Variant variant = Variant::unauthenticated;
    SchemeKind scheme = SchemeKind::simulated;
    int n = 4;
    int t = 1;
    std::vector<ProcessId> faulty;
    /// One entry per process; faulty entries seed the faulty processes' own code.
    std::vector<Value> inputs;
    Value domain = 2;
    std::int64_t budget = 0;
    AllocationPolicy allocation = AllocationPolicy::spread_uniform;
    AdversarySpec adversary;
    std::uint64_t seed = 0;
    std::uint64_t shuffle_salt = 0;
    bool skip_grade_guard = false;
    /// Standalone protocol parameters: k, T, window_phase.
    std::map<std::string, std::int64_t> params;

    std::int64_t param(const std::string& key, std::int64_t fallback) const {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    }
    int f() const { return static_cast<int>(faulty.size()); }
    bool operator==(const Scenario&) const = default;
};

struct TagCount {
    std::int64_t count = 0;
    /// False when the tag names no protocol or no round ran under it.
    bool present = false;
};

struct ExecutionResult {
    /// Decided value per process; set for honest processes only.
    std::vector<std::optional<Value>> decisions;
    /// Grades for the graded-consensus protocols, -1 elsewhere.
    std::vector<int> grades;
    std::vector<int> return_rounds;
    std::vector<Value> inputs_used;
    int rounds_elapsed = 0;
    /// Rounds and honest messages of the classification round that
    /// standalone classification-based protocols run first.
    int setup_rounds = 0;
    std::int64_t setup_messages = 0;
    std::int64_t honest_messages_total = 0;
    std::array<std::int64_t, protocol_tag_count> honest_messages_by_tag{};
    std::array<int, protocol_tag_count> rounds_by_tag{};
    std::uint64_t forgeries_accepted = 0;
    std::uint64_t honest_signatures_rejected = 0;

    PredictionErrorReport realized;
    std::int64_t budget_requested = 0;
    std::vector<ClassificationVector> classifications;  // per process, empty if no classification round
    std::optional<MisclassificationReport> misclassification;
    std::optional<ProcessId> vote_bound_offender;

    std::optional<WrapperConfig> wrapper;
    std::vector<WrapperPhaseRecord> phases;
    int k = 0;
    std::int64_t T = 0;
    std::optional<UnauthClassBaTrace> unauth;
    std::optional<AuthClassBaTrace> auth;
    EarlyStoppingTrace early;
    ConciliationTrace conciliation;
    /// Whether the standalone protocol's guarantee preconditions held.
    bool preconditions = true;
};

inline TagCount honest_message_count(const ExecutionResult& r, std::string_view tag) {
    const auto parsed = parse_protocol_tag(tag);
    if (!parsed) return {};
    const auto i = static_cast<std::size_t>(*parsed);
    return {r.honest_messages_by_tag[i], r.rounds_by_tag[i] > 0};
}

/// t used by the grid for a given n: the largest allowed unauthenticated,
/// and for authenticated runs the largest t with t < (1/2 - 0.05) n.
inline int default_t(Variant v, int n) {
    if (v == Variant::unauthenticated) return (n - 1) / 3;
    const int t = (45 * n + 99) / 100 - 1;
    return std::max(0, std::min(t, (n - 1) / 2));
}

/// Fault placement drawn from the seed: f distinct identifiers.
inline std::vector<ProcessId> draw_fault_set(int n, int f, std::uint64_t seed) {
    std::vector<ProcessId> ids;
    for (int i = 1; i <= n; ++i) ids.emplace_back(i);
    Rng rng = Rng::stream(seed, stream_id::faults);
    rng.shuffle(ids);
    ids.resize(static_cast<std::size_t>(f));
    std::sort(ids.begin(), ids.end());
    return ids;
}

inline std::vector<Value> draw_inputs(int n, Value domain, std::uint64_t seed) {
    Rng rng = Rng::stream(seed, stream_id::inputs);
    std::vector<Value> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = static_cast<Value>(rng.below(static_cast<std::uint64_t>(domain)));
    return v;
}

namespace detail {

inline ExecutionConfig execution_config(const Scenario& s) {
    ExecutionConfig cfg;
    cfg.n = s.n;
    cfg.t = s.t;
    cfg.faulty = s.faulty;
    cfg.domain = ValueDomain{s.domain};
    cfg.seed = s.seed;
    cfg.shuffle_salt = s.shuffle_salt;
    cfg.variant = s.variant;
    cfg.scheme = s.scheme;
    cfg.skip_grade_guard = s.skip_grade_guard;
    return cfg;
}

inline void record_classification(ExecutionResult& r, const FaultSet& faults, std::vector<ClassificationVector> c,
                                  const std::vector<PredictionVector>& predictions) {
    std::map<ProcessId, ClassificationVector> honest;
    for (ProcessId p : faults.honest_ids()) honest.emplace(p, c[p.index()]);
    r.misclassification = misclassification_report(honest, faults);
    r.vote_bound_offender = vote_bound_violation(predictions, *r.misclassification, faults);
    r.classifications = std::move(c);
}

inline WindowSet windows_for_phase(const std::vector<ClassificationVector>& c, int k, int phase) {
    const int first = (3 * k + 1) * (phase - 1) + 1;
    std::vector<std::vector<ProcessId>> w;
    w.reserve(c.size());
    for (const auto& ci : c) w.push_back(ordering(ci).window(first, first + 3 * k));
    return WindowSet(std::move(w));
}

}  // namespace detail

/// Runs one scenario to completion. Pure: equal scenarios give equal results.
inline ExecutionResult run_execution(const Scenario& s) {
    if (static_cast<int>(s.inputs.size()) != s.n) throw ConfigError("inputs must list one value per process");
    for (Value v : s.inputs)
        if (v < 0 || v >= s.domain) throw ConfigError("input outside the value domain");

    auto adversary = make_adversary(s.adversary);
    Execution ex(detail::execution_config(s), adversary.get());
    const FaultSet& faults = ex.faults();
    const int n = s.n;

    ExecutionResult r;
    r.budget_requested = s.budget;
    r.inputs_used = s.inputs;
    if (adversary)
        for (ProcessId p : faults.faulty_ids()) r.inputs_used[p.index()] = adversary->faulty_input(p, s.inputs[p.index()]);
    const std::vector<Value>& inputs = r.inputs_used;

    const bool needs_predictions = s.protocol == ProtocolKind::ba_with_predictions ||
                                   s.protocol == ProtocolKind::classification_ba ||
                                   s.protocol == ProtocolKind::core_set_gc || s.protocol == ProtocolKind::conciliation;
    PredictionSet preds;
    if (needs_predictions) {
        preds = generate_predictions(faults, s.budget, s.allocation, s.seed);
        r.realized = preds.realized;
    }

    std::vector<Value> out(static_cast<std::size_t>(n), 0);
    r.grades.assign(static_cast<std::size_t>(n), -1);
    auto classify_first = [&] {
        auto c = classify(ex, preds.vectors, running_processes(ex));
        r.setup_rounds = ex.round();
        for (auto m : ex.honest_messages()) r.setup_messages += m;
        detail::record_classification(r, faults, c, preds.vectors);
    };
    auto mark_all = [&] {
        for (ProcessId p : faults.honest_ids()) ex.mark_returned(p);
    };

    switch (s.protocol) {
        case ProtocolKind::ba_with_predictions: {
            auto res = ba_with_predictions(ex, inputs, preds.vectors);
            out = res.output;
            detail::record_classification(r, faults, res.classifications, preds.vectors);
            r.wrapper = res.config;
            r.phases = std::move(res.phases);
            break;
        }
        case ProtocolKind::classification_ba: {
            classify_first();
            r.k = static_cast<int>(s.param("k", 1));
            const std::int64_t natural =
                s.variant == Variant::unauthenticated ? class_ba_unauth_rounds(r.k) : class_ba_auth_rounds(r.k);
            r.T = s.param("T", natural);
            const int k_a = r.misclassification->k_a();
            if (s.variant == Variant::unauthenticated) {
                r.unauth.emplace();
                out = ba_with_classification_unauth(ex, inputs, r.classifications, r.k, r.T, running_processes(ex),
                                                    true, &*r.unauth);
                r.preconditions = r.k >= k_a && class_ba_unauth_condition(n, s.t, r.k) && r.T >= natural;
            } else {
                r.auth.emplace();
                out = ba_with_classification_auth(ex, inputs, r.classifications, r.k, r.T, running_processes(ex), true,
                                                  &*r.auth);
                r.preconditions = r.k >= k_a && class_ba_auth_condition(n, s.t, r.k);
            }
            mark_all();
            break;
        }
        case ProtocolKind::graded_consensus: {
            auto g = graded_consensus(ex, ProtocolTag::wrapper_gc, inputs);
            for (int i = 0; i < n; ++i) {
                out[static_cast<std::size_t>(i)] = g[static_cast<std::size_t>(i)].value;
                r.grades[static_cast<std::size_t>(i)] = g[static_cast<std::size_t>(i)].grade;
            }
            mark_all();
            break;
        }
        case ProtocolKind::core_set_gc:
        case ProtocolKind::conciliation: {
            classify_first();
            r.k = static_cast<int>(s.param("k", 1));
            const int phase = static_cast<int>(s.param("window_phase", 1));
            const WindowSet windows = detail::windows_for_phase(r.classifications, r.k, phase);
            const auto active = running_processes(ex);
            if (s.protocol == ProtocolKind::core_set_gc) {
                r.preconditions = detail::core_set_preconditions(ex, windows, active, r.k, false);
                auto g = graded_consensus_core_set(ex, inputs, r.k, windows, active);
                for (int i = 0; i < n; ++i) {
                    out[static_cast<std::size_t>(i)] = g[static_cast<std::size_t>(i)].value;
                    r.grades[static_cast<std::size_t>(i)] = g[static_cast<std::size_t>(i)].grade;
                }
            } else {
                r.preconditions = detail::core_set_preconditions(ex, windows, active, r.k, true);
                out = conciliate(ex, inputs, r.k, windows, active, &r.conciliation);
            }
            mark_all();
            break;
        }
        case ProtocolKind::early_stopping: {
            const std::int64_t full = static_cast<std::int64_t>(s.t + 1) * early_stopping_phase_rounds(s.variant);
            r.T = s.param("T", full);
            out = ba_early_stopping(ex, inputs, r.T, running_processes(ex), true, &r.early);
            r.preconditions = r.T >= early_stopping_rounds_needed(s.variant, s.f()) || r.T >= full;
            mark_all();
            break;
        }
    }

    r.decisions.assign(static_cast<std::size_t>(n), std::nullopt);
    r.return_rounds.assign(static_cast<std::size_t>(n), -1);
    for (ProcessId p : faults.honest_ids()) {
        r.decisions[p.index()] = out[p.index()];
        r.return_rounds[p.index()] = ex.return_round(p);
    }
    r.rounds_elapsed = ex.round();
    r.honest_messages_by_tag = ex.honest_messages();
    r.rounds_by_tag = ex.rounds_by_tag();
    for (auto m : r.honest_messages_by_tag) r.honest_messages_total += m;
    if (auto* svc = ex.signatures()) {
        r.forgeries_accepted = svc->forgeries_accepted();
        r.honest_signatures_rejected = svc->honest_signatures_rejected();
    }
    return r;
}

}  // namespace bapred
