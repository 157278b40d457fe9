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

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <optional>
#include <vector>

#include "bapred/agreement/classification_auth.hpp"
#include "bapred/agreement/classification_unauth.hpp"
#include "bapred/agreement/classify.hpp"
#include "bapred/blocks/early_stopping.hpp"
#include "bapred/blocks/graded_consensus.hpp"

namespace bapred {

/// ⌈log2 t⌉ + 1, with t <= 1 giving a single phase.
inline int wrapper_phase_count(int t) {
    if (t <= 1) return 1;
    return static_cast<int>(std::bit_width(static_cast<unsigned>(t - 1))) + 1;
}

inline std::int64_t class_ba_rounds(Variant v, int k) {
    return v == Variant::unauthenticated ? class_ba_unauth_rounds(k) : class_ba_auth_rounds(k);
}

struct WrapperConfig {
    Variant variant = Variant::unauthenticated;
    int phase_count = 1;
    /// Phase φ runs each time-boxed sub-protocol for alpha * 2^(φ-1) rounds.
    std::int64_t alpha = 0;

    std::int64_t budget(int phase) const { return alpha << (phase - 1); }
    int k(int phase) const { return 1 << (phase - 1); }

    /// Smallest alpha such that, for every phase's guess K = 2^(φ-1), the
    /// early-stopping substitute finishes with up to K faults and the
    /// classification agreement with bound K completes.
    static WrapperConfig make(Variant v, int t) {
        WrapperConfig cfg;
        cfg.variant = v;
        cfg.phase_count = wrapper_phase_count(t);
        for (int phase = 1; phase <= cfg.phase_count; ++phase) {
            const std::int64_t K = std::int64_t{1} << (phase - 1);
            const std::int64_t need = std::max(early_stopping_rounds_needed(v, static_cast<int>(K)),
                                               class_ba_rounds(v, static_cast<int>(K)));
            cfg.alpha = std::max(cfg.alpha, (need + K - 1) / K);
        }
        return cfg;
    }

    /// Rounds of a full phase: three graded consensus calls and two boxes.
    std::int64_t phase_rounds(int phase) const { return 3LL * graded_consensus_rounds(variant) + 2 * budget(phase); }

    /// Rounds from the start through the end of `phase` (classification round included).
    std::int64_t rounds_through(int phase) const {
        std::int64_t r = 1;
        for (int p = 1; p <= phase; ++p) r += phase_rounds(p);
        return r;
    }
};

struct WrapperPhaseRecord {
    int phase = 0;
    std::int64_t T = 0;
    int k = 0;
    int first_round = 0;
    int last_round = 0;
    /// Honest processes with grade 1 after each of the three graded consensus calls.
    std::array<int, 3> grade1{};
    std::vector<ProcessId> decided;
    std::vector<ProcessId> returned;
    /// Honest messages sent in this phase by the three graded consensus
    /// calls, the early-stopping box and the classification box.
    std::int64_t messages_gc = 0;
    std::int64_t messages_early = 0;
    std::int64_t messages_class = 0;
    EarlyStoppingTrace early;
    std::optional<UnauthClassBaTrace> unauth;
    std::optional<AuthClassBaTrace> auth;
};

struct WrapperResult {
    std::vector<Value> output;
    /// False where a process reached the final forced return undecided.
    std::vector<bool> decided;
    std::vector<ClassificationVector> classifications;
    std::vector<WrapperPhaseRecord> phases;
    WrapperConfig config;
};

/// Agreement with classification predictions: one voting round, then
/// guess-and-double phases. Each phase runs graded consensus around a
/// time-boxed early-stopping agreement and a time-boxed classification
/// agreement (k = 2^(φ-1)); sub-protocol outputs are adopted only after a
/// grade-0 graded consensus, decisions are taken on grade 1, and a decided
/// process returns one phase later.
inline WrapperResult ba_with_predictions(Execution& ex, const std::vector<Value>& inputs,
                                         const std::vector<PredictionVector>& predictions) {
    const int n = ex.n();
    const auto ii = [](int i) { return static_cast<std::size_t>(i); };
    WrapperResult res;
    res.config = WrapperConfig::make(ex.variant(), ex.t());
    const bool guard = !ex.skip_grade_guard();

    res.classifications = classify(ex, predictions, running_processes(ex));
    std::vector<Value> v = inputs;
    std::vector<std::optional<Value>> decision(ii(n));
    res.output.assign(ii(n), 0);
    res.decided.assign(ii(n), false);
    const auto& honest = ex.faults().honest_ids();

    auto sent = [&] {
        std::int64_t total = 0;
        for (auto m : ex.honest_messages()) total += m;
        return total;
    };
    auto count_grade1 = [&](const std::vector<GradedOutput>& g, const std::vector<bool>& active) {
        int c = 0;
        for (ProcessId p : honest) c += active[p.index()] && g[p.index()].grade == 1;
        return c;
    };

    for (int phase = 1; phase <= res.config.phase_count; ++phase) {
        if (ex.all_honest_returned()) break;
        WrapperPhaseRecord rec;
        rec.phase = phase;
        rec.T = res.config.budget(phase);
        rec.k = res.config.k(phase);
        rec.first_round = ex.round() + 1;
        const auto active = running_processes(ex);

        std::int64_t mark = sent();
        auto g = graded_consensus(ex, ProtocolTag::wrapper_gc, v, active);
        rec.grade1[0] = count_grade1(g, active);
        for (int i = 0; i < n; ++i) v[ii(i)] = g[ii(i)].value;
        rec.messages_gc += sent() - mark;

        mark = sent();
        auto es = ba_early_stopping(ex, v, rec.T, active, true, &rec.early);
        for (int i = 0; i < n; ++i)
            if (g[ii(i)].grade == 0 || !guard) v[ii(i)] = es[ii(i)];
        rec.messages_early += sent() - mark;

        mark = sent();
        g = graded_consensus(ex, ProtocolTag::wrapper_gc, v, active);
        rec.grade1[1] = count_grade1(g, active);
        for (int i = 0; i < n; ++i) v[ii(i)] = g[ii(i)].value;
        rec.messages_gc += sent() - mark;

        mark = sent();
        std::vector<Value> cls;
        const int box_start = ex.round();
        if (ex.variant() == Variant::unauthenticated) {
            rec.unauth.emplace();
            cls = ba_with_classification_unauth(ex, v, res.classifications, rec.k, rec.T, active, true, &*rec.unauth);
        } else {
            rec.auth.emplace();
            cls = ba_with_classification_auth(ex, v, res.classifications, rec.k, rec.T, active, true, &*rec.auth);
        }
        ex.idle(rec.T - (ex.round() - box_start));
        for (int i = 0; i < n; ++i)
            if (g[ii(i)].grade == 0 || !guard) v[ii(i)] = cls[ii(i)];
        rec.messages_class += sent() - mark;

        mark = sent();
        g = graded_consensus(ex, ProtocolTag::wrapper_gc, v, active);
        rec.grade1[2] = count_grade1(g, active);
        for (int i = 0; i < n; ++i) v[ii(i)] = g[ii(i)].value;
        rec.messages_gc += sent() - mark;

        for (int i = 0; i < n; ++i) {
            const ProcessId p(i + 1);
            if (!active[ii(i)]) continue;
            if (decision[ii(i)]) {
                res.output[ii(i)] = *decision[ii(i)];
                res.decided[ii(i)] = true;
                if (ex.faults().honest(p)) {
                    ex.mark_returned(p);
                    rec.returned.push_back(p);
                }
                continue;
            }
            if (g[ii(i)].grade == 1) {
                decision[ii(i)] = v[ii(i)];
                if (ex.faults().honest(p)) rec.decided.push_back(p);
            }
        }
        rec.last_round = ex.round();
        res.phases.push_back(std::move(rec));
    }

    for (ProcessId p : honest) {
        if (ex.returned(p)) continue;
        res.output[p.index()] = decision[p.index()].value_or(v[p.index()]);
        res.decided[p.index()] = decision[p.index()].has_value();
        ex.mark_returned(p);
        if (!res.phases.empty()) res.phases.back().returned.push_back(p);
    }
    return res;
}

}  // namespace bapred
