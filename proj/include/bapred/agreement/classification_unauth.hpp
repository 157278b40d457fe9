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
#include <cstdint>
#include <optional>
#include <vector>

#include "bapred/blocks/conciliation.hpp"
#include "bapred/blocks/graded_consensus.hpp"
#include "bapred/predictions.hpp"
#include "bapred/sim/engine.hpp"

namespace bapred {

inline std::int64_t class_ba_unauth_rounds(int k) { return 5LL * (2 * k + 1); }

/// (2k+1)(3k+1) <= n - t - k: enough well-placed honest leaders for some
/// phase to have all-honest windows.
inline bool class_ba_unauth_condition(int n, int t, int k) {
    return static_cast<std::int64_t>(2 * k + 1) * (3 * k + 1) <= n - t - k;
}

/// Honest messages: at most (2k+1)(3k+1)+k honest broadcasters, each at
/// most 5 broadcasts.
inline std::int64_t class_ba_unauth_messages(int n, int k) {
    return 5LL * n * (static_cast<std::int64_t>(2 * k + 1) * (3 * k + 1) + k);
}

struct UnauthClassBaTrace {
    int k = 0;
    int phases_run = 0;
    std::vector<ProcessId> honest;
    /// windows[phase-1][j]: window of honest[j] in that phase.
    std::vector<std::vector<std::vector<ProcessId>>> windows;
    /// Phase in which honest[j] returned early (0 if it ran to the end).
    std::vector<int> returned_in_phase;
    int gc_checked = 0;              // window GC calls whose preconditions held
    int gc_violations = 0;           // unanimity/coherence failures among those
    int conciliation_checked = 0;    // conciliation calls whose preconditions held
    int conciliation_violations = 0; // agreement/unanimity failures among those
    int path_lemma_violations = 0;
};

namespace detail {

/// Whether the windows of the running honest processes all have size 3k+1
/// and share at least 2k+1 honest members that are still running (a process
/// that has returned is silent and cannot be a core member).
inline bool core_set_preconditions(const Execution& ex, const WindowSet& windows, const std::vector<bool>& active, int k,
                                   bool require_all_honest) {
    const FaultSet& faults = ex.faults();
    std::vector<int> hits(static_cast<std::size_t>(ex.n()), 0);
    int running = 0;
    for (ProcessId p : faults.honest_ids()) {
        if (!active[p.index()]) continue;
        ++running;
        const auto& w = windows.of(p);
        if (static_cast<int>(w.size()) != 3 * k + 1) return false;
        for (ProcessId q : w) {
            if (require_all_honest && faults.faulty(q)) return false;
            ++hits[q.index()];
        }
    }
    if (running == 0) return false;
    int core = 0;
    for (ProcessId q : faults.honest_ids()) core += active[q.index()] && hits[q.index()] == running;
    return core >= 2 * k + 1;
}

inline bool graded_outputs_consistent(const Execution& ex, const std::vector<Value>& inputs,
                                      const std::vector<GradedOutput>& outs, const std::vector<bool>& active) {
    std::optional<Value> unanimous;
    bool is_unanimous = true;
    std::optional<Value> committed;
    for (ProcessId p : ex.faults().honest_ids()) {
        if (!active[p.index()]) continue;
        if (!unanimous) unanimous = inputs[p.index()];
        else if (*unanimous != inputs[p.index()]) is_unanimous = false;
        if (outs[p.index()].grade == 1) committed = outs[p.index()].value;
    }
    for (ProcessId p : ex.faults().honest_ids()) {
        if (!active[p.index()]) continue;
        if (is_unanimous && unanimous && !(outs[p.index()] == GradedOutput{*unanimous, 1})) return false;
        if (committed && outs[p.index()].value != *committed) return false;
    }
    return true;
}

}  // namespace detail

/// Unauthenticated agreement given classifications. Runs 2k+1 phases of five
/// rounds; phase φ uses positions (3k+1)(φ-1)+1 .. (3k+1)φ of π(c_i) as the
/// leader window. Agreement and strong unanimity hold when k bounds the
/// misclassified processes and class_ba_unauth_condition holds. Truncated
/// at whole phases to T rounds; with `pad`, always consumes min(T, 5(2k+1)).
inline std::vector<Value> ba_with_classification_unauth(Execution& ex, const std::vector<Value>& inputs,
                                                        const std::vector<ClassificationVector>& c, int k,
                                                        std::int64_t T, const std::vector<bool>& active,
                                                        bool pad = true, UnauthClassBaTrace* trace = nullptr) {
    if (k < 1) throw ConfigError("classification agreement needs k >= 1");
    const int n = ex.n();
    const auto ii = [](int i) { return static_cast<std::size_t>(i); };
    const std::int64_t budget = std::min(T, class_ba_unauth_rounds(k));
    const int start_round = ex.round();
    ex.context().k = k;

    std::vector<Ordering> orders;
    orders.reserve(ii(n));
    for (int i = 0; i < n; ++i) orders.push_back(ordering(c[ii(i)]));

    std::vector<Value> v = inputs;
    std::vector<std::optional<Value>> decision(ii(n));
    std::vector<bool> running = active;

    if (trace) {
        trace->k = k;
        trace->honest = ex.faults().honest_ids();
        trace->returned_in_phase.assign(trace->honest.size(), 0);
    }

    for (int phase = 1; phase <= 2 * k + 1; ++phase) {
        if (ex.round() - start_round + 5 > budget) break;
        const int first = (3 * k + 1) * (phase - 1) + 1;
        std::vector<std::vector<ProcessId>> w;
        w.reserve(ii(n));
        for (int i = 0; i < n; ++i) w.push_back(orders[ii(i)].window(first, first + 3 * k));
        const WindowSet windows(std::move(w));
        if (trace) {
            trace->phases_run = phase;
            auto& rec = trace->windows.emplace_back();
            for (ProcessId p : trace->honest) rec.push_back(windows.of(p));
        }
        const bool core_ok = trace && detail::core_set_preconditions(ex, windows, running, k, false);
        const bool concil_ok = trace && detail::core_set_preconditions(ex, windows, running, k, true);

        auto before = v;
        auto g1 = graded_consensus_core_set(ex, v, k, windows, running);
        if (core_ok) {
            ++trace->gc_checked;
            trace->gc_violations += !detail::graded_outputs_consistent(ex, before, g1, running);
        }
        for (int i = 0; i < n; ++i)
            if (running[ii(i)]) v[ii(i)] = g1[ii(i)].value;

        ConciliationTrace ct;
        auto concil = conciliate(ex, v, k, windows, running, trace ? &ct : nullptr);
        if (trace) trace->path_lemma_violations += ct.path_lemma_violations;
        if (concil_ok) {
            ++trace->conciliation_checked;
            std::optional<Value> common;
            bool agree = true;
            bool unanimous = true;
            std::optional<Value> in0;
            for (ProcessId p : ex.faults().honest_ids()) {
                if (!running[p.index()]) continue;
                if (!common) common = concil[p.index()];
                agree = agree && concil[p.index()] == *common;
                if (!in0) in0 = v[p.index()];
                unanimous = unanimous && v[p.index()] == *in0;
            }
            trace->conciliation_violations += !agree || (unanimous && in0 && common && *common != *in0);
        }
        for (int i = 0; i < n; ++i)
            if (running[ii(i)] && (g1[ii(i)].grade == 0 || ex.skip_grade_guard())) v[ii(i)] = concil[ii(i)];

        before = v;
        auto g2 = graded_consensus_core_set(ex, v, k, windows, running);
        if (core_ok) {
            ++trace->gc_checked;
            trace->gc_violations += !detail::graded_outputs_consistent(ex, before, g2, running);
        }
        for (int i = 0; i < n; ++i) {
            if (!running[ii(i)]) continue;
            v[ii(i)] = g2[ii(i)].value;
            if (decision[ii(i)]) {
                running[ii(i)] = false;
                if (trace) {
                    const auto pos = std::find(trace->honest.begin(), trace->honest.end(), ProcessId(i + 1));
                    if (pos != trace->honest.end()) trace->returned_in_phase[static_cast<std::size_t>(pos - trace->honest.begin())] = phase;
                }
                continue;
            }
            if (g2[ii(i)].grade == 1) decision[ii(i)] = v[ii(i)];
        }
        const bool any_honest_running = std::any_of(ex.faults().honest_ids().begin(), ex.faults().honest_ids().end(),
                                                    [&](ProcessId p) { return running[p.index()]; });
        if (!any_honest_running) break;
    }

    if (pad) ex.idle(budget - (ex.round() - start_round));
    std::vector<Value> result(ii(n));
    for (int i = 0; i < n; ++i) result[ii(i)] = decision[ii(i)].value_or(v[ii(i)]);
    return result;
}

}  // namespace bapred
