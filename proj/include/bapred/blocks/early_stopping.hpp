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

#include "bapred/blocks/graded_consensus.hpp"
#include "bapred/sim/engine.hpp"

namespace bapred {

/// Rounds of one phase-king phase: graded consensus, king round, graded consensus.
inline int early_stopping_phase_rounds(Variant v) { return 2 * graded_consensus_rounds(v) + 1; }

/// Rounds after which an untruncated run with f actual faults has returned:
/// some king among p_1..p_{f+1} is honest, everyone decides in that phase
/// and returns in the next.
inline std::int64_t early_stopping_rounds_needed(Variant v, int f) {
    return static_cast<std::int64_t>(f + 2) * early_stopping_phase_rounds(v);
}

/// Upper bound on honest messages of a run truncated at T rounds.
inline std::int64_t early_stopping_messages(Variant v, int n, int t, std::int64_t T) {
    const std::int64_t phases = std::min<std::int64_t>(t + 1, T / early_stopping_phase_rounds(v));
    return phases * (2 * graded_consensus_messages(v, n) + (n - 1));
}

struct EarlyStoppingTrace {
    int phases_run = 0;
    int decision_phase = 0;  // first phase in which an honest process decided, 0 if none
};

/// Phase-king early-stopping agreement (t+1 phases, king of phase φ is p_φ),
/// truncated at T rounds. Each phase: graded consensus; the king
/// broadcasts its estimate and grade-0 processes adopt it; graded consensus;
/// return if decided in an earlier phase; decide on grade 1. At the time
/// limit a process returns its decision if it has one, else its estimate.
/// When `pad` is set the call always consumes exactly T rounds.
inline std::vector<Value> ba_early_stopping(Execution& ex, const std::vector<Value>& inputs, std::int64_t T,
                                            const std::vector<bool>& active, bool pad = true,
                                            EarlyStoppingTrace* trace = nullptr) {
    const int n = ex.n();
    const auto idx = [](ProcessId p) { return p.index(); };
    const int phase_len = early_stopping_phase_rounds(ex.variant());
    const int start_round = ex.round();

    std::vector<Value> v = inputs;
    std::vector<std::optional<Value>> decision(static_cast<std::size_t>(n));
    std::vector<bool> running = active;

    for (int phase = 1; phase <= ex.t() + 1 && phase <= n; ++phase) {
        if (ex.round() - start_round + phase_len > T) break;
        if (std::none_of(running.begin(), running.end(), [](bool b) { return b; })) break;
        if (trace) trace->phases_run = phase;

        auto g1 = graded_consensus(ex, ProtocolTag::early_gc, v, running);
        for (int i = 0; i < n; ++i)
            if (running[static_cast<std::size_t>(i)]) v[static_cast<std::size_t>(i)] = g1[static_cast<std::size_t>(i)].value;

        const ProcessId king(phase);
        ex.context().step = 1;
        ex.context().steps = 1;
        auto out = ex.outboxes();
        if (running[idx(king)]) out[idx(king)].broadcast(make_payload(ValueMsg{v[idx(king)]}));
        auto in = ex.exchange(ProtocolTag::early_king, out);
        for (int i = 0; i < n; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            if (!running[ii]) continue;
            std::optional<Value> kv;
            for (const auto& d : in[ii]) {
                if (d.sender != king) continue;
                if (const auto* m = d.as<ValueMsg>(); m && ex.domain().contains(m->value) && (!kv || m->value < *kv))
                    kv = m->value;
            }
            if (kv && (g1[ii].grade == 0 || ex.skip_grade_guard())) v[ii] = *kv;
        }

        auto g2 = graded_consensus(ex, ProtocolTag::early_gc, v, running);
        for (int i = 0; i < n; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            if (!running[ii]) continue;
            v[ii] = g2[ii].value;
            if (decision[ii]) {
                running[ii] = false;
                continue;
            }
            if (g2[ii].grade == 1) {
                decision[ii] = v[ii];
                if (trace && !trace->decision_phase && ex.faults().honest(ProcessId(i + 1))) trace->decision_phase = phase;
            }
        }
    }

    if (pad) ex.idle(T - (ex.round() - start_round));
    std::vector<Value> result(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        result[ii] = decision[ii].value_or(v[ii]);
    }
    return result;
}

}  // namespace bapred
