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

#include "bapred/auth/implicit_committee_broadcast.hpp"
#include "bapred/blocks/plurality.hpp"
#include "bapred/predictions.hpp"
#include "bapred/sim/engine.hpp"

namespace bapred {

inline std::int64_t class_ba_auth_rounds(int k) { return k + 3; }

/// 2k+1 <= n - t - k (with t < n/2 checked by the engine).
inline bool class_ba_auth_condition(int n, int t, int k) { return 2 * k + 1 <= n - t - k; }

struct AuthClassBaTrace {
    int k = 0;
    /// Processes for which a committee certificate exists: honest ones that
    /// assembled one, faulty ones whose honest nominations plus all faulty
    /// signatures reach t+1.
    std::vector<ProcessId> committee;
    BroadcastTrace broadcast;
    int uncertified_honest_plurality = 0;
};

/// Upper bound on honest messages given the committee that formed: votes,
/// at most two relays per certified honest process per certified instance,
/// and one plurality broadcast per certified honest process.
inline std::int64_t class_ba_auth_messages(int n, int k, int committee, int honest_committee) {
    const std::int64_t votes = static_cast<std::int64_t>(n) * std::min(2 * k + 1, n);
    const std::int64_t relays = 2LL * honest_committee * committee * (n - 1);
    const std::int64_t plurality = static_cast<std::int64_t>(honest_committee) * (n - 1);
    return votes + relays + plurality;
}

/// Authenticated agreement given classifications, exactly k+3 rounds:
/// nominate the first 2k+1 processes of π(c_i); certify oneself from t+1
/// nominations; run n parallel implicit-committee broadcasts; certified
/// processes broadcast the plurality of what they delivered; everyone
/// returns the plurality among certified announcements (own input if none).
inline std::vector<Value> ba_with_classification_auth(Execution& ex, const std::vector<Value>& inputs,
                                                      const std::vector<ClassificationVector>& c, int k,
                                                      std::int64_t T, const std::vector<bool>& active,
                                                      bool pad = true, AuthClassBaTrace* trace = nullptr) {
    if (k < 1) throw ConfigError("classification agreement needs k >= 1");
    if (T < class_ba_auth_rounds(k)) throw ConfigError("round budget below k+3");
    const int n = ex.n();
    const int t = ex.t();
    SignatureService& svc = ex.require_signatures();
    const auto ii = [](int i) { return static_cast<std::size_t>(i); };
    const int start_round = ex.round();
    ex.context().k = k;

    // Round 1: nominations.
    std::vector<std::vector<ProcessId>> nominees(ii(n));
    ex.context().step = 1;
    ex.context().steps = 1;
    auto out = ex.outboxes();
    for (int i = 0; i < n; ++i) {
        if (!active[ii(i)]) continue;
        const ProcessId self(i + 1);
        nominees[ii(i)] = ordering(c[ii(i)]).window(1, 2 * k + 1);
        for (ProcessId j : nominees[ii(i)])
            out[ii(i)].send(j, make_payload(CommitteeVoteMsg{ex.sign(self, committee_content(j))}));
    }
    auto in = ex.exchange(ProtocolTag::committee_vote, out);

    std::vector<CertificatePtr> cc(ii(n));
    for (int i = 0; i < n; ++i) {
        std::vector<Signature> sigs;
        for (const auto& d : in[ii(i)])
            if (const auto* m = d.as<CommitteeVoteMsg>(); m && m->sig.signer == d.sender) sigs.push_back(m->sig);
        cc[ii(i)] = assemble_committee_certificate(ProcessId(i + 1), sigs, t, svc);
    }

    BroadcastTrace bt;
    auto bb = bb_with_implicit_committee(ex, inputs, k, cc, active, trace ? &bt : nullptr);

    // Final round: certified processes announce their plurality.
    ex.context().step = 1;
    ex.context().steps = 1;
    out = ex.outboxes();
    std::vector<bool> certified(ii(n));
    for (int i = 0; i < n; ++i) {
        certified[ii(i)] = is_committee_certificate(cc[ii(i)], ProcessId(i + 1), t, svc);
        if (!active[ii(i)] || !certified[ii(i)]) continue;
        std::vector<Value> delivered;
        for (const auto& v : bb[ii(i)])
            if (v) delivered.push_back(*v);
        if (auto p = plurality_tiebreak(delivered)) out[ii(i)].broadcast(make_payload(PluralityMsg{*p, cc[ii(i)]}));
    }
    in = ex.exchange(ProtocolTag::plurality, out);

    std::vector<Value> result(ii(n));
    for (int i = 0; i < n; ++i) {
        SenderTally seen(n);
        std::vector<Value> announced;
        for (const auto& d : in[ii(i)]) {
            const auto* m = d.as<PluralityMsg>();
            if (!m || !ex.domain().contains(m->value) || seen.sent(d.sender, m->value)) continue;
            if (!is_committee_certificate(m->cert, d.sender, t, svc)) continue;
            seen.add(d.sender, m->value);
            announced.push_back(m->value);
        }
        result[ii(i)] = plurality_tiebreak(announced).value_or(inputs[ii(i)]);
    }

    if (trace) {
        const FaultSet& faults = ex.faults();
        trace->k = k;
        trace->broadcast = std::move(bt);
        std::vector<int> honest_nominations(ii(n), 0);
        for (ProcessId p : faults.honest_ids())
            if (active[p.index()])
                for (ProcessId j : nominees[p.index()]) ++honest_nominations[j.index()];
        for (int j = 0; j < n; ++j) {
            const ProcessId p(j + 1);
            const bool exists = faults.honest(p) ? certified[ii(j)] : honest_nominations[ii(j)] + faults.f() >= t + 1;
            if (exists) trace->committee.push_back(p);
        }
        for (ProcessId p : faults.honest_ids())
            if (!certified[p.index()] && !out[p.index()].empty()) ++trace->uncertified_honest_plurality;
    }

    if (pad) ex.idle(class_ba_auth_rounds(k) - (ex.round() - start_round));
    return result;
}

}  // namespace bapred
