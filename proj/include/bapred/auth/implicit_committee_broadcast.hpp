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
#include <map>
#include <optional>
#include <vector>

#include "bapred/auth/chain.hpp"
#include "bapred/sim/engine.hpp"

namespace bapred {

struct BroadcastTrace {
    int max_x_size = 0;
    /// Most chain broadcasts by one honest process in one instance.
    int max_honest_broadcasts = 0;
    /// Honest messages sent in instances whose sender holds no certificate.
    std::int64_t messages_in_uncertified_instances = 0;
    /// Honest processes without a certificate that still broadcast a chain.
    int uncertified_honest_senders = 0;
    /// Valid chains with an honest signer at link h seen by some honest
    /// process although another honest process had no chain for the same
    /// (sender, value) by round h.
    int relay_violations = 0;
    std::vector<ProcessId> certified_senders;
};

/// Byzantine broadcast with an implicit committee, run for every sender
/// s = 1..n in parallel for k+1 rounds. Processes holding a certificate for
/// themselves relay (sign and extend) the first chain for each of at most
/// two values; chains are considered value ascending, then by smallest
/// immediate sender. Returns result[i][s-1]: the value p_i delivers for
/// sender s, or nothing for ⊥.
inline std::vector<std::vector<std::optional<Value>>> bb_with_implicit_committee(
    Execution& ex, const std::vector<Value>& x, int k, const std::vector<CertificatePtr>& cc,
    const std::vector<bool>& active, BroadcastTrace* trace = nullptr) {
    const int n = ex.n();
    const int t = ex.t();
    SignatureService& svc = ex.require_signatures();
    const auto ii = [](int i) { return static_cast<std::size_t>(i); };
    const int rounds = k + 1;
    ex.context().k = k;
    ex.context().steps = rounds;

    std::vector<bool> certified(ii(n));
    for (int i = 0; i < n; ++i) certified[ii(i)] = is_committee_certificate(cc[ii(i)], ProcessId(i + 1), t, svc);

    // X[i][s]: values accepted by p_i in instance s (at most two).
    std::vector<std::vector<std::vector<Value>>> X(ii(n), std::vector<std::vector<Value>>(ii(n)));
    struct Received {
        Value value;
        ProcessId via;
        ChainPtr chain;
    };
    std::vector<std::vector<std::vector<Received>>> R(ii(n), std::vector<std::vector<Received>>(ii(n)));
    // first_seen[i][s][value]: earliest round p_i received a valid chain.
    std::vector<std::vector<std::map<Value, int>>> first_seen(ii(n), std::vector<std::map<Value, int>>(ii(n)));
    std::vector<std::vector<int>> sends(ii(n), std::vector<int>(ii(n), 0));
    // (sender, value) -> innermost honest link seen in any chain an honest process accepted.
    std::map<std::pair<ProcessId, Value>, int> obligations;

    auto collect = [&](const std::vector<Inbox>& in, int round) {
        for (int i = 0; i < n; ++i) {
            for (auto& r : R[ii(i)]) r.clear();
            if (!active[ii(i)]) continue;
            for (const auto& d : in[ii(i)]) {
                const auto* m = d.as<ChainMsg>();
                if (!m || !m->instance.valid_for(n) || !m->chain || m->chain->length() != round) continue;
                if (!validate_chain(m->chain, m->instance, round, t, svc)) continue;
                R[ii(i)][m->instance.index()].push_back({m->chain->value(), d.sender, m->chain});
                first_seen[ii(i)][m->instance.index()].try_emplace(m->chain->value(), round);
                if (trace && ex.faults().honest(ProcessId(i + 1))) {
                    int h = 0;
                    for (const ChainNode* node = m->chain.get(); node; node = node->inner().get())
                        if (ex.faults().honest(node->signer())) h = node->length();
                    if (h > 0) {
                        auto [it, fresh] = obligations.try_emplace({m->instance, m->chain->value()}, h);
                        if (!fresh) it->second = std::min(it->second, h);
                    }
                }
            }
            for (auto& r : R[ii(i)])
                std::sort(r.begin(), r.end(), [](const Received& a, const Received& b) {
                    return a.value != b.value ? a.value < b.value : a.via < b.via;
                });
        }
    };

    ex.context().step = 1;
    auto out = ex.outboxes();
    for (int i = 0; i < n; ++i) {
        if (!active[ii(i)] || !certified[ii(i)]) continue;
        const ProcessId self(i + 1);
        X[ii(i)][ii(i)].push_back(x[ii(i)]);
        auto chain = ChainNode::sign_link(nullptr, x[ii(i)], cc[ii(i)], [&](const Digest& d) { return ex.sign(self, d); });
        out[ii(i)].broadcast(make_payload(ChainMsg{self, std::move(chain)}));
        ++sends[ii(i)][ii(i)];
    }
    auto in = ex.exchange(ProtocolTag::bb_chain, out);
    collect(in, 1);

    for (int j = 2; j <= rounds; ++j) {
        ex.context().step = j;
        out = ex.outboxes();
        for (int i = 0; i < n; ++i) {
            if (!active[ii(i)]) continue;
            const ProcessId self(i + 1);
            for (int s = 0; s < n; ++s) {
                auto& xs = X[ii(i)][ii(s)];
                for (const auto& m : R[ii(i)][ii(s)]) {
                    if (xs.size() >= 2 || std::find(xs.begin(), xs.end(), m.value) != xs.end()) continue;
                    xs.push_back(m.value);
                    if (!certified[ii(i)]) continue;
                    auto ext = ChainNode::sign_link(m.chain, m.value, cc[ii(i)], [&](const Digest& d) { return ex.sign(self, d); });
                    out[ii(i)].broadcast(make_payload(ChainMsg{ProcessId(s + 1), std::move(ext)}));
                    ++sends[ii(i)][ii(s)];
                }
            }
        }
        in = ex.exchange(ProtocolTag::bb_chain, out);
        collect(in, j);
    }

    std::vector<std::vector<std::optional<Value>>> result(ii(n), std::vector<std::optional<Value>>(ii(n)));
    for (int i = 0; i < n; ++i) {
        for (int s = 0; s < n; ++s) {
            auto& xs = X[ii(i)][ii(s)];
            for (const auto& m : R[ii(i)][ii(s)])
                if (xs.size() < 2 && std::find(xs.begin(), xs.end(), m.value) == xs.end()) xs.push_back(m.value);
            if (xs.size() == 1) result[ii(i)][ii(s)] = xs.front();
        }
    }

    if (trace) {
        const FaultSet& faults = ex.faults();
        for (int s = 0; s < n; ++s)
            if (certified[ii(s)]) trace->certified_senders.emplace_back(s + 1);
        for (ProcessId p : faults.honest_ids()) {
            if (!active[p.index()]) continue;
            int total = 0;
            for (int s = 0; s < n; ++s) {
                trace->max_x_size = std::max(trace->max_x_size, static_cast<int>(X[p.index()][ii(s)].size()));
                trace->max_honest_broadcasts = std::max(trace->max_honest_broadcasts, sends[p.index()][ii(s)]);
                if (!certified[ii(s)]) trace->messages_in_uncertified_instances += sends[p.index()][ii(s)] * (n - 1);
                total += sends[p.index()][ii(s)];
            }
            if (!certified[p.index()] && total > 0) ++trace->uncertified_honest_senders;
        }
        for (const auto& [key, h] : obligations) {
            for (ProcessId q : faults.honest_ids()) {
                if (!active[q.index()]) continue;
                const auto& seen = first_seen[q.index()][key.first.index()];
                const auto it = seen.find(key.second);
                if (it == seen.end() || it->second > h) {
                    ++trace->relay_violations;
                    break;
                }
            }
        }
    }
    return result;
}

}  // namespace bapred
