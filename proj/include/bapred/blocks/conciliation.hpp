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
#include <deque>
#include <map>
#include <optional>
#include <tuple>
#include <vector>

#include "bapred/blocks/graded_consensus.hpp"
#include "bapred/blocks/plurality.hpp"
#include "bapred/sim/engine.hpp"

namespace bapred {

/// Leader graph built by one receiver: vertices are the senders heard from
/// (T_i), with an edge y -> z whenever y is in the window z declared.
class ConciliationGraph {
 public:
    struct Vertex {
        ProcessId id;
        Value value;
        std::vector<ProcessId> window;
    };

    /// Keeps one declaration per sender (the smallest, so the result does
    /// not depend on delivery order) and drops windows of the wrong size.
    static ConciliationGraph from_inbox(const Inbox& inbox, int n, std::size_t window_size, const ValueDomain& domain) {
        std::map<ProcessId, ConciliationMsg> chosen;
        for (const auto& d : inbox) {
            const auto* m = d.as<ConciliationMsg>();
            if (!m || m->window.size() != window_size || !domain.contains(m->value)) continue;
            if (!std::is_sorted(m->window.begin(), m->window.end())) continue;
            if (std::adjacent_find(m->window.begin(), m->window.end()) != m->window.end()) continue;
            if (!std::all_of(m->window.begin(), m->window.end(), [&](ProcessId p) { return p.valid_for(n); })) continue;
            auto [it, fresh] = chosen.emplace(d.sender, *m);
            if (!fresh && std::tie(m->value, m->window) < std::tie(it->second.value, it->second.window))
                it->second = *m;
        }
        ConciliationGraph g(n);
        for (auto& [id, m] : chosen) g.add(id, m.value, std::move(m.window));
        return g;
    }

    explicit ConciliationGraph(int n) : slot_(static_cast<std::size_t>(n), -1) {}

    void add(ProcessId id, Value v, std::vector<ProcessId> window) {
        slot_[id.index()] = static_cast<int>(vertices_.size());
        vertices_.push_back({id, v, std::move(window)});
    }

    bool has(ProcessId y) const { return slot_[y.index()] >= 0; }
    const Vertex& vertex(ProcessId y) const { return vertices_[static_cast<std::size_t>(slot_[y.index()])]; }
    const std::vector<Vertex>& vertices() const { return vertices_; }

    bool declares_self(ProcessId y) const {
        const auto& w = vertex(y).window;
        return std::binary_search(w.begin(), w.end(), y);
    }

    /// Vertices with a path to z (z included, via the empty path).
    std::vector<ProcessId> sources_of(ProcessId z) const {
        std::vector<bool> seen(slot_.size(), false);
        std::vector<ProcessId> found;
        std::deque<ProcessId> frontier{z};
        seen[z.index()] = true;
        while (!frontier.empty()) {
            const ProcessId x = frontier.front();
            frontier.pop_front();
            found.push_back(x);
            for (ProcessId y : vertex(x).window) {
                if (!has(y) || seen[y.index()]) continue;
                seen[y.index()] = true;
                frontier.push_back(y);
            }
        }
        return found;
    }

    /// Minimum value over self-declared sources reaching z, if any.
    std::optional<Value> m_value(ProcessId z) const {
        std::optional<Value> best;
        for (ProcessId y : sources_of(z))
            if (declares_self(y) && (!best || vertex(y).value < *best)) best = vertex(y).value;
        return best;
    }

 private:
    std::vector<int> slot_;
    std::vector<Vertex> vertices_;
};

struct ConciliationTrace {
    /// Receivers whose graph had a source outside T reaching a vertex in T,
    /// counted only when every honest window is all-honest.
    int path_lemma_violations = 0;
    bool windows_all_honest = false;
};

/// One-round conciliation over leader windows of size 3k+1.
inline std::vector<Value> conciliate(Execution& ex, const std::vector<Value>& inputs, int k, const WindowSet& windows,
                                     const std::vector<bool>& active, ConciliationTrace* trace = nullptr) {
    const int n = ex.n();
    const auto idx = [](int i) { return static_cast<std::size_t>(i); };
    const std::size_t window_size = static_cast<std::size_t>(3 * k + 1);
    ex.context().step = 1;
    ex.context().steps = 1;

    auto out = ex.outboxes();
    for (int i = 0; i < n; ++i) {
        const ProcessId p(i + 1);
        if (active[idx(i)] && windows.contains(p, p))
            out[idx(i)].broadcast(make_payload(ConciliationMsg{inputs[idx(i)], windows.of(p)}));
    }
    auto in = ex.exchange(ProtocolTag::conciliate, out);

    const FaultSet& faults = ex.faults();
    bool all_honest = true;
    std::vector<bool> in_t(idx(n), false);  // T: honest processes in their own window
    for (ProcessId p : faults.honest_ids()) {
        if (!active[p.index()]) continue;
        for (ProcessId q : windows.of(p)) all_honest = all_honest && faults.honest(q);
        in_t[p.index()] = windows.contains(p, p);
    }
    if (trace) trace->windows_all_honest = all_honest;

    std::vector<Value> result(idx(n));
    for (int i = 0; i < n; ++i) {
        const ProcessId self(i + 1);
        const auto graph = ConciliationGraph::from_inbox(in[idx(i)], n, window_size, ex.domain());
        std::vector<Value> ms;
        for (ProcessId z : windows.of(self)) {
            if (!graph.has(z)) continue;
            if (auto m = graph.m_value(z)) ms.push_back(*m);
        }
        result[idx(i)] = plurality_tiebreak(ms).value_or(inputs[idx(i)]);

        if (trace && all_honest && faults.honest(self) && active[idx(i)]) {
            bool violated = false;
            for (const auto& v : graph.vertices()) {
                if (!in_t[v.id.index()]) continue;
                for (ProcessId y : graph.sources_of(v.id)) violated = violated || !in_t[y.index()];
            }
            trace->path_lemma_violations += violated;
        }
    }
    return result;
}

}  // namespace bapred
