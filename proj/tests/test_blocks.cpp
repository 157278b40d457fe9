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

#include <catch_amalgamated.hpp>

#include "bapred/adversary/strategies.hpp"
#include "bapred/blocks/conciliation.hpp"
#include "bapred/blocks/early_stopping.hpp"
#include "bapred/blocks/graded_consensus.hpp"
#include "bapred/blocks/plurality.hpp"
#include "bapred/harness/oracle.hpp"
#include "support.hpp"

using namespace bapred;
using namespace bapred::test;

namespace {

const std::vector<bool>& all_active(int n) {
    static std::map<int, std::vector<bool>> cache;
    auto [it, fresh] = cache.try_emplace(n, static_cast<std::size_t>(n), true);
    return it->second;
}

WindowSet identical_windows(int n, std::vector<ProcessId> window) {
    return WindowSet(std::vector<std::vector<ProcessId>>(static_cast<std::size_t>(n), std::move(window)));
}

std::unique_ptr<Adversary> catalog(const std::string& name) {
    AdversarySpec spec;
    spec.name = name;
    return make_adversary(spec);
}

// Reference evaluation of the window-scoped graded consensus rules for
// identical windows: r1/r2 are the value sets the single faulty window
// member sends to each receiver in the two rounds.
GradedOutput reference_core_gc(const std::vector<Value>& inputs, const std::vector<ProcessId>& window, ProcessId faulty,
                               int k, const std::vector<std::vector<Value>>& r1, const std::vector<std::vector<Value>>& r2,
                               ProcessId receiver) {
    const int n = static_cast<int>(inputs.size());
    auto round1 = [&](ProcessId i) -> std::optional<Value> {
        for (Value v = 0; v <= 1; ++v) {
            int c = 0;
            for (ProcessId q : window)
                c += q == faulty ? std::count(r1[i.index()].begin(), r1[i.index()].end(), v) > 0 : inputs[q.index()] == v;
            if (c >= 2 * k + 1) return v;
        }
        return std::nullopt;
    };
    std::vector<std::optional<Value>> b(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i)
        if (ProcessId(i) != faulty) b[static_cast<std::size_t>(i - 1)] = round1(ProcessId(i));
    auto count2 = [&](Value v) {
        int c = 0;
        for (ProcessId q : window)
            c += q == faulty ? std::count(r2[receiver.index()].begin(), r2[receiver.index()].end(), v) > 0 : b[q.index()] == v;
        return c;
    };
    const auto& bi = b[receiver.index()];
    if (bi) return {*bi, count2(*bi) >= 2 * k + 1 ? 1 : 0};
    for (Value v = 0; v <= 1; ++v)
        if (count2(v) >= k + 1) return {v, 0};
    return {inputs[receiver.index()], 0};
}

std::vector<Value> subset(int mask) {
    std::vector<Value> out;
    for (Value v = 0; v <= 1; ++v)
        if (mask & (1 << v)) out.push_back(v);
    return out;
}

}  // namespace

TEST_CASE("plurality breaks ties towards the smallest value", "[blocks][plurality]") {
    auto pl = [](std::vector<Value> v) { return plurality_tiebreak(v); };
    CHECK(pl({1, 1, 2}) == 1);
    CHECK(pl({1, 2}) == 1);
    CHECK(pl({3, 3, 0, 0, 7}) == 0);
    CHECK(pl({9}) == 9);
    CHECK_FALSE(pl({}).has_value());
}

TEST_CASE("sender tally counts distinct senders per value", "[blocks][plurality]") {
    SenderTally t(5);
    t.add(ProcessId(1), 0);
    t.add(ProcessId(1), 0);
    t.add(ProcessId(2), 0);
    t.add(ProcessId(2), 1);
    CHECK(t.count(0) == 2);
    CHECK(t.count(1) == 1);
    CHECK(t.smallest_with_at_least(2) == 0);
    CHECK_FALSE(t.smallest_with_at_least(3).has_value());
}

TEST_CASE("standard graded consensus: unanimity and coherence", "[blocks][gc]") {
    for (Variant v : {Variant::unauthenticated, Variant::authenticated}) {
        const int n = v == Variant::unauthenticated ? 7 : 9;
        const int t = v == Variant::unauthenticated ? 2 : 4;
        for (const char* adv : {"silent", "equivocator", "split-brain", "forgery"}) {
            if (v == Variant::unauthenticated && std::string(adv) == "forgery") continue;
            for (std::uint64_t seed = 1; seed <= 20; ++seed) {
                auto cfg = config(n, t, draw_fault_set(n, t, seed), v);
                cfg.seed = seed;
                auto a = catalog(adv);
                INFO(to_string(v) << " " << adv << " seed " << seed);
                {
                    Execution ex(cfg, a.get());
                    const auto g = graded_consensus(ex, ProtocolTag::wrapper_gc, constant(n, 1));
                    CHECK(ex.round() == graded_consensus_rounds(v));
                    for (ProcessId p : ex.faults().honest_ids()) {
                        CHECK(g[p.index()].value == 1);
                        CHECK(g[p.index()].grade == 1);
                    }
                }
                {
                    Execution ex(cfg, a.get());
                    auto inputs = draw_inputs(n, 2, seed);
                    const auto g = graded_consensus(ex, ProtocolTag::wrapper_gc, inputs);
                    for (ProcessId p : ex.faults().honest_ids())
                        if (g[p.index()].grade == 1)
                            for (ProcessId q : ex.faults().honest_ids()) CHECK(g[q.index()].value == g[p.index()].value);
                }
            }
        }
    }
}

TEST_CASE("standard graded consensus survives every enumerated adversary at n=4", "[blocks][gc][exhaustive]") {
    const auto rep = graded_consensus_oracle(4, 1);
    INFO(rep.describe());
    CHECK(rep.exhaustive);
    CHECK(rep.violations == 0);
    CHECK(rep.executions > 100'000);
}

TEST_CASE("standard graded consensus at n=5 with the last process faulty", "[blocks][gc][exhaustive]") {
    // All 2^4 honest input vectors against every two-round behavior of p5.
    const int n = 5;
    const FaultSet faults(n, ids({5}));
    OracleReport rep;
    for (const auto& inputs : detail::honest_input_vectors(n, faults, {2})) {
        EnumerationSpec spec{n, {2}, SmallProtocol::graded_consensus, 2, 1'000'000, ProcessId(1)};
        SmallAdversaryStream stream(spec);
        while (auto* adv = stream.next()) {
            Execution ex(config(n, 1, ids({5})), adv);
            const auto g = graded_consensus(ex, ProtocolTag::wrapper_gc, inputs);
            ++rep.executions;
            detail::check_graded_lemmas(rep, faults, inputs, g, detail::describe_config({ProcessId(5)}, inputs));
        }
        rep.absorb(stream.report());
        CHECK(stream.report().strategies == 65536);  // (2^2)^4 per round, two rounds
    }
    INFO(rep.describe());
    CHECK(rep.pass());
}

TEST_CASE("window graded consensus matches the reference rules", "[blocks][core-set]") {
    // n=7, k=1, every window {1,2,3,4}, p4 faulty. p4's round-1 choice per
    // receiver and its round-2 choice are enumerated; a receiver's output
    // depends only on the round-1 choices and its own round-2 choice, so a
    // uniform round-2 choice covers every receiver's full option set.
    const int n = 7, k = 1;
    const auto window = ids({1, 2, 3, 4});
    const ProcessId faulty(4);
    const auto windows = identical_windows(n, window);
    for (const std::vector<Value>& inputs : {std::vector<Value>{0, 0, 0, 1, 1, 0, 1}, {0, 1, 0, 1, 0, 1, 1}}) {
        int executions = 0;
        for (int code = 0; code < (1 << (2 * (n - 1))) * 4; ++code) {
            std::vector<std::vector<Value>> r1(static_cast<std::size_t>(n)), r2(static_cast<std::size_t>(n));
            int c = code;
            for (int i = 0; i < n; ++i) {
                if (static_cast<std::size_t>(i) == faulty.index()) continue;
                r1[static_cast<std::size_t>(i)] = subset(c % 4);
                c /= 4;
            }
            for (int i = 0; i < n; ++i) r2[static_cast<std::size_t>(i)] = subset(c);

            ScriptedAdversary adv;
            adv.script = [&](AdversaryToolkit& tk) {
                const auto& send = tk.context().step == 1 ? r1 : r2;
                for (ProcessId q : tk.faults().honest_ids())
                    for (Value v : send[q.index()]) tk.out(faulty).send(q, make_payload(ValueMsg{v}));
            };
            Execution ex(config(n, 2, {faulty}), &adv);
            const auto g = graded_consensus_core_set(ex, inputs, k, windows, all_active(n));
            REQUIRE(ex.round() == 2);
            for (ProcessId p : ex.faults().honest_ids()) {
                const auto want = reference_core_gc(inputs, window, faulty, k, r1, r2, p);
                REQUIRE(g[p.index()].value == want.value);
                REQUIRE(g[p.index()].grade == want.grade);
            }
            ++executions;
        }
        CHECK(executions == 16384);
    }
}

TEST_CASE("window graded consensus with unanimous window members", "[blocks][core-set]") {
    const int n = 7, k = 1;
    const auto windows = identical_windows(n, ids({1, 2, 3, 4}));
    auto equivocator = catalog("equivocator");
    Execution ex(config(n, 2, ids({4})), equivocator.get());
    const auto g = graded_consensus_core_set(ex, {0, 0, 0, 1, 1, 0, 1}, k, windows, all_active(n));
    for (ProcessId p : ex.faults().honest_ids()) {
        CHECK(g[p.index()].value == 0);
        CHECK(g[p.index()].grade == 1);
    }
    CHECK(ex.honest_messages()[static_cast<std::size_t>(ProtocolTag::core_gc)] == 2 * 3 * (n - 1));
}

TEST_CASE("window graded consensus satisfies its lemmas at n=4", "[blocks][core-set][exhaustive]") {
    const auto rep = core_set_oracle(4, 1, 1);
    INFO(rep.describe());
    CHECK(rep.pass());
    CHECK(rep.executions > 0);
}

TEST_CASE("conciliation returns the minimum under identical honest windows", "[blocks][conciliation]") {
    const int n = 7, k = 1;
    const auto windows = identical_windows(n, ids({1, 2, 3, 4}));
    Execution ex(config(n, 2, {}, Variant::unauthenticated, 8), nullptr);
    ConciliationTrace trace;
    const auto out = conciliate(ex, {2, 5, 3, 1, 6, 7, 0}, k, windows, all_active(n), &trace);
    for (Value v : out) CHECK(v == 1);
    CHECK(ex.round() == 1);
    CHECK(trace.windows_all_honest);
    CHECK(trace.path_lemma_violations == 0);
}

TEST_CASE("conciliation graph ignores malformed declarations", "[blocks][conciliation]") {
    Inbox inbox;
    inbox.push_back({ProcessId(1), make_payload(ConciliationMsg{3, ids({1, 2})})});
    inbox.push_back({ProcessId(2), make_payload(ConciliationMsg{0, ids({2, 1})})});     // unsorted
    inbox.push_back({ProcessId(3), make_payload(ConciliationMsg{0, ids({1, 2, 3})})});  // wrong size
    inbox.push_back({ProcessId(4), make_payload(ConciliationMsg{9, ids({1, 4})})});     // outside domain
    inbox.push_back({ProcessId(4), make_payload(ConciliationMsg{1, ids({1, 4})})});
    const auto g = ConciliationGraph::from_inbox(inbox, 4, 2, ValueDomain{4});
    CHECK(g.has(ProcessId(1)));
    CHECK_FALSE(g.has(ProcessId(2)));
    CHECK_FALSE(g.has(ProcessId(3)));
    REQUIRE(g.has(ProcessId(4)));
    CHECK(g.vertex(ProcessId(4)).value == 1);
    CHECK(g.m_value(ProcessId(4)) == 1);
    CHECK(g.m_value(ProcessId(1)) == 3);
}

TEST_CASE("conciliation agrees when windows are honest and share a core", "[blocks][conciliation]") {
    // n=13, k=1, t=4, faulty {12,13}; honest windows drawn from a pool of
    // honest processes all containing {1,2,3}.
    const int n = 13, k = 1;
    Rng rng(3);
    const std::vector<int> pool{4, 5, 6, 7, 8, 9, 10, 11};
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::vector<ProcessId>> w(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const int extra = pool[static_cast<std::size_t>(rng.below(pool.size()))];
            w[static_cast<std::size_t>(i)] = ids({1, 2, 3});
            w[static_cast<std::size_t>(i)].emplace_back(extra);
        }
        auto cfg = config(n, 4, ids({12, 13}), Variant::unauthenticated, 4);
        cfg.seed = static_cast<std::uint64_t>(trial);
        auto adv = catalog(trial % 2 ? "equivocator" : "split-brain");
        Execution ex(cfg, adv.get());
        const auto inputs = draw_inputs(n, 4, static_cast<std::uint64_t>(trial));
        ConciliationTrace trace;
        const auto out = conciliate(ex, inputs, k, WindowSet(w), all_active(n), &trace);
        CHECK(trace.path_lemma_violations == 0);
        for (ProcessId p : ex.faults().honest_ids()) CHECK(out[p.index()] == out[0]);
    }
}

TEST_CASE("early stopping decides unanimous inputs without faults", "[blocks][early]") {
    for (Variant v : {Variant::unauthenticated, Variant::authenticated}) {
        const int n = 7, t = 2;
        const auto T = early_stopping_rounds_needed(v, 0);
        Execution ex(config(n, t, {}, v), nullptr);
        EarlyStoppingTrace trace;
        const auto out = ba_early_stopping(ex, constant(n, 1), T, all_active(n), true, &trace);
        for (Value x : out) CHECK(x == 1);
        CHECK(ex.round() == T);
        CHECK(trace.decision_phase == 1);
    }
}

TEST_CASE("early stopping agrees with one equivocator at n=7", "[blocks][early]") {
    // Every faulty position, every honest input vector, several strategies.
    const int n = 7, t = 2;
    const std::int64_t T = early_stopping_rounds_needed(Variant::unauthenticated, t);
    int runs = 0;
    for (int fid = 1; fid <= n; ++fid) {
        const FaultSet faults(n, {ProcessId(fid)});
        for (const auto& inputs : detail::honest_input_vectors(n, faults, {2})) {
            for (const char* name : {"equivocator", "split-brain", "crash"}) {
                auto adv = catalog(name);
                auto cfg = config(n, t, {ProcessId(fid)});
                cfg.seed = static_cast<std::uint64_t>(runs);
                Execution ex(cfg, adv.get());
                EarlyStoppingTrace trace;
                const auto out = ba_early_stopping(ex, inputs, T, all_active(n), true, &trace);
                const Value first = out[faults.honest_ids().front().index()];
                for (ProcessId p : faults.honest_ids()) REQUIRE(out[p.index()] == first);
                CHECK(ex.round() == T);
                CHECK(trace.decision_phase <= 2);
                ++runs;
            }
        }
    }
    CHECK(runs == 7 * 64 * 3);
}

TEST_CASE("early stopping truncates at its round budget", "[blocks][early]") {
    const int n = 7, t = 2;
    const int phase = early_stopping_phase_rounds(Variant::unauthenticated);
    auto equivocator = catalog("equivocator");
    Execution ex(config(n, t, ids({1, 2})), equivocator.get());
    EarlyStoppingTrace trace;
    ba_early_stopping(ex, alternating(n), phase + 2, all_active(n), true, &trace);
    CHECK(trace.phases_run == 1);
    CHECK(ex.round() == phase + 2);

    Execution unpadded(config(n, t, {}), nullptr);
    ba_early_stopping(unpadded, alternating(n), phase + 2, all_active(n), false);
    CHECK(unpadded.round() == phase);
}

TEST_CASE("message budgets of the substitutes", "[blocks][budget]") {
    CHECK(graded_consensus_messages(Variant::unauthenticated, 7) == 2 * 7 * 6);
    const int n = 10, t = 3;
    const auto T = early_stopping_rounds_needed(Variant::unauthenticated, t);
    auto equivocator = catalog("equivocator");
    Execution ex(config(n, t, ids({1, 5, 9})), equivocator.get());
    ba_early_stopping(ex, alternating(n), T, all_active(n));
    std::int64_t sent = 0;
    for (auto m : ex.honest_messages()) sent += m;
    CHECK(sent <= early_stopping_messages(Variant::unauthenticated, n, t, T));
}
