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

#include <fstream>
#include <sstream>

#include "bapred/harness/metrics.hpp"
#include "support.hpp"

using namespace bapred;
using namespace bapred::test;

TEST_CASE("fault-free unanimous run decides the common input", "[engine]") {
    for (Variant v : {Variant::unauthenticated, Variant::authenticated}) {
        for (Value x : {0, 1}) {
            const auto r = run_execution(scenario(v, 7, {}, constant(7, x)));
            for (const auto& d : r.decisions) {
                REQUIRE(d.has_value());
                CHECK(*d == x);
            }
        }
    }
}

TEST_CASE("identical scenarios give byte-identical records", "[engine][determinism]") {
    auto s = scenario(Variant::authenticated, 16, ids({3, 9, 14}), alternating(16), "equivocator", 32, 77);
    s.allocation = AllocationPolicy::adversarial_worst;
    const std::string a = execute_record(0, s);
    const std::string b = execute_record(0, s);
    CHECK(a == b);
    CHECK(replay_record(a) == a);
}

TEST_CASE("inbox order does not change outcomes", "[engine][metamorphic]") {
    // The shuffle salt permutes every inbox and nothing else.
    for (Variant v : {Variant::unauthenticated, Variant::authenticated}) {
        for (const char* adv : {"equivocator", "split-brain", "vote-poisoner"}) {
            auto s = scenario(v, 16, ids({2, 5, 11}), alternating(16), adv, 16, 5);
            const auto base = run_execution(s);
            for (std::uint64_t salt : {1u, 2u, 991u}) {
                s.shuffle_salt = salt;
                const auto other = run_execution(s);
                CHECK(other.decisions == base.decisions);
                CHECK(other.return_rounds == base.return_rounds);
                CHECK(other.rounds_elapsed == base.rounds_elapsed);
                CHECK(other.honest_messages_by_tag == base.honest_messages_by_tag);
            }
        }
    }
}

TEST_CASE("honest broadcasts count n-1 messages, self-delivery is free", "[engine][accounting]") {
    const int n = 9;
    auto s = scenario(Variant::unauthenticated, n, {}, constant(n, 1));
    s.protocol = ProtocolKind::classification_ba;
    const auto r = run_execution(s);
    const auto c = honest_message_count(r, "classify");
    CHECK(c.present);
    CHECK(c.count == n * (n - 1));
    CHECK(r.setup_messages == n * (n - 1));

    std::int64_t sum = 0;
    for (auto m : r.honest_messages_by_tag) sum += m;
    CHECK(r.honest_messages_total == sum);
}

TEST_CASE("unknown or unused tags report absence", "[engine][accounting]") {
    const auto r = run_execution(scenario(Variant::unauthenticated, 4, {}, constant(4, 0)));
    const auto unknown = honest_message_count(r, "no-such-protocol");
    CHECK_FALSE(unknown.present);
    CHECK(unknown.count == 0);
    const auto unused = honest_message_count(r, "bb-chain");
    CHECK_FALSE(unused.present);
    CHECK(unused.count == 0);
}

TEST_CASE("messages sent only by faulty processes are not counted", "[engine][accounting]") {
    ScriptedAdversary adv;
    adv.script = [](AdversaryToolkit& tk) {
        for (ProcessId p : tk.faults().faulty_ids()) tk.out(p).broadcast(make_payload(ValueMsg{1}));
    };
    Execution ex(config(4, 1, ids({2})), &adv);
    auto out = ex.outboxes();
    const auto in = ex.exchange(ProtocolTag::wrapper_gc, out);
    CHECK(ex.honest_messages()[static_cast<std::size_t>(ProtocolTag::wrapper_gc)] == 0);
    for (ProcessId p : ex.faults().honest_ids()) {
        REQUIRE(in[p.index()].size() == 1);
        CHECK(in[p.index()][0].sender == ProcessId(2));
    }
}

TEST_CASE("the adversary is confined to faulty identities", "[engine][adversary]") {
    ScriptedAdversary adv;
    SECTION("sending as an honest process") {
        adv.script = [](AdversaryToolkit& tk) { tk.out(ProcessId(1)).broadcast(make_payload(ValueMsg{0})); };
        Execution ex(config(4, 1, ids({4})), &adv);
        auto out = ex.outboxes();
        CHECK_THROWS_AS(ex.exchange(ProtocolTag::wrapper_gc, out), ProtocolViolation);
    }
    SECTION("signing as an honest process") {
        adv.script = [](AdversaryToolkit& tk) { tk.sign(ProcessId(1), committee_content(ProcessId(1))); };
        auto cfg = config(5, 2, ids({4}));
        cfg.variant = Variant::authenticated;
        Execution ex(cfg, &adv);
        auto out = ex.outboxes();
        CHECK_THROWS_AS(ex.exchange(ProtocolTag::committee_vote, out), ProtocolViolation);
    }
    SECTION("honest traffic reaches receivers unaltered") {
        adv.script = [](AdversaryToolkit& tk) { tk.out(ProcessId(4)).send(ProcessId(1), make_payload(ValueMsg{1})); };
        Execution ex(config(4, 1, ids({4})), &adv);
        auto out = ex.outboxes();
        const auto sent = make_payload(ValueMsg{0});
        out[1].send(ProcessId(1), sent);
        const auto in = ex.exchange(ProtocolTag::wrapper_gc, out);
        bool found = false;
        for (const auto& d : in[0])
            if (d.sender == ProcessId(2)) found = d.payload == sent;
        CHECK(found);
    }
}

TEST_CASE("rushing adversary sees the current round's honest traffic", "[engine][adversary]") {
    ScriptedAdversary adv;
    std::vector<Value> seen;
    adv.script = [&](AdversaryToolkit& tk) {
        for (ProcessId p : tk.faults().honest_ids())
            for (const auto& pl : tk.shadow(p).for_receiver(ProcessId(3)))
                if (const auto* m = std::get_if<ValueMsg>(pl.get())) seen.push_back(m->value);
    };
    Execution ex(config(4, 1, ids({3})), &adv);
    auto out = ex.outboxes();
    for (int i = 0; i < 4; ++i) out[static_cast<std::size_t>(i)].broadcast(make_payload(ValueMsg{i % 2}));
    ex.exchange(ProtocolTag::wrapper_gc, out);
    CHECK(seen == std::vector<Value>{0, 1, 1});
}

TEST_CASE("malformed honest sends are reported as violations", "[engine]") {
    Execution ex(config(4, 1, {}), nullptr);
    auto out = ex.outboxes();
    out[0].send(ProcessId(9), make_payload(ValueMsg{0}));
    CHECK_THROWS_AS(ex.exchange(ProtocolTag::wrapper_gc, out), ProtocolViolation);
}

TEST_CASE("configuration preconditions are enforced", "[engine]") {
    CHECK_THROWS_AS(Execution(config(6, 2, {}), nullptr), ConfigError);  // t >= n/3
    CHECK_THROWS_AS(Execution(config(7, 1, ids({1, 2})), nullptr), ConfigError);
    auto auth = config(6, 3, {});
    auth.variant = Variant::authenticated;
    CHECK_THROWS_AS(Execution(auth, nullptr), ConfigError);  // t >= n/2
    auth.t = 2;
    CHECK_NOTHROW(Execution(auth, nullptr));
    CHECK_THROWS_AS(run_execution(scenario(Variant::unauthenticated, 4, {}, constant(3, 0))), ConfigError);
}

TEST_CASE("idle rounds advance time without traffic", "[engine]") {
    Execution ex(config(4, 1, {}), nullptr);
    ex.idle(5);
    CHECK(ex.round() == 5);
    for (auto m : ex.honest_messages()) CHECK(m == 0);
    for (auto r : ex.rounds_by_tag()) CHECK(r == 0);
}

TEST_CASE("golden: n=4, one equivocator, split inputs", "[engine][golden]") {
    // Faulty p4; honest inputs (0,1,0). Agreement must hold and the full
    // record must match the stored golden line byte for byte.
    auto s = scenario(Variant::unauthenticated, 4, ids({4}), {0, 1, 0, 1}, "equivocator", 0, 1);
    VerdictSet v;
    const std::string line = execute_record(0, s, &v);
    CHECK(v.all_pass());
    const auto r = run_execution(s);
    REQUIRE(r.decisions[0].has_value());
    CHECK(r.decisions[1] == r.decisions[0]);
    CHECK(r.decisions[2] == r.decisions[0]);

    std::ifstream in(BAPRED_GOLDEN_DIR "/equivocator_n4.jsonl");
    REQUIRE(in.good());
    std::string golden;
    std::getline(in, golden);
    CHECK(line == golden);
}
