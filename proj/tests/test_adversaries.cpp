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

#include <set>

#include "bapred/adversary/enumerate.hpp"
#include "bapred/harness/verify.hpp"
#include "support.hpp"

using namespace bapred;
using namespace bapred::test;

namespace {

// The observable outcome of a run, for comparing two runs.
struct Outcome {
    std::vector<std::optional<Value>> decisions;
    std::vector<int> return_rounds;
    int rounds = 0;
    std::int64_t messages = 0;
    bool operator==(const Outcome&) const = default;
};

Outcome outcome(const Scenario& s) {
    const auto r = run_execution(s);
    return {r.decisions, r.return_rounds, r.rounds_elapsed, r.honest_messages_total};
}

std::size_t count_strategies(EnumerationSpec spec, const std::vector<ProcessId>& faulty, std::vector<Value> inputs) {
    SmallAdversaryStream stream(spec);
    while (auto* adv = stream.next()) {
        Execution ex(config(spec.n, 1, faulty), adv);
        graded_consensus(ex, ProtocolTag::wrapper_gc, inputs);
    }
    return stream.report().strategies;
}

}  // namespace

TEST_CASE("strategy catalog", "[adversary][catalog]") {
    std::set<std::string> names;
    for (const auto& s : strategy_catalog()) {
        names.insert(s.name);
        CHECK_FALSE(s.summary.empty());
        AdversarySpec spec;
        spec.name = s.name;
        const auto adv = make_adversary(spec);
        if (s.name == "none") CHECK(adv == nullptr);
        else CHECK(adv->name() == s.name);
    }
    CHECK(names == std::set<std::string>{"none", "silent", "crash", "equivocator", "vote-poisoner", "chain-withholder",
                                         "certificate-hoarder", "selective-ignorer", "forgery", "split-brain"});
    AdversarySpec bogus;
    bogus.name = "telepath";
    CHECK_THROWS_AS(make_adversary(bogus), ConfigError);
    CHECK_THROWS_AS(run_execution(scenario(Variant::unauthenticated, 4, ids({1}), constant(4, 0), "telepath")), ConfigError);
}

TEST_CASE("every strategy is deterministic given the seed", "[adversary]") {
    for (const auto& info : strategy_catalog()) {
        const Variant v = info.authenticated_only ? Variant::authenticated : Variant::unauthenticated;
        const int n = 10;
        Scenario s = scenario(v, n, ids({2, 7}), alternating(n), info.name, n, 77);
        s.allocation = AllocationPolicy::adversarial_worst;
        INFO(info.name);
        CHECK(outcome(s) == outcome(s));
    }
}

TEST_CASE("silent faulty processes look like an immediate crash", "[adversary]") {
    const int n = 13;
    for (Variant v : {Variant::unauthenticated, Variant::authenticated}) {
        const Scenario silent = scenario(v, n, ids({3, 5, 11}), draw_inputs(n, 2, 4), "silent");
        Scenario crash = silent;
        crash.adversary.name = "crash";
        crash.adversary.params["round"] = 1;
        CHECK(outcome(silent) == outcome(crash));
    }
}

TEST_CASE("vote poisoning without prediction errors misclassifies nobody", "[adversary][predictions]") {
    const int n = 16;
    for (std::int64_t tailored : {0, 1}) {
        Scenario s = scenario(Variant::unauthenticated, n, draw_fault_set(n, 5, 9), alternating(n), "vote-poisoner");
        s.adversary.params["tailored"] = tailored;
        const auto r = run_execution(s);
        REQUIRE(r.misclassification);
        CHECK(r.misclassification->k_a() == 0);
    }
}

TEST_CASE("authenticated attacks neither forge nor split", "[adversary][auth]") {
    const int n = 12;
    const int t = default_t(Variant::authenticated, n);
    for (const char* adv : {"chain-withholder", "certificate-hoarder", "forgery"}) {
        for (std::uint64_t seed = 1; seed <= 4; ++seed) {
            Scenario s = scenario(Variant::authenticated, n, draw_fault_set(n, t, seed), draw_inputs(n, 2, seed), adv,
                                  static_cast<std::int64_t>(seed) * n, seed);
            s.allocation = AllocationPolicy::concentrated_on_faulty;
            const auto r = run_execution(s);
            const auto verdicts = verify_execution(r, s);
            INFO(adv << " seed " << seed);
            std::string failed;
            for (const auto* f : verdicts.failures()) failed += f->property + ": " + f->detail + "\n";
            INFO(failed);
            CHECK(verdicts.all_pass());
            CHECK(r.forgeries_accepted == 0);
            if (std::string(adv) == "forgery") CHECK(r.honest_signatures_rejected > 0);
        }
    }
}

TEST_CASE("the enumerator has exactly one strategy without faults", "[adversary][enumerate]") {
    EnumerationSpec spec;
    spec.n = 4;
    CHECK(count_strategies(spec, {}, {0, 1, 1, 0}) == 1);
}

TEST_CASE("the enumerator walks every choice once", "[adversary][enumerate]") {
    EnumerationSpec spec;
    spec.n = 4;
    const auto all = count_strategies(spec, ids({4}), {0, 1, 1, 0});
    CHECK(all > 1);

    // Different leaves must reach different honest outcomes.
    SmallAdversaryStream stream(spec);
    std::set<std::vector<std::pair<Value, int>>> views;
    while (auto* adv = stream.next()) {
        Execution ex(config(4, 1, ids({4})), adv);
        const auto g = graded_consensus(ex, ProtocolTag::wrapper_gc, {0, 1, 1, 0});
        std::vector<std::pair<Value, int>> view;
        for (int i = 0; i < 3; ++i) view.emplace_back(g[static_cast<std::size_t>(i)].value, g[static_cast<std::size_t>(i)].grade);
        views.insert(view);
    }
    CHECK(stream.report().exhaustive());
    CHECK(stream.report().strategies == all);
    CHECK(views.size() > 1);
}

TEST_CASE("a small limit reports truncation", "[adversary][enumerate]") {
    EnumerationSpec spec;
    spec.n = 4;
    spec.limit = 3;
    SmallAdversaryStream stream(spec);
    std::size_t seen = 0;
    while (auto* adv = stream.next()) {
        Execution ex(config(4, 1, ids({4})), adv);
        graded_consensus(ex, ProtocolTag::wrapper_gc, {0, 1, 1, 0});
        ++seen;
    }
    CHECK(seen == 3);
    CHECK_FALSE(stream.report().exhaustive());
    CHECK(stream.report().describe().find("TRUNCATED") != std::string::npos);
}

TEST_CASE("the enumerator rejects instances it cannot cover", "[adversary][enumerate]") {
    EnumerationSpec spec;
    spec.n = 6;
    CHECK_THROWS_AS(SmallAdversaryStream(spec), ConfigError);
    spec.n = 4;
    spec.domain = ValueDomain{3};
    CHECK_THROWS_AS(SmallAdversaryStream(spec), ConfigError);
}
