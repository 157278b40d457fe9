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

#include <algorithm>

#include "bapred/harness/verify.hpp"
#include "support.hpp"

using namespace bapred;
using namespace bapred::test;

namespace {

Scenario class_ba(Variant v, int n, std::vector<ProcessId> faulty, std::vector<Value> inputs, std::string adversary,
                  int k) {
    Scenario s = scenario(v, n, std::move(faulty), std::move(inputs), std::move(adversary));
    s.protocol = ProtocolKind::classification_ba;
    s.params["k"] = k;
    return s;
}

std::string failures(const VerdictSet& v) {
    std::string out;
    for (const auto& x : v.failures()) out += x->property + ": " + x->detail + "\n";
    return out;
}

bool has_verdict(const VerdictSet& v, const std::string& property) {
    return std::any_of(v.verdicts.begin(), v.verdicts.end(), [&](const Verdict& x) { return x.property == property; });
}

std::vector<Value> honest_decisions(const ExecutionResult& r) {
    std::vector<Value> out;
    for (const auto& d : r.decisions)
        if (d) out.push_back(*d);
    return out;
}

}  // namespace

TEST_CASE("classification round sends n(n-1) messages in one round", "[agreement][classify]") {
    for (int n : {4, 9, 31}) {
        Scenario s = scenario(Variant::unauthenticated, n, {}, constant(n, 0));
        s.protocol = ProtocolKind::classification_ba;
        const auto r = run_execution(s);
        CHECK(r.setup_rounds == 1);
        CHECK(r.setup_messages == static_cast<std::int64_t>(n) * (n - 1));
        CHECK(tag_messages(r, ProtocolTag::classify) == static_cast<std::int64_t>(n) * (n - 1));
    }
}

TEST_CASE("wrapper constants", "[agreement][wrapper]") {
    CHECK(WrapperConfig::make(Variant::unauthenticated, 13).alpha == 15);
    CHECK(WrapperConfig::make(Variant::authenticated, 13).alpha == 27);

    CHECK(wrapper_phase_count(1) == 1);
    CHECK(wrapper_phase_count(2) == 2);
    CHECK(wrapper_phase_count(3) == 3);
    CHECK(wrapper_phase_count(4) == 3);
    CHECK(wrapper_phase_count(5) == 4);
    CHECK(wrapper_phase_count(33) == 7);

    const auto cfg = WrapperConfig::make(Variant::unauthenticated, 10);
    CHECK(cfg.budget(1) == 15);
    CHECK(cfg.budget(3) == 60);
    CHECK(cfg.k(3) == 4);
    CHECK(cfg.phase_rounds(1) == 3 * 2 + 2 * 15);
    CHECK(cfg.rounds_through(2) == 1 + (6 + 30) + (6 + 60));

    // Both boxes fit their budgets in every phase.
    for (Variant v : {Variant::unauthenticated, Variant::authenticated}) {
        const auto c = WrapperConfig::make(v, 40);
        for (int phase = 1; phase <= c.phase_count; ++phase) {
            CHECK(class_ba_rounds(v, c.k(phase)) <= c.budget(phase));
            CHECK(early_stopping_rounds_needed(v, c.k(phase)) <= c.budget(phase));
        }
    }
}

TEST_CASE("unauthenticated classification BA at n=40", "[agreement][unauth]") {
    const int n = 40, k = 1;
    REQUIRE(class_ba_unauth_condition(n, default_t(Variant::unauthenticated, n), k));
    CHECK(class_ba_unauth_rounds(k) == 15);
    CHECK(class_ba_unauth_messages(n, k) == 2600);

    for (const char* adv : {"none", "silent", "equivocator", "vote-poisoner", "selective-ignorer", "split-brain"}) {
        for (int pattern = 0; pattern < 3; ++pattern) {
            const auto inputs = pattern == 0 ? constant(n, 1) : pattern == 1 ? alternating(n) : draw_inputs(n, 2, 5);
            const auto s = class_ba(Variant::unauthenticated, n, ids({17}), inputs, adv, k);
            const auto r = run_execution(s);
            INFO(adv << " inputs pattern " << pattern);
            REQUIRE(r.preconditions);
            CHECK(r.rounds_elapsed - r.setup_rounds <= 15);
            CHECK(r.honest_messages_total - r.setup_messages <= 2600);

            const auto d = honest_decisions(r);
            CHECK(std::adjacent_find(d.begin(), d.end(), std::not_equal_to<>()) == d.end());
            if (pattern == 0) CHECK(d.front() == 1);
            const auto v = verify_execution(r, s);
            INFO(failures(v));
            CHECK(v.all_pass());
            CHECK(r.unauth->gc_violations == 0);
            CHECK(r.unauth->conciliation_violations == 0);
            CHECK(r.unauth->path_lemma_violations == 0);
        }
    }
}

TEST_CASE("unauthenticated classification BA stops early on unanimous input", "[agreement][unauth]") {
    const int n = 31;
    const auto s = class_ba(Variant::unauthenticated, n, ids({2, 9}), constant(n, 0), "equivocator", 1);
    const auto r = run_execution(s);
    REQUIRE(r.unauth);
    for (int ph : r.unauth->returned_in_phase) {
        CHECK(ph >= 1);
        CHECK(ph <= 2);
    }
    for (Value d : honest_decisions(r)) CHECK(d == 0);
}

TEST_CASE("authenticated classification BA runs k+3 rounds with a sound committee", "[agreement][auth]") {
    const int n = 20;
    const int t = default_t(Variant::authenticated, n);
    CHECK(t == 8);
    for (int k : {1, 2, 3}) {
        REQUIRE(class_ba_auth_condition(n, t, k));
        for (const char* adv : {"none", "equivocator", "chain-withholder", "certificate-hoarder", "forgery", "split-brain"}) {
            const auto s = class_ba(Variant::authenticated, n, ids({1, 4, 12}), alternating(n), adv, k);
            const auto r = run_execution(s);
            INFO("k=" << k << " " << adv);
            REQUIRE(r.auth);
            CHECK(r.misclassification->k_a() == 0);
            CHECK(r.rounds_elapsed - r.setup_rounds == k + 3);

            const FaultSet faults(n, s.faulty);
            const auto& committee = r.auth->committee;
            const auto in_f = std::count_if(committee.begin(), committee.end(), [&](ProcessId p) { return faults.faulty(p); });
            CHECK(static_cast<int>(committee.size()) <= 3 * k + 1);
            CHECK(in_f <= k);
            CHECK(static_cast<int>(committee.size()) - in_f >= k + 1);

            CHECK(r.forgeries_accepted == 0);
            const auto v = verify_execution(r, s);
            INFO(failures(v));
            CHECK(v.all_pass());
        }
    }
}

TEST_CASE("wrapper keeps strong unanimity under any prediction budget", "[agreement][wrapper]") {
    for (Variant v : {Variant::unauthenticated, Variant::authenticated}) {
        const int n = 13;
        const int t = default_t(v, n);
        const auto faulty = draw_fault_set(n, t, 3);
        for (std::int64_t budget : {std::int64_t{0}, std::int64_t{n}, std::int64_t{n} * t, std::int64_t{n} * n}) {
            for (const char* adv : {"equivocator", "vote-poisoner", "split-brain"}) {
                Scenario s = scenario(v, n, faulty, constant(n, 1), adv, budget);
                s.allocation = AllocationPolicy::adversarial_worst;
                const auto r = run_execution(s);
                INFO(to_string(v) << " B=" << budget << " " << adv);
                for (Value d : honest_decisions(r)) CHECK(d == 1);
                const auto verdicts = verify_execution(r, s);
                INFO(failures(verdicts));
                CHECK(verdicts.all_pass());
                CHECK(has_verdict(verdicts, "strong-unanimity"));
            }
        }
    }
}

TEST_CASE("wrapper with exact predictions finishes within two phases", "[agreement][wrapper]") {
    for (Variant v : {Variant::unauthenticated, Variant::authenticated}) {
        const int n = 25;
        const int t = default_t(v, n);
        for (const char* adv : {"none", "silent", "equivocator", "split-brain"}) {
            const auto s = scenario(v, n, draw_fault_set(n, t, 8), alternating(n), adv, 0);
            const auto r = run_execution(s);
            INFO(to_string(v) << " " << adv);
            REQUIRE(r.wrapper);
            const std::int64_t last =
                *std::max_element(r.return_rounds.begin(), r.return_rounds.end());
            CHECK(last <= r.wrapper->rounds_through(std::min(2, r.wrapper->phase_count)));
            const auto verdicts = verify_execution(r, s);
            INFO(failures(verdicts));
            CHECK(verdicts.all_pass());
            CHECK(has_verdict(verdicts, "return-window"));
        }
    }
}

TEST_CASE("dropping the grade guard breaks the wrapper", "[agreement][wrapper][mutant]") {
    Scenario s = scenario(Variant::unauthenticated, 4, ids({1}), constant(4, 1), "equivocator", 0);
    s.allocation = AllocationPolicy::concentrated_on_honest;
    CHECK(verify_execution(run_execution(s), s).all_pass());

    s.skip_grade_guard = true;
    const auto verdicts = verify_execution(run_execution(s), s);
    REQUIRE_FALSE(verdicts.all_pass());
    CHECK(verdicts.failures().front()->property == "strong-unanimity");
}
