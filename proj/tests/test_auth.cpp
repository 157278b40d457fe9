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

#include "bapred/auth/certificate.hpp"
#include "bapred/auth/chain.hpp"
#include "bapred/auth/implicit_committee_broadcast.hpp"
#include "bapred/harness/oracle.hpp"
#include "support.hpp"

using namespace bapred;
using namespace bapred::test;

namespace {

Digest content(std::string_view s) { return CanonicalEncoder().text(s).finish(); }

SignatureService service(int n, std::vector<ProcessId> faulty, SchemeKind kind = SchemeKind::simulated) {
    return SignatureService(make_scheme(kind, n, 99), FaultSet(n, faulty));
}

std::vector<Signature> nominations(SignatureService& svc, ProcessId subject, std::initializer_list<int> signers) {
    std::vector<Signature> out;
    for (int s : signers) out.push_back(svc.mint(ProcessId(s), committee_content(subject)));
    return out;
}

std::vector<int> signer_ids(const CertificatePtr& cc) {
    std::vector<int> out;
    for (ProcessId p : cc->signers()) out.push_back(p.value());
    return out;
}

}  // namespace

TEST_CASE("canonical encoding follows the documented layout", "[auth][encoding]") {
    CanonicalEncoder e;
    e.integer(-2).text("ab").process(ProcessId(258));
    const std::vector<std::uint8_t> expect{0x01, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xfe,  // integer
                                           0x02, 0x00, 0x00, 0x00, 0x02, 'a',  'b',              // text
                                           0x04, 0x00, 0x00, 0x01, 0x02};                        // process
    CHECK(e.bytes() == expect);

    const std::array<std::uint8_t, 3> blob{7, 8, 9};
    CanonicalEncoder b;
    b.blob(blob).digest(Digest{});
    CHECK(b.bytes().size() == 1 + 4 + 3 + 1 + 32);
    CHECK(b.bytes()[0] == 0x05);
    CHECK(b.bytes()[8] == 0x03);

    // Different field boundaries never collide.
    CHECK(CanonicalEncoder().text("ab").text("c").finish() != CanonicalEncoder().text("a").text("bc").finish());
}

TEST_CASE("signatures verify only for their signer and content", "[auth][signature]") {
    for (SchemeKind kind : {SchemeKind::simulated, SchemeKind::ed25519}) {
        auto svc = service(5, ids({4}), kind);
        const Digest m = content("m");
        const Signature s = svc.mint(ProcessId(3), m);
        CHECK(svc.verify(s, ProcessId(3), m));
        CHECK_FALSE(svc.verify(s, ProcessId(3), content("m'")));
        CHECK_FALSE(svc.verify(s, ProcessId(2), m));
        Signature tampered = s;
        tampered.token.bytes[0] ^= 1;
        CHECK_FALSE(svc.verify(tampered, ProcessId(3), m));
        CHECK(svc.forgeries_accepted() == 0);
        CHECK(svc.honest_signatures_rejected() == 3);
    }
}

TEST_CASE("keys are fixed by the execution seed", "[auth][signature]") {
    const Digest m = content("x");
    const auto a = make_scheme(SchemeKind::ed25519, 3, 5)->sign(ProcessId(2), m);
    const auto b = make_scheme(SchemeKind::ed25519, 3, 5)->sign(ProcessId(2), m);
    const auto c = make_scheme(SchemeKind::ed25519, 3, 6)->sign(ProcessId(2), m);
    CHECK(a == b);
    CHECK_FALSE(a == c);
}

TEST_CASE("committee certificates keep the t+1 smallest valid nominators", "[auth][certificate]") {
    auto svc = service(5, {});
    const ProcessId subject(3);
    {
        const auto sigs = nominations(svc, subject, {1, 2, 5});
        const auto cc = assemble_committee_certificate(subject, sigs, 2, svc);
        REQUIRE(cc);
        CHECK(signer_ids(cc) == std::vector<int>{1, 2, 5});
        CHECK(is_committee_certificate(cc, subject, 2, svc));
        CHECK_FALSE(is_committee_certificate(cc, ProcessId(4), 2, svc));
    }
    {
        const auto sigs = nominations(svc, subject, {1, 2, 2});
        CHECK_FALSE(assemble_committee_certificate(subject, sigs, 2, svc));
    }
    {
        const auto sigs = nominations(svc, subject, {5, 4, 2, 1});
        const auto cc = assemble_committee_certificate(subject, sigs, 2, svc);
        REQUIRE(cc);
        CHECK(signer_ids(cc) == std::vector<int>{1, 2, 4});
    }
    {
        // A nomination for someone else does not count.
        auto sigs = nominations(svc, subject, {1, 2});
        sigs.push_back(svc.mint(ProcessId(5), committee_content(ProcessId(1))));
        CHECK_FALSE(assemble_committee_certificate(subject, sigs, 2, svc));
    }
}

TEST_CASE("chain validation", "[auth][chain]") {
    const int n = 5, t = 2;
    auto svc = service(n, ids({4, 5}));
    std::vector<CertificatePtr> cc(static_cast<std::size_t>(n));
    for (int s = 1; s <= n; ++s)
        cc[static_cast<std::size_t>(s - 1)] = assemble_committee_certificate(
            ProcessId(s), nominations(svc, ProcessId(s), {1, 2, 3}), t, svc);
    auto signer = [&](int who) { return [&svc, who](const Digest& d) { return svc.mint(ProcessId(who), d); }; };

    const auto c1 = ChainNode::sign_link(nullptr, 1, cc[0], signer(1));
    CHECK(validate_chain(c1, ProcessId(1), 1, t, svc));
    CHECK_FALSE(validate_chain(c1, ProcessId(2), 1, t, svc));  // wrong origin

    const auto c2 = ChainNode::sign_link(c1, 1, cc[1], signer(2));
    CHECK(c2->length() == 2);
    CHECK(c2->signers() == ids({2, 1}));
    CHECK(validate_chain(c2, ProcessId(1), 2, t, svc));
    CHECK_FALSE(validate_chain(c2, ProcessId(1), 1, t, svc));  // too long

    SECTION("two links by the same signer") {
        const auto dup = ChainNode::sign_link(c2, 1, cc[0], signer(1));
        CHECK_FALSE(validate_chain(dup, ProcessId(1), 3, t, svc));
    }
    SECTION("certificate of another process") {
        const auto wrong = ChainNode::sign_link(c1, 1, cc[2], signer(2));
        CHECK_FALSE(validate_chain(wrong, ProcessId(1), 2, t, svc));
    }
    SECTION("no certificate") {
        const auto bare = ChainNode::sign_link(nullptr, 0, nullptr, signer(4));
        CHECK_FALSE(validate_chain(bare, ProcessId(4), 1, t, svc));
    }
    SECTION("forged honest link") {
        // The faulty p4 attaches a made-up signature of honest p2.
        const Digest link = ChainNode::link_content(c1, 1, cc[1]);
        Signature fake{ProcessId(2), link, {}};
        fake.token.size = 16;
        fake.token.bytes.fill(0xab);
        const auto forged = ChainNode::extend(c1, cc[1], fake);
        CHECK_FALSE(validate_chain(forged, ProcessId(1), 2, t, svc));
        const auto on_top = ChainNode::sign_link(forged, 1, cc[3], signer(4));
        CHECK_FALSE(validate_chain(on_top, ProcessId(1), 3, t, svc));
        CHECK(svc.forgeries_accepted() == 0);
        CHECK(svc.honest_signatures_rejected() >= 1);
    }
    SECTION("honest signature replayed on other content") {
        const Signature real = c1->signature();
        const auto replay = ChainNode::origin(0, cc[0], real);  // claims value 0
        CHECK_FALSE(validate_chain(replay, ProcessId(1), 1, t, svc));
        CHECK(svc.forgeries_accepted() == 0);
    }
}

TEST_CASE("implicit committee broadcast: validity and default", "[auth][broadcast]") {
    // n=7, t=3, certified = {1,2,3,5}; faulty = {6,7} (uncertified here).
    const int n = 7, t = 3, k = 1;
    ScriptedAdversary silent;
    Execution ex(config(n, t, ids({6, 7}), Variant::authenticated), &silent);
    std::vector<CertificatePtr> cc(static_cast<std::size_t>(n));
    for (int s : {1, 2, 3, 5}) {
        std::vector<Signature> sigs;
        for (int w = 1; w <= t + 1; ++w) sigs.push_back(ex.sign(ProcessId(w), committee_content(ProcessId(s))));
        cc[static_cast<std::size_t>(s - 1)] = assemble_committee_certificate(ProcessId(s), sigs, t, ex.require_signatures());
    }
    const std::vector<Value> x{1, 0, 1, 1, 0, 1, 1};
    const std::vector<bool> active(static_cast<std::size_t>(n), true);
    BroadcastTrace trace;
    const auto res = bb_with_implicit_committee(ex, x, k, cc, active, &trace);
    CHECK(ex.round() == k + 1);
    for (ProcessId p : ex.faults().honest_ids()) {
        for (int s = 1; s <= n; ++s) {
            const auto& out = res[p.index()][static_cast<std::size_t>(s - 1)];
            if (cc[static_cast<std::size_t>(s - 1)]) CHECK(out == x[static_cast<std::size_t>(s - 1)]);
            else CHECK_FALSE(out.has_value());
        }
    }
    CHECK(trace.max_x_size == 1);
    CHECK(trace.max_honest_broadcasts <= 2);
    CHECK(trace.uncertified_honest_senders == 0);
    CHECK(trace.messages_in_uncertified_instances == 0);
    CHECK(trace.relay_violations == 0);
    CHECK(trace.certified_senders == ids({1, 2, 3, 5}));
    CHECK(ex.require_signatures().forgeries_accepted() == 0);
}

TEST_CASE("implicit committee broadcast under every enumerated adversary at n=5", "[auth][broadcast][exhaustive]") {
    const auto rep = committee_oracle(5, 1, 1);
    INFO(rep.describe());
    CHECK(rep.exhaustive);
    CHECK(rep.violations == 0);
    CHECK(rep.executions > 10'000);
}

TEST_CASE("the committee oracle catches too few rounds", "[auth][broadcast][exhaustive]") {
    // With k=0 a single round cannot stop a certified faulty sender from
    // splitting the honest processes, so the oracle must report violations.
    const auto rep = committee_oracle(5, 1, 0);
    CHECK(rep.violations > 0);
}
