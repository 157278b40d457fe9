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

#include <bit>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "bapred/adversary/enumerate.hpp"
#include "bapred/agreement/classification_unauth.hpp"
#include "bapred/auth/implicit_committee_broadcast.hpp"
#include "bapred/blocks/graded_consensus.hpp"

namespace bapred {

/// Result of checking lemma-level properties over every enumerated
/// adversary behavior of a small configuration family.
struct OracleReport {
    std::string name;
    std::size_t configurations = 0;
    std::size_t executions = 0;
    std::size_t violations = 0;
    bool exhaustive = true;
    std::vector<std::string> examples;  // first few violations

    void violation(std::string what) {
        ++violations;
        if (examples.size() < 5) examples.push_back(std::move(what));
    }
    void absorb(const EnumerationReport& r) { exhaustive = exhaustive && r.exhaustive(); }
    bool pass() const { return violations == 0 && exhaustive; }
    std::string describe() const {
        std::ostringstream os;
        os << name << ": " << executions << " executions over " << configurations << " configurations, " << violations
           << " violations" << (exhaustive ? "" : ", truncated (sampled)");
        for (const auto& e : examples) os << "; " << e;
        return os.str();
    }
};

namespace detail {

/// Every fault set of size at most t, smallest first.
inline std::vector<std::vector<ProcessId>> small_fault_sets(int n, int t) {
    std::vector<std::vector<ProcessId>> out;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (std::popcount(mask) > t) continue;
        std::vector<ProcessId> f;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) f.emplace_back(i + 1);
        out.push_back(std::move(f));
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
    return out;
}

/// Every assignment of domain values to the honest processes (faulty slots 0).
inline std::vector<std::vector<Value>> honest_input_vectors(int n, const FaultSet& faults, ValueDomain d) {
    std::vector<std::vector<Value>> out{std::vector<Value>(static_cast<std::size_t>(n), 0)};
    for (ProcessId p : faults.honest_ids()) {
        std::vector<std::vector<Value>> next;
        for (const auto& base : out)
            for (Value v = d.min(); v <= d.max(); ++v) {
                auto w = base;
                w[p.index()] = v;
                next.push_back(std::move(w));
            }
        out = std::move(next);
    }
    return out;
}

inline std::string describe_config(const std::vector<ProcessId>& faulty, const std::vector<Value>& inputs) {
    std::ostringstream os;
    os << "F={";
    for (std::size_t i = 0; i < faulty.size(); ++i) os << (i ? "," : "") << faulty[i].value();
    os << "} inputs=(";
    for (std::size_t i = 0; i < inputs.size(); ++i) os << (i ? "," : "") << inputs[i];
    os << ")";
    return os.str();
}

/// Unanimity ("they all return (v, 1)") and coherence (a grade-1 output
/// forces every honest value) over honest outputs.
inline void check_graded_lemmas(OracleReport& rep, const FaultSet& faults, const std::vector<Value>& inputs,
                                const std::vector<GradedOutput>& g, const std::string& where) {
    const auto& honest = faults.honest_ids();
    if (honest.empty()) return;
    bool unanimous = true;
    for (ProcessId p : honest) unanimous = unanimous && inputs[p.index()] == inputs[honest.front().index()];
    if (unanimous) {
        const Value v = inputs[honest.front().index()];
        for (ProcessId p : honest)
            if (g[p.index()].value != v || g[p.index()].grade != 1) {
                rep.violation("unanimity at p" + std::to_string(p.value()) + " " + where);
                break;
            }
    }
    for (ProcessId p : honest) {
        if (g[p.index()].grade != 1) continue;
        for (ProcessId q : honest)
            if (g[q.index()].value != g[p.index()].value) {
                rep.violation("coherence p" + std::to_string(p.value()) + " vs p" + std::to_string(q.value()) + " " + where);
                return;
            }
    }
}

inline ExecutionConfig small_config(int n, int t, const std::vector<ProcessId>& faulty, ValueDomain d, Variant v) {
    ExecutionConfig cfg;
    cfg.n = n;
    cfg.t = t;
    cfg.faulty = faulty;
    cfg.domain = d;
    cfg.variant = v;
    return cfg;
}

}  // namespace detail

/// The substitute graded consensus (unauthenticated, two rounds) against
/// every faulty behavior, every fault set of size at most t and every honest
/// input vector.
inline OracleReport graded_consensus_oracle(int n, int t, ValueDomain d = {2}, std::size_t limit = 1'000'000) {
    OracleReport rep;
    rep.name = "graded-consensus n=" + std::to_string(n) + " t=" + std::to_string(t);
    for (const auto& faulty : detail::small_fault_sets(n, t)) {
        const FaultSet faults(n, faulty);
        for (const auto& inputs : detail::honest_input_vectors(n, faults, d)) {
            ++rep.configurations;
            EnumerationSpec spec{n, d, SmallProtocol::graded_consensus, 2, limit, ProcessId(1)};
            SmallAdversaryStream stream(spec);
            while (auto* adv = stream.next()) {
                Execution ex(detail::small_config(n, t, faulty, d, Variant::unauthenticated), adv);
                const auto g = graded_consensus(ex, ProtocolTag::wrapper_gc, inputs);
                ++rep.executions;
                detail::check_graded_lemmas(rep, faults, inputs, g, detail::describe_config(faulty, inputs));
            }
            rep.absorb(stream.report());
        }
    }
    return rep;
}

/// Window-scoped graded consensus with every process using the window
/// {1, ..., 3k+1}; configurations whose honest windows share fewer than
/// 2k+1 honest members are outside the lemmas and skipped.
inline OracleReport core_set_oracle(int n, int t, int k, ValueDomain d = {2}, std::size_t limit = 1'000'000) {
    OracleReport rep;
    rep.name = "core-set-gc n=" + std::to_string(n) + " k=" + std::to_string(k);
    std::vector<ProcessId> window;
    for (int i = 1; i <= 3 * k + 1 && i <= n; ++i) window.emplace_back(i);
    const WindowSet windows(std::vector<std::vector<ProcessId>>(static_cast<std::size_t>(n), window));
    const std::vector<bool> active(static_cast<std::size_t>(n), true);
    for (const auto& faulty : detail::small_fault_sets(n, t)) {
        const FaultSet faults(n, faulty);
        for (const auto& inputs : detail::honest_input_vectors(n, faults, d)) {
            EnumerationSpec spec{n, d, SmallProtocol::core_set_gc, 2, limit, ProcessId(1)};
            SmallAdversaryStream stream(spec);
            bool counted = false;
            while (auto* adv = stream.next()) {
                Execution ex(detail::small_config(n, t, faulty, d, Variant::unauthenticated), adv);
                if (!detail::core_set_preconditions(ex, windows, active, k, false)) break;
                if (!counted) ++rep.configurations, counted = true;
                const auto g = graded_consensus_core_set(ex, inputs, k, windows, active);
                ++rep.executions;
                detail::check_graded_lemmas(rep, faults, inputs, g, detail::describe_config(faulty, inputs));
            }
            if (counted) rep.absorb(stream.report());
        }
    }
    return rep;
}

/// Byzantine broadcast with an implicit committee for every certified set,
/// fault set of size at most t, and both alternating input vectors; each
/// instance is enumerated separately. Checks, per instance s: certified
/// honest processes agree; an honest certified sender is delivered; an
/// uncertified sender yields ⊥ everywhere; and the broadcaster, X-size,
/// uncertified-silence and unforgeability invariants.
inline OracleReport committee_oracle(int n, int t, int k, std::size_t limit = 1'000'000) {
    OracleReport rep;
    rep.name = "committee-broadcast n=" + std::to_string(n) + " k=" + std::to_string(k);
    const ValueDomain d{2};
    const std::vector<bool> active(static_cast<std::size_t>(n), true);
    std::vector<std::vector<Value>> input_sets(2, std::vector<Value>(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i) {
        input_sets[0][static_cast<std::size_t>(i)] = i % 2;
        input_sets[1][static_cast<std::size_t>(i)] = 1 - i % 2;
    }
    for (const auto& faulty : detail::small_fault_sets(n, t)) {
        const FaultSet faults(n, faulty);
        for (unsigned cmask = 0; cmask < (1u << n); ++cmask) {
            for (const auto& inputs : input_sets) {
                ++rep.configurations;
                for (int s = 1; s <= n; ++s) {
                    const ProcessId focus(s);
                    EnumerationSpec spec{n, d, SmallProtocol::committee_broadcast, k + 1, limit, focus};
                    SmallAdversaryStream stream(spec);
                    while (auto* adv = stream.next()) {
                        Execution ex(detail::small_config(n, t, faulty, d, Variant::authenticated), adv);
                        // Nominations by the t+1 smallest identifiers.
                        std::vector<CertificatePtr> cc(static_cast<std::size_t>(n));
                        for (int q = 0; q < n; ++q) {
                            if (!(cmask & (1u << q))) continue;
                            std::vector<Signature> sigs;
                            for (int w = 1; w <= t + 1; ++w) sigs.push_back(ex.sign(ProcessId(w), committee_content(ProcessId(q + 1))));
                            cc[static_cast<std::size_t>(q)] =
                                assemble_committee_certificate(ProcessId(q + 1), sigs, t, ex.require_signatures());
                        }
                        std::vector<CertificatePtr> faulty_cc(static_cast<std::size_t>(n));
                        for (ProcessId p : faulty) faulty_cc[p.index()] = cc[p.index()];
                        adv->set_certificates(faulty_cc);

                        BroadcastTrace trace;
                        const auto res = bb_with_implicit_committee(ex, inputs, k, cc, active, &trace);
                        ++rep.executions;
                        const std::string where = detail::describe_config(faulty, inputs) + " certified=" +
                                                  std::to_string(cmask) + " instance=" + std::to_string(s);
                        const bool sender_certified = cmask & (1u << (s - 1));
                        std::optional<std::optional<Value>> common;
                        for (ProcessId p : faults.honest_ids()) {
                            const auto& out = res[p.index()][focus.index()];
                            if (cmask & (1u << p.index())) {
                                if (!common) common = out;
                                else if (*common != out) rep.violation("committee agreement " + where);
                            }
                            if (!sender_certified && out) rep.violation("default without certificate " + where);
                            if (sender_certified && faults.honest(focus) && out != inputs[focus.index()])
                                rep.violation("validity with sender certificate " + where);
                        }
                        if (trace.max_x_size > 2) rep.violation("|X| > 2 " + where);
                        if (trace.max_honest_broadcasts > 2) rep.violation("honest broadcast more than twice " + where);
                        if (trace.uncertified_honest_senders > 0 || trace.messages_in_uncertified_instances > 0)
                            rep.violation("uncertified honest traffic " + where);
                        if (ex.require_signatures().forgeries_accepted() > 0) rep.violation("forgery accepted " + where);
                    }
                    rep.absorb(stream.report());
                }
            }
        }
    }
    return rep;
}

}  // namespace bapred
