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
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bapred/harness/scenario.hpp"

namespace bapred {

struct Verdict {
    std::string property;
    bool pass = true;
    std::string detail;  // counterexample when failing
};

struct VerdictSet {
    std::vector<Verdict> verdicts;

    bool all_pass() const {
        return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
    }
    const Verdict* find(std::string_view property) const {
        for (const auto& v : verdicts)
            if (v.property == property) return &v;
        return nullptr;
    }
    std::vector<const Verdict*> failures() const {
        std::vector<const Verdict*> out;
        for (const auto& v : verdicts)
            if (!v.pass) out.push_back(&v);
        return out;
    }
    void add(std::string property, bool pass, std::string detail = {}) {
        verdicts.push_back({std::move(property), pass, pass ? std::string{} : std::move(detail)});
    }
};

namespace detail {

inline std::optional<Value> unanimous_honest_input(const Scenario& s, const ExecutionResult& r) {
    const FaultSet faults(s.n, s.faulty);
    std::optional<Value> v;
    for (ProcessId p : faults.honest_ids()) {
        if (!v) v = r.inputs_used[p.index()];
        else if (*v != r.inputs_used[p.index()]) return std::nullopt;
    }
    return v;
}

inline void check_agreement(VerdictSet& out, const FaultSet& faults, const ExecutionResult& r) {
    std::optional<ProcessId> first;
    for (ProcessId p : faults.honest_ids()) {
        const auto& d = r.decisions[p.index()];
        if (!d) continue;
        if (!first) {
            first = p;
            continue;
        }
        if (*d != *r.decisions[first->index()]) {
            std::ostringstream os;
            os << to_string(*first) << " decided " << *r.decisions[first->index()] << ", " << to_string(p)
               << " decided " << *d;
            out.add("agreement", false, os.str());
            return;
        }
    }
    out.add("agreement", true);
}

inline void check_unanimity(VerdictSet& out, const FaultSet& faults, const ExecutionResult& r, Value v,
                            const char* property = "strong-unanimity") {
    for (ProcessId p : faults.honest_ids()) {
        const auto& d = r.decisions[p.index()];
        if (!d || *d != v) {
            std::ostringstream os;
            os << "all honest inputs are " << v << " but " << to_string(p) << " decided "
               << (d ? std::to_string(*d) : std::string("nothing"));
            out.add(property, false, os.str());
            return;
        }
    }
    out.add(property, true);
}

inline void check_termination(VerdictSet& out, const FaultSet& faults, const ExecutionResult& r, std::int64_t bound) {
    for (ProcessId p : faults.honest_ids()) {
        if (!r.decisions[p.index()] || r.return_rounds[p.index()] < 0) {
            out.add("termination", false, to_string(p) + " never returned");
            return;
        }
        if (r.return_rounds[p.index()] > bound) {
            out.add("termination", false,
                    to_string(p) + " returned in round " + std::to_string(r.return_rounds[p.index()]) +
                        " after the bound " + std::to_string(bound));
            return;
        }
    }
    out.add("termination", true);
}

/// Graded-consensus properties: unanimity gives (v, 1) everywhere; an honest
/// (v, 1) forces value v everywhere.
inline void check_graded(VerdictSet& out, const FaultSet& faults, const ExecutionResult& r, std::optional<Value> unanimous) {
    if (unanimous) {
        bool ok = true;
        std::string detail;
        for (ProcessId p : faults.honest_ids())
            if (ok && (r.decisions[p.index()] != unanimous || r.grades[p.index()] != 1)) {
                ok = false;
                detail = to_string(p) + " returned (" + std::to_string(r.decisions[p.index()].value_or(-1)) + ", " +
                         std::to_string(r.grades[p.index()]) + ") on unanimous input " + std::to_string(*unanimous);
            }
        out.add("gc-unanimity", ok, detail);
    }
    std::optional<ProcessId> committed;
    for (ProcessId p : faults.honest_ids())
        if (r.grades[p.index()] == 1) committed = p;
    bool ok = true;
    std::string detail;
    if (committed)
        for (ProcessId p : faults.honest_ids())
            if (ok && r.decisions[p.index()] != r.decisions[committed->index()]) {
                ok = false;
                detail = to_string(*committed) + " returned grade 1 for " +
                         std::to_string(*r.decisions[committed->index()]) + " but " + to_string(p) + " returned " +
                         std::to_string(r.decisions[p.index()].value_or(-1));
            }
    out.add("gc-coherence", ok, detail);
}

inline std::vector<Ordering> honest_orderings(const FaultSet& faults, const ExecutionResult& r) {
    std::vector<Ordering> out;
    for (ProcessId p : faults.honest_ids()) out.push_back(ordering(r.classifications[p.index()]));
    return out;
}

/// Leader-window oracles for one unauthenticated classification agreement
/// with bound k (valid when k >= k_A and the size condition holds): each
/// faulty process shows up in honest windows in at most two consecutive
/// phases, and some phase has only honest processes in every honest window.
inline void check_windows(VerdictSet& out, const FaultSet& faults, const ExecutionResult& r, int k) {
    const auto orders = honest_orderings(faults, r);
    const int phases = 2 * k + 1;
    bool churn_ok = true;
    std::string churn_detail;
    bool some_clean = false;
    std::vector<std::vector<int>> seen_in(static_cast<std::size_t>(faults.n()));
    for (int phase = 1; phase <= phases; ++phase) {
        const int first = (3 * k + 1) * (phase - 1) + 1;
        bool clean = true;
        std::vector<bool> here(static_cast<std::size_t>(faults.n()), false);
        for (const auto& o : orders)
            for (ProcessId q : o.window(first, first + 3 * k))
                if (faults.faulty(q)) {
                    clean = false;
                    here[q.index()] = true;
                }
        some_clean = some_clean || clean;
        for (ProcessId q : faults.faulty_ids())
            if (here[q.index()]) seen_in[q.index()].push_back(phase);
    }
    for (ProcessId q : faults.faulty_ids()) {
        const auto& ph = seen_in[q.index()];
        if (ph.size() > 2 || (ph.size() == 2 && ph[1] != ph[0] + 1)) {
            churn_ok = false;
            std::ostringstream os;
            os << "k=" << k << ": " << to_string(q) << " is in honest windows in phases";
            for (int x : ph) os << ' ' << x;
            churn_detail = os.str();
            break;
        }
    }
    const std::string suffix = "[k=" + std::to_string(k) + "]";
    out.add("window-churn" + suffix, churn_ok, churn_detail);
    out.add("all-honest-window-phase" + suffix, some_clean,
            "k=" + std::to_string(k) + ": every phase has a faulty process in some honest window");
}

inline void check_unauth_trace(VerdictSet& out, const UnauthClassBaTrace& tr, const std::string& where) {
    const int bad = tr.gc_violations + tr.conciliation_violations + tr.path_lemma_violations;
    std::ostringstream os;
    os << where << ": " << tr.gc_violations << " window-GC, " << tr.conciliation_violations << " conciliation and "
       << tr.path_lemma_violations << " path failures under satisfied preconditions";
    out.add("core-set-blocks" + where, bad == 0, os.str());
}

inline void check_auth_trace(VerdictSet& out, const FaultSet& faults, const AuthClassBaTrace& tr, int t, int k,
                             int k_a, const std::string& where) {
    const auto& bt = tr.broadcast;
    std::ostringstream os;
    bool ok = bt.max_x_size <= 2 && bt.max_honest_broadcasts <= 2 && bt.uncertified_honest_senders == 0 &&
              bt.messages_in_uncertified_instances == 0 && bt.relay_violations == 0 &&
              tr.uncertified_honest_plurality == 0;
    os << where << ": |X|max=" << bt.max_x_size << " broadcasts/instance max=" << bt.max_honest_broadcasts
       << " uncertified senders=" << bt.uncertified_honest_senders
       << " msgs in uncertified instances=" << bt.messages_in_uncertified_instances
       << " relay gaps=" << bt.relay_violations << " uncertified plurality=" << tr.uncertified_honest_plurality;
    out.add("broadcaster-budgets" + where, ok, os.str());

    if (k >= k_a && class_ba_auth_condition(faults.n(), t, k)) {
        int cf = 0;
        for (ProcessId p : tr.committee) cf += faults.faulty(p);
        const int c = static_cast<int>(tr.committee.size());
        const int ch = c - cf;
        std::ostringstream cs;
        cs << where << ": |C|=" << c << " |C∩F|=" << cf << " |C∩H|=" << ch << " with k=" << k;
        out.add("committee" + where, c <= 3 * k + 1 && cf <= k && ch >= k + 1, cs.str());
    }
}

}  // namespace detail

/// Checks every property that applies to this protocol and scenario.
inline VerdictSet verify_execution(const ExecutionResult& r, const Scenario& s) {
    VerdictSet out;
    const FaultSet faults(s.n, s.faulty);
    const auto unanimous = detail::unanimous_honest_input(s, r);

    if (r.misclassification) {
        const int f = faults.f();
        const int denom = (s.n + 1) / 2 - f;
        const int k_a = r.misclassification->k_a();
        if (denom > 0) {
            std::ostringstream os;
            os << "k_A=" << k_a << " exceeds B/(ceil(n/2)-f) = " << r.realized.total() << "/" << denom;
            out.add("classification-bound", static_cast<std::int64_t>(k_a) * denom <= r.realized.total(), os.str());
        }
        out.add("vote-bound", !r.vote_bound_offender,
                r.vote_bound_offender ? to_string(*r.vote_bound_offender) + " misclassified with too few wrong votes"
                                      : std::string{});
        const auto orders = detail::honest_orderings(faults, r);
        const auto bad = core_set_violation(orders, faults, s.t, k_a);
        out.add("core-set-witness", !bad,
                bad ? "window " + std::to_string(bad->first) + ".." + std::to_string(bad->second) +
                          " lacks a core set of size (width - k_A)"
                    : std::string{});
    }
    if (s.variant == Variant::authenticated)
        out.add("unforgeability", r.forgeries_accepted == 0,
                std::to_string(r.forgeries_accepted) + " forged honest signatures accepted");

    const int k_a = r.misclassification ? r.misclassification->k_a() : 0;
    switch (s.protocol) {
        case ProtocolKind::ba_with_predictions: {
            detail::check_agreement(out, faults, r);
            if (unanimous) detail::check_unanimity(out, faults, r, *unanimous);
            detail::check_termination(out, faults, r, r.wrapper->rounds_through(r.wrapper->phase_count));
            // A decision in phase φ means everyone has returned by phase min(φ+2, last).
            int first_decision = 0;
            for (const auto& ph : r.phases)
                if (!first_decision && !ph.decided.empty()) first_decision = ph.phase;
            if (first_decision) {
                const int by = std::min(first_decision + 2, r.wrapper->phase_count);
                int last_return = 0;
                for (const auto& ph : r.phases)
                    if (!ph.returned.empty()) last_return = ph.phase;
                out.add("return-window", last_return <= by,
                        "first decision in phase " + std::to_string(first_decision) + " but returns continue to phase " +
                            std::to_string(last_return));
            }
            for (const auto& ph : r.phases) {
                const std::string where = "[phase " + std::to_string(ph.phase) + "]";
                if (ph.unauth) {
                    detail::check_unauth_trace(out, *ph.unauth, where);
                    if (ph.k >= k_a && class_ba_unauth_condition(s.n, s.t, ph.k))
                        detail::check_windows(out, faults, r, ph.k);
                }
                if (ph.auth) detail::check_auth_trace(out, faults, *ph.auth, s.t, ph.k, k_a, where);
            }
            break;
        }
        case ProtocolKind::classification_ba: {
            if (r.preconditions) {
                detail::check_agreement(out, faults, r);
                if (unanimous) detail::check_unanimity(out, faults, r, *unanimous);
            }
            const std::int64_t rounds =
                s.variant == Variant::unauthenticated ? std::min(r.T, class_ba_unauth_rounds(r.k)) : class_ba_auth_rounds(r.k);
            detail::check_termination(out, faults, r, r.setup_rounds + rounds);
            if (r.unauth) {
                detail::check_unauth_trace(out, *r.unauth, "");
                if (r.preconditions) detail::check_windows(out, faults, r, r.k);
            }
            if (r.auth) detail::check_auth_trace(out, faults, *r.auth, s.t, r.k, k_a, "");
            break;
        }
        case ProtocolKind::graded_consensus: detail::check_graded(out, faults, r, unanimous); break;
        case ProtocolKind::core_set_gc:
            if (r.preconditions) detail::check_graded(out, faults, r, unanimous);
            break;
        case ProtocolKind::conciliation:
            if (r.preconditions) {
                detail::check_agreement(out, faults, r);
                if (unanimous) detail::check_unanimity(out, faults, r, *unanimous, "validity");
                out.add("path-lemma", r.conciliation.path_lemma_violations == 0,
                        std::to_string(r.conciliation.path_lemma_violations) + " receivers saw outside sources");
            }
            break;
        case ProtocolKind::early_stopping:
            if (r.preconditions) {
                detail::check_agreement(out, faults, r);
                if (unanimous) detail::check_unanimity(out, faults, r, *unanimous);
            }
            detail::check_termination(out, faults, r, r.T);
            break;
    }
    return out;
}

}  // namespace bapred
