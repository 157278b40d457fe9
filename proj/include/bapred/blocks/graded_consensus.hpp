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
#include <unordered_map>
#include <vector>

#include "bapred/blocks/plurality.hpp"
#include "bapred/sim/engine.hpp"

namespace bapred {

struct GradedOutput {
    Value value = 0;
    int grade = 0;

    bool operator==(const GradedOutput&) const = default;
};

/// Processes whose code runs in the next step: honest ones that have not
/// returned, and every faulty process (its shadow feeds the adversary).
inline std::vector<bool> running_processes(const Execution& ex) {
    std::vector<bool> active(static_cast<std::size_t>(ex.n()), true);
    for (ProcessId p : ex.faults().honest_ids()) active[p.index()] = !ex.returned(p);
    return active;
}

inline int graded_consensus_rounds(Variant v) { return v == Variant::unauthenticated ? 2 : 4; }

/// Upper bound on honest messages of one n-wide graded consensus.
inline std::int64_t graded_consensus_messages(Variant v, int n) {
    return static_cast<std::int64_t>(graded_consensus_rounds(v)) * n * (n - 1);
}

/// Signed content of an authenticated graded-consensus vote or echo, bound
/// to its instance so signatures cannot be replayed across instances.
inline Digest gc_signed_content(GcStep step, std::int64_t instance, Value v) {
    return CanonicalEncoder().text(step == GcStep::vote ? "GC-VOTE" : "GC-ECHO").integer(instance).integer(v).finish();
}

namespace detail {

inline std::vector<GradedOutput> gc_unauthenticated(Execution& ex, ProtocolTag tag, const std::vector<Value>& inputs,
                                                    const std::vector<bool>& active) {
    const int n = ex.n();
    const int t = ex.t();
    auto out = ex.outboxes();
    ex.context().steps = 2;

    ex.context().step = 1;
    for (int i = 0; i < n; ++i)
        if (active[static_cast<std::size_t>(i)])
            out[static_cast<std::size_t>(i)].broadcast(make_payload(ValueMsg{inputs[static_cast<std::size_t>(i)]}));
    auto in = ex.exchange(tag, out);

    std::vector<std::optional<Value>> echo(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        SenderTally tally(n);
        for (const auto& d : in[static_cast<std::size_t>(i)])
            if (const auto* m = d.as<ValueMsg>(); m && ex.domain().contains(m->value)) tally.add(d.sender, m->value);
        echo[static_cast<std::size_t>(i)] = tally.smallest_with_at_least(n - t);
    }

    ex.context().step = 2;
    out = ex.outboxes();
    for (int i = 0; i < n; ++i)
        if (active[static_cast<std::size_t>(i)] && echo[static_cast<std::size_t>(i)])
            out[static_cast<std::size_t>(i)].broadcast(make_payload(ValueMsg{*echo[static_cast<std::size_t>(i)]}));
    in = ex.exchange(tag, out);

    std::vector<GradedOutput> result(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        SenderTally tally(n);
        for (const auto& d : in[static_cast<std::size_t>(i)])
            if (const auto* m = d.as<ValueMsg>(); m && ex.domain().contains(m->value)) tally.add(d.sender, m->value);
        if (auto v = tally.smallest_with_at_least(n - t)) result[static_cast<std::size_t>(i)] = {*v, 1};
        else if (auto w = tally.smallest_with_at_least(t + 1)) result[static_cast<std::size_t>(i)] = {*w, 0};
        else result[static_cast<std::size_t>(i)] = {inputs[static_cast<std::size_t>(i)], 0};
    }
    return result;
}

/// Per-instance content digests, memoized by value.
class GcContents {
 public:
    explicit GcContents(std::int64_t instance) : instance_(instance) {}

    const Digest& vote(Value v) { return get(votes_, GcStep::vote, v); }
    const Digest& echo(Value v) { return get(echoes_, GcStep::echo, v); }
    const Digest& of(GcStep step, Value v) { return step == GcStep::vote ? vote(v) : echo(v); }

 private:
    const Digest& get(std::map<Value, Digest>& cache, GcStep step, Value v) {
        auto it = cache.find(v);
        if (it == cache.end()) it = cache.emplace(v, gc_signed_content(step, instance_, v)).first;
        return it->second;
    }

    std::int64_t instance_;
    std::map<Value, Digest> votes_;
    std::map<Value, Digest> echoes_;
};

/// Four rounds, t < n/2:
///   1. broadcast a signed vote;
///   2. relay every vote received directly in round 1;
///   3. broadcast a signed echo for v if at least n-t senders voted v to us
///      directly and no relay shows them voting anything else;
///   4. broadcast t+1 echo signatures for a value if we hold that many.
/// Grade 1 on n-t echoes, grade 0 on any (t+1)-echo proof.
inline std::vector<GradedOutput> gc_authenticated(Execution& ex, ProtocolTag tag, const std::vector<Value>& inputs,
                                                  const std::vector<bool>& active) {
    const int n = ex.n();
    const int t = ex.t();
    SignatureService& svc = ex.require_signatures();
    const std::int64_t instance = ex.next_instance();
    GcContents contents(instance);
    ex.context().instance = instance;
    ex.context().steps = 4;
    const auto idx = [](int i) { return static_cast<std::size_t>(i); };

    auto valid_signed = [&](const SignedValueMsg& m, GcStep step, ProcessId signer) {
        return m.step == step && m.instance == instance && ex.domain().contains(m.value) &&
               svc.verify(m.sig, signer, contents.of(step, m.value));
    };

    // Round 1: signed votes.
    ex.context().step = 1;
    auto out = ex.outboxes();
    for (int i = 0; i < n; ++i) {
        if (!active[idx(i)]) continue;
        const Value v = inputs[idx(i)];
        const Signature sig = ex.sign(ProcessId(i + 1), contents.vote(v));
        out[idx(i)].broadcast(make_payload(SignedValueMsg{GcStep::vote, instance, v, sig}));
    }
    auto in = ex.exchange(tag, out);

    // direct[i][q]: up to two distinct values q voted to i, smallest first.
    std::vector<std::vector<std::vector<SignedValueMsg>>> direct(idx(n), std::vector<std::vector<SignedValueMsg>>(idx(n)));
    for (int i = 0; i < n; ++i) {
        for (const auto& d : in[idx(i)]) {
            const auto* m = d.as<SignedValueMsg>();
            if (!m || !valid_signed(*m, GcStep::vote, d.sender)) continue;
            auto& slot = direct[idx(i)][d.sender.index()];
            if (std::any_of(slot.begin(), slot.end(), [&](const SignedValueMsg& s) { return s.value == m->value; }))
                continue;
            slot.push_back(*m);
            std::sort(slot.begin(), slot.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
            if (slot.size() > 2) slot.pop_back();
        }
    }

    // Round 2: relay direct votes.
    ex.context().step = 2;
    out = ex.outboxes();
    for (int i = 0; i < n; ++i) {
        if (!active[idx(i)]) continue;
        VoteBundleMsg bundle;
        for (const auto& slot : direct[idx(i)]) bundle.votes.insert(bundle.votes.end(), slot.begin(), slot.end());
        out[idx(i)].broadcast(make_payload(std::move(bundle)));
    }
    in = ex.exchange(tag, out);

    // Valid relayed votes, checked once per bundle object: bundle -> (signer, value) pairs.
    std::unordered_map<const Payload*, std::vector<std::pair<ProcessId, Value>>> bundle_cache;
    auto relayed_votes = [&](const Delivered& d) -> const std::vector<std::pair<ProcessId, Value>>& {
        auto it = bundle_cache.find(d.payload.get());
        if (it != bundle_cache.end()) return it->second;
        std::vector<std::pair<ProcessId, Value>> pairs;
        if (const auto* b = d.as<VoteBundleMsg>()) {
            for (const auto& m : b->votes)
                if (m.sig.signer.valid_for(n) && valid_signed(m, GcStep::vote, m.sig.signer))
                    pairs.emplace_back(m.sig.signer, m.value);
        }
        return bundle_cache.emplace(d.payload.get(), std::move(pairs)).first->second;
    };

    std::vector<std::optional<Value>> echo(idx(n));
    for (int i = 0; i < n; ++i) {
        // First value seen per signer and whether a second one appeared.
        std::vector<std::optional<Value>> first(idx(n));
        std::vector<bool> equivocates(idx(n), false);
        auto note = [&](ProcessId q, Value v) {
            auto& f = first[q.index()];
            if (!f) f = v;
            else if (*f != v) equivocates[q.index()] = true;
        };
        for (int q = 0; q < n; ++q)
            for (const auto& m : direct[idx(i)][idx(q)]) note(ProcessId(q + 1), m.value);
        for (const auto& d : in[idx(i)])
            for (const auto& [q, v] : relayed_votes(d)) note(q, v);

        std::map<Value, int> support;
        for (int q = 0; q < n; ++q) {
            if (equivocates[idx(q)]) continue;
            for (const auto& m : direct[idx(i)][idx(q)]) ++support[m.value];
        }
        for (const auto& [v, c] : support) {
            if (c >= n - t) {
                echo[idx(i)] = v;
                break;
            }
        }
    }

    // Round 3: signed echoes.
    ex.context().step = 3;
    out = ex.outboxes();
    for (int i = 0; i < n; ++i) {
        if (!active[idx(i)] || !echo[idx(i)]) continue;
        const Value w = *echo[idx(i)];
        const Signature sig = ex.sign(ProcessId(i + 1), contents.echo(w));
        out[idx(i)].broadcast(make_payload(SignedValueMsg{GcStep::echo, instance, w, sig}));
    }
    in = ex.exchange(tag, out);

    // echo_sigs[i][value]: one valid echo signature per distinct signer.
    std::vector<std::map<Value, std::map<ProcessId, Signature>>> echo_sigs(idx(n));
    for (int i = 0; i < n; ++i) {
        for (const auto& d : in[idx(i)]) {
            const auto* m = d.as<SignedValueMsg>();
            if (!m || !valid_signed(*m, GcStep::echo, d.sender)) continue;
            echo_sigs[idx(i)][m->value].emplace(d.sender, m->sig);
        }
    }

    auto proof_value = [&](int i) -> std::optional<Value> {
        for (const auto& [v, sigs] : echo_sigs[idx(i)])
            if (static_cast<int>(sigs.size()) >= t + 1) return v;
        return std::nullopt;
    };

    // Round 4: relay a (t+1)-echo proof.
    ex.context().step = 4;
    out = ex.outboxes();
    for (int i = 0; i < n; ++i) {
        if (!active[idx(i)]) continue;
        const auto u = proof_value(i);
        if (!u) continue;
        EchoProofMsg proof{instance, *u, {}};
        for (const auto& [signer, sig] : echo_sigs[idx(i)][*u]) {
            proof.sigs.push_back(sig);
            if (static_cast<int>(proof.sigs.size()) == t + 1) break;
        }
        out[idx(i)].broadcast(make_payload(std::move(proof)));
    }
    in = ex.exchange(tag, out);

    std::unordered_map<const Payload*, std::optional<Value>> proof_cache;
    auto proven = [&](const Delivered& d) -> std::optional<Value> {
        auto it = proof_cache.find(d.payload.get());
        if (it != proof_cache.end()) return it->second;
        std::optional<Value> result;
        if (const auto* p = d.as<EchoProofMsg>(); p && p->instance == instance && ex.domain().contains(p->value)) {
            std::vector<ProcessId> signers;
            for (const auto& s : p->sigs)
                if (s.signer.valid_for(n) && svc.verify(s, s.signer, contents.echo(p->value))) signers.push_back(s.signer);
            std::sort(signers.begin(), signers.end());
            signers.erase(std::unique(signers.begin(), signers.end()), signers.end());
            if (static_cast<int>(signers.size()) >= t + 1) result = p->value;
        }
        proof_cache.emplace(d.payload.get(), result);
        return result;
    };

    std::vector<GradedOutput> result(idx(n));
    for (int i = 0; i < n; ++i) {
        std::optional<GradedOutput> best;
        for (const auto& [v, sigs] : echo_sigs[idx(i)]) {
            if (static_cast<int>(sigs.size()) >= n - t) {
                best = GradedOutput{v, 1};
                break;
            }
        }
        if (!best) {
            std::optional<Value> u = proof_value(i);
            for (const auto& d : in[idx(i)])
                if (auto p = proven(d); p && (!u || *p < *u)) u = p;
            best = u ? GradedOutput{*u, 0} : GradedOutput{inputs[idx(i)], 0};
        }
        result[idx(i)] = *best;
    }
    return result;
}

}  // namespace detail

/// n-wide graded consensus: unanimity gives every honest process grade 1,
/// and any honest grade-1 output forces every honest output to that value.
/// Unauthenticated (t < n/3, 2 rounds): broadcast, echo values seen n-t
/// times, grade by echo counts. Authenticated (t < n/2, 4 rounds): see
/// detail::gc_authenticated.
inline std::vector<GradedOutput> graded_consensus(Execution& ex, ProtocolTag tag, const std::vector<Value>& inputs,
                                                  const std::vector<bool>& active) {
    if (ex.variant() == Variant::unauthenticated) return detail::gc_unauthenticated(ex, tag, inputs, active);
    return detail::gc_authenticated(ex, tag, inputs, active);
}

inline std::vector<GradedOutput> graded_consensus(Execution& ex, ProtocolTag tag, const std::vector<Value>& inputs) {
    return graded_consensus(ex, tag, inputs, running_processes(ex));
}

/// Membership matrix for per-process leader windows.
class WindowSet {
 public:
    explicit WindowSet(std::vector<std::vector<ProcessId>> windows)
        : windows_(std::move(windows)), member_(windows_.size() * windows_.size(), false) {
        const std::size_t n = windows_.size();
        for (std::size_t i = 0; i < n; ++i) {
            std::sort(windows_[i].begin(), windows_[i].end());
            for (ProcessId p : windows_[i])
                if (p.index() < n) member_[i * n + p.index()] = true;
        }
    }

    /// Whether q is in the window of process i.
    bool contains(ProcessId i, ProcessId q) const { return member_[i.index() * windows_.size() + q.index()]; }
    const std::vector<ProcessId>& of(ProcessId i) const { return windows_[i.index()]; }
    std::size_t size() const { return windows_.size(); }

 private:
    std::vector<std::vector<ProcessId>> windows_;
    std::vector<bool> member_;
};

/// Window-scoped graded consensus (two rounds). Only window members
/// broadcast, and each process listens only to members of its own window.
inline std::vector<GradedOutput> graded_consensus_core_set(Execution& ex, const std::vector<Value>& inputs, int k,
                                                           const WindowSet& windows, const std::vector<bool>& active) {
    const int n = ex.n();
    const auto idx = [](int i) { return static_cast<std::size_t>(i); };
    ex.context().steps = 2;

    auto tally_window = [&](const Inbox& inbox, ProcessId self) {
        SenderTally tally(n);
        for (const auto& d : inbox) {
            if (!windows.contains(self, d.sender)) continue;
            if (const auto* m = d.as<ValueMsg>(); m && ex.domain().contains(m->value)) tally.add(d.sender, m->value);
        }
        return tally;
    };

    ex.context().step = 1;
    auto out = ex.outboxes();
    for (int i = 0; i < n; ++i) {
        const ProcessId p(i + 1);
        if (active[idx(i)] && windows.contains(p, p)) out[idx(i)].broadcast(make_payload(ValueMsg{inputs[idx(i)]}));
    }
    auto in = ex.exchange(ProtocolTag::core_gc, out);

    std::vector<std::optional<Value>> b(idx(n));
    for (int i = 0; i < n; ++i) b[idx(i)] = tally_window(in[idx(i)], ProcessId(i + 1)).smallest_with_at_least(2 * k + 1);

    ex.context().step = 2;
    out = ex.outboxes();
    for (int i = 0; i < n; ++i) {
        const ProcessId p(i + 1);
        if (active[idx(i)] && windows.contains(p, p) && b[idx(i)])
            out[idx(i)].broadcast(make_payload(ValueMsg{*b[idx(i)]}));
    }
    in = ex.exchange(ProtocolTag::core_gc, out);

    std::vector<GradedOutput> result(idx(n));
    for (int i = 0; i < n; ++i) {
        const SenderTally tally = tally_window(in[idx(i)], ProcessId(i + 1));
        if (b[idx(i)]) {
            result[idx(i)] = {*b[idx(i)], tally.count(*b[idx(i)]) >= 2 * k + 1 ? 1 : 0};
        } else if (auto v = tally.smallest_with_at_least(k + 1)) {
            result[idx(i)] = {*v, 0};
        } else {
            result[idx(i)] = {inputs[idx(i)], 0};
        }
    }
    return result;
}

}  // namespace bapred
