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
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bapred/auth/certificate.hpp"
#include "bapred/auth/chain.hpp"
#include "bapred/blocks/graded_consensus.hpp"
#include "bapred/predictions.hpp"
#include "bapred/sim/engine.hpp"

namespace bapred {

/// Strategy identifier plus integer parameters, as read from scenario files.
struct AdversarySpec {
    std::string name = "none";
    std::map<std::string, std::int64_t> params;

    std::int64_t param(const std::string& key, std::int64_t fallback) const {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    }
    bool operator==(const AdversarySpec&) const = default;
};

struct StrategyInfo {
    std::string name;
    std::string summary;
    bool authenticated_only = false;
};

inline const std::vector<StrategyInfo>& strategy_catalog() {
    static const std::vector<StrategyInfo> catalog = {
        {"none", "faulty processes follow the protocol", false},
        {"silent", "faulty processes never send", false},
        {"crash", "follow the protocol, then stop sending from round `round` on (default 3)", false},
        {"equivocator", "a different value to each honest receiver in every value-carrying step", false},
        {"vote-poisoner",
         "classification round: the complement of the true classification (`tailored`=1: a different "
         "misleading vector per receiver); equivocates afterwards",
         false},
        {"chain-withholder",
         "certified faulty senders build a chain for a second value and reveal it to one honest process "
         "at the last round it can still be accepted",
         true},
        {"certificate-hoarder",
         "gathers committee certificates, sends no chains, then announces per-receiver pluralities with them",
         true},
        {"selective-ignorer",
         "ignores the first floor(t/2) messages it receives, starts from input 0 and votes the complement "
         "classification; otherwise follows the protocol",
         false},
        {"forgery", "equivocates and attaches fabricated signatures of honest processes to votes, proofs, "
                    "certificates and chains",
         false},
        {"split-brain",
         "complement predictions; one half of the honest processes hears the majority value and the other "
         "half hears nothing in graded consensus and the minority value from leaders",
         false},
    };
    return catalog;
}

namespace detail {

/// Position of `r` among the honest processes, ascending by id.
inline int honest_rank(const FaultSet& faults, ProcessId r) {
    const auto& h = faults.honest_ids();
    return static_cast<int>(std::lower_bound(h.begin(), h.end(), r) - h.begin());
}

/// Shared moves used by several strategies.
class StrategyBase : public Adversary {
 public:
    explicit StrategyBase(const AdversarySpec& spec) : salt_(spec.param("salt", 0)) {}

 protected:
    /// The value shown to honest receiver r: halves of the honest processes
    /// (by rank) see different values.
    Value split_value(const AdversaryToolkit& tk, ProcessId r) const {
        const Value d = tk.domain().size;
        return static_cast<Value>((detail::honest_rank(tk.faults(), r) + salt_) % d);
    }

    static PredictionVector complement_prediction(const FaultSet& faults) {
        std::vector<bool> bits = correct_classification(faults).bits();
        bits.flip();
        return PredictionVector(std::move(bits));
    }

    /// The same payload carrying value v instead, re-signed under p's key
    /// where needed; nullptr when the payload cannot be retargeted.
    static PayloadPtr retarget(AdversaryToolkit& tk, ProcessId p, const Payload& payload, Value v) {
        if (const auto* m = std::get_if<ValueMsg>(&payload)) {
            (void)m;
            return make_payload(ValueMsg{v});
        }
        if (const auto* m = std::get_if<ConciliationMsg>(&payload)) return make_payload(ConciliationMsg{v, m->window});
        if (const auto* m = std::get_if<SignedValueMsg>(&payload)) {
            if (m->sig.signer != p || !tk.signatures()) return nullptr;
            const Signature sig = tk.sign(p, gc_signed_content(m->step, m->instance, v));
            return make_payload(SignedValueMsg{m->step, m->instance, v, sig});
        }
        if (const auto* m = std::get_if<ChainMsg>(&payload)) {
            if (!m->chain || m->chain->length() != 1 || m->chain->signer() != p) return nullptr;
            auto chain = ChainNode::sign_link(nullptr, v, m->chain->certificate(),
                                              [&](const Digest& d) { return tk.sign(p, d); });
            return make_payload(ChainMsg{m->instance, std::move(chain)});
        }
        if (const auto* m = std::get_if<PluralityMsg>(&payload)) return make_payload(PluralityMsg{v, m->cert});
        return nullptr;
    }

    /// Sends p's protocol traffic, but with a per-receiver value wherever the
    /// payload has one. Steps where the honest code of p is silent still get
    /// a per-receiver message when one can be built.
    void equivocate(AdversaryToolkit& tk, ProcessId p) {
        const Outbox& shadow = tk.shadow(p);
        Outbox& out = tk.out(p);
        if (shadow.empty()) {
            spontaneous(tk, p);
            return;
        }
        for (const auto& e : shadow.entries()) {
            for (ProcessId r : tk.faults().honest_ids()) {
                if (e.receiver && *e.receiver != r) continue;
                PayloadPtr alt = retarget(tk, p, *e.payload, split_value(tk, r));
                out.send(r, alt ? alt : e.payload);
            }
            for (ProcessId r : tk.faults().faulty_ids())
                if (!e.receiver || *e.receiver == r) out.send(r, e.payload);
        }
    }

    void equivocate_all(AdversaryToolkit& tk) {
        for (ProcessId p : tk.faults().faulty_ids()) equivocate(tk, p);
    }

    /// Per-receiver messages in a step where p's own code sends nothing.
    void spontaneous(AdversaryToolkit& tk, ProcessId p) {
        Outbox& out = tk.out(p);
        const ProtocolTag tag = tk.tag();
        const auto& ctx = tk.context();
        const bool signed_gc = tk.signatures() && (tag == ProtocolTag::wrapper_gc || tag == ProtocolTag::early_gc);
        for (ProcessId r : tk.faults().honest_ids()) {
            const Value v = split_value(tk, r);
            switch (tag) {
                case ProtocolTag::wrapper_gc:
                case ProtocolTag::early_gc:
                    if (!signed_gc) {
                        out.send(r, make_payload(ValueMsg{v}));
                    } else if (ctx.step == 1 || ctx.step == 3) {
                        const GcStep step = ctx.step == 1 ? GcStep::vote : GcStep::echo;
                        out.send(r, make_payload(SignedValueMsg{step, ctx.instance, v,
                                                                tk.sign(p, gc_signed_content(step, ctx.instance, v))}));
                    }
                    break;
                case ProtocolTag::early_king:
                case ProtocolTag::core_gc: out.send(r, make_payload(ValueMsg{v})); break;
                case ProtocolTag::conciliate:
                    if (auto w = self_window(tk, p)) out.send(r, make_payload(ConciliationMsg{v, *w}));
                    break;
                default: break;
            }
        }
    }

    /// A window of the current size that contains p, copied from honest
    /// conciliation traffic with p swapped in.
    static std::optional<std::vector<ProcessId>> self_window(const AdversaryToolkit& tk, ProcessId p) {
        for (ProcessId h : tk.faults().honest_ids()) {
            for (const auto& e : tk.shadow(h).entries()) {
                const auto* m = std::get_if<ConciliationMsg>(e.payload.get());
                if (!m || m->window.empty()) continue;
                std::vector<ProcessId> w = m->window;
                if (!std::binary_search(w.begin(), w.end(), p)) {
                    w.back() = p;
                    std::sort(w.begin(), w.end());
                }
                return w;
            }
        }
        return std::nullopt;
    }

    /// Committee round: follow the protocol and additionally have every faulty
    /// process nominate every other one, then remember which faulty processes
    /// end up with a certificate (honest nominations observed plus faulty
    /// signatures).
    void gather_certificates(AdversaryToolkit& tk) {
        tk.follow_protocol_all();
        const auto& faulty = tk.faults().faulty_ids();
        std::map<ProcessId, std::vector<Signature>> votes;
        for (ProcessId h : tk.faults().honest_ids())
            for (const auto& e : tk.shadow(h).entries())
                if (const auto* m = std::get_if<CommitteeVoteMsg>(e.payload.get()); m && e.receiver)
                    if (tk.faults().faulty(*e.receiver)) votes[*e.receiver].push_back(m->sig);
        for (ProcessId p : faulty) {
            for (ProcessId q : faulty) {
                const Signature s = tk.sign(q, committee_content(p));
                votes[p].push_back(s);
                if (q != p) tk.out(q).send(p, make_payload(CommitteeVoteMsg{s}));
            }
        }
        certs_.clear();
        for (ProcessId p : faulty)
            if (auto cc = assemble_committee_certificate(p, votes[p], tk.t(), *tk.signatures())) certs_[p] = cc;
    }

    std::int64_t salt_;
    std::map<ProcessId, CertificatePtr> certs_;
};

}  // namespace detail

class SilentAdversary final : public Adversary {
 public:
    std::string name() const override { return "silent"; }
    void act(AdversaryToolkit&) override {}
};

class FollowAdversary final : public Adversary {
 public:
    std::string name() const override { return "none"; }
    void act(AdversaryToolkit& tk) override { tk.follow_protocol_all(); }
};

class CrashAdversary final : public Adversary {
 public:
    explicit CrashAdversary(const AdversarySpec& spec) : crash_round_(spec.param("round", 3)) {}
    std::string name() const override { return "crash"; }
    void act(AdversaryToolkit& tk) override {
        if (tk.round() < crash_round_) tk.follow_protocol_all();
    }

 private:
    std::int64_t crash_round_;
};

class EquivocatorAdversary final : public detail::StrategyBase {
 public:
    using StrategyBase::StrategyBase;
    std::string name() const override { return "equivocator"; }
    void act(AdversaryToolkit& tk) override {
        if (tk.tag() == ProtocolTag::classify) tk.follow_protocol_all();
        else equivocate_all(tk);
    }
};

class VotePoisonerAdversary final : public detail::StrategyBase {
 public:
    explicit VotePoisonerAdversary(const AdversarySpec& spec)
        : StrategyBase(spec), tailored_(spec.param("tailored", 0) != 0) {}
    std::string name() const override { return "vote-poisoner"; }

    void act(AdversaryToolkit& tk) override {
        if (tk.tag() != ProtocolTag::classify) {
            equivocate_all(tk);
            return;
        }
        const FaultSet& faults = tk.faults();
        if (!tailored_) {
            auto msg = make_payload(PredictionMsg{complement_prediction(faults)});
            for (ProcessId p : faults.faulty_ids()) tk.out(p).broadcast(msg);
            return;
        }
        // Each receiver is told every faulty process is honest and a
        // receiver-specific half of the honest processes is faulty.
        for (ProcessId r : faults.honest_ids()) {
            std::vector<bool> bits(static_cast<std::size_t>(tk.n()), false);
            const int rank = detail::honest_rank(faults, r);
            for (ProcessId q : faults.faulty_ids()) bits[q.index()] = true;
            for (ProcessId q : faults.honest_ids()) bits[q.index()] = (detail::honest_rank(faults, q) + rank) % 2 == 1;
            auto msg = make_payload(PredictionMsg{PredictionVector(std::move(bits))});
            for (ProcessId p : faults.faulty_ids()) tk.out(p).send(r, msg);
        }
    }

 private:
    bool tailored_;
};

class SelectiveIgnorerAdversary final : public detail::StrategyBase {
 public:
    using StrategyBase::StrategyBase;
    std::string name() const override { return "selective-ignorer"; }

    void act(AdversaryToolkit& tk) override {
        if (ignore_ < 0) ignore_ = tk.t() / 2;
        if (tk.tag() == ProtocolTag::classify) {
            auto msg = make_payload(PredictionMsg{complement_prediction(tk.faults())});
            for (ProcessId p : tk.faults().faulty_ids()) tk.out(p).broadcast(msg);
            return;
        }
        tk.follow_protocol_all();
    }

    void filter_inbox(ProcessId p, Inbox& inbox, int) override {
        auto& dropped = dropped_[p];
        const std::int64_t limit = std::max<std::int64_t>(ignore_, 0);
        if (dropped >= limit) return;
        const auto take = std::min<std::int64_t>(limit - dropped, static_cast<std::int64_t>(inbox.size()));
        inbox.erase(inbox.begin(), inbox.begin() + take);
        dropped += take;
    }

    Value faulty_input(ProcessId, Value) override { return 0; }

 private:
    std::int64_t ignore_ = -1;
    std::map<ProcessId, std::int64_t> dropped_;
};

/// Certified faulty senders of an implicit-committee broadcast send x to
/// everyone, then grow a chain for a second value through further certified
/// faulty processes and hand it to a single honest process at the last round
/// in which its length is still acceptable.
class ChainWithholderAdversary final : public detail::StrategyBase {
 public:
    using StrategyBase::StrategyBase;
    std::string name() const override { return "chain-withholder"; }

    void act(AdversaryToolkit& tk) override {
        switch (tk.tag()) {
            case ProtocolTag::classify:
            case ProtocolTag::plurality: tk.follow_protocol_all(); return;
            case ProtocolTag::committee_vote:
                if (tk.signatures()) gather_certificates(tk);
                else tk.follow_protocol_all();
                held_.clear();
                return;
            case ProtocolTag::bb_chain: withhold(tk); return;
            default: equivocate_all(tk); return;
        }
    }

 private:
    struct Held {
        ChainPtr chain;
        std::vector<ProcessId> relays;  // certified faulty signers after the sender
        int reveal_round = 1;
    };

    void withhold(AdversaryToolkit& tk) {
        tk.follow_protocol_all();
        const int step = tk.context().step;
        const int rounds = tk.context().steps;
        if (step == 1) {
            for (const auto& [s, cc] : certs_) {
                const Value x = first_value_of(tk, s).value_or(0);
                const Value y = (x + 1) % tk.domain().size;
                Held h;
                h.chain = ChainNode::sign_link(nullptr, y, cc, [&](const Digest& d) { return tk.sign(s, d); });
                for (const auto& [q, qc] : certs_)
                    if (q != s) h.relays.push_back(q);
                h.reveal_round = std::min<int>(rounds, 1 + static_cast<int>(h.relays.size()));
                held_.emplace(s, std::move(h));
            }
        }
        const ProcessId target = reveal_target(tk);
        for (auto& [s, h] : held_) {
            if (step > h.reveal_round) continue;
            ProcessId signer = s;
            if (step > 1) {
                signer = h.relays[static_cast<std::size_t>(step - 2)];
                h.chain = ChainNode::sign_link(h.chain, h.chain->value(), certs_.at(signer),
                                               [&](const Digest& d) { return tk.sign(signer, d); });
            }
            if (step == h.reveal_round) tk.out(signer).send(target, make_payload(ChainMsg{s, h.chain}));
        }
    }

    static std::optional<Value> first_value_of(const AdversaryToolkit& tk, ProcessId s) {
        for (const auto& e : tk.shadow(s).entries())
            if (const auto* m = std::get_if<ChainMsg>(e.payload.get()); m && m->instance == s && m->chain)
                return m->chain->value();
        return std::nullopt;
    }

    /// The lowest honest process that relays chains (holds a certificate),
    /// judged from honest round-1 traffic; the lowest honest one otherwise.
    static ProcessId reveal_target(const AdversaryToolkit& tk) {
        for (ProcessId h : tk.faults().honest_ids())
            for (const auto& e : tk.shadow(h).entries())
                if (std::holds_alternative<ChainMsg>(*e.payload)) return h;
        return tk.faults().honest_ids().front();
    }

    std::map<ProcessId, Held> held_;
};

/// Collects committee certificates for faulty processes, never relays a
/// chain, and only uses the certificates in the final plurality round.
class CertificateHoarderAdversary final : public detail::StrategyBase {
 public:
    using StrategyBase::StrategyBase;
    std::string name() const override { return "certificate-hoarder"; }

    void act(AdversaryToolkit& tk) override {
        switch (tk.tag()) {
            case ProtocolTag::committee_vote:
                if (tk.signatures()) gather_certificates(tk);
                else tk.follow_protocol_all();
                return;
            case ProtocolTag::bb_chain: return;
            case ProtocolTag::plurality:
                for (const auto& [p, cc] : certs_)
                    for (ProcessId r : tk.faults().honest_ids())
                        tk.out(p).send(r, make_payload(PluralityMsg{split_value(tk, r), cc}));
                return;
            default: tk.follow_protocol_all(); return;
        }
    }
};

/// Equivocates and, wherever signatures matter, injects artifacts that claim
/// honest signers: copied tokens on altered content and random tokens.
class ForgeryAdversary final : public detail::StrategyBase {
 public:
    using StrategyBase::StrategyBase;
    std::string name() const override { return "forgery"; }

    void act(AdversaryToolkit& tk) override {
        if (!tk.signatures()) {
            if (tk.tag() == ProtocolTag::classify) tk.follow_protocol_all();
            else equivocate_all(tk);
            return;
        }
        harvest(tk);
        switch (tk.tag()) {
            case ProtocolTag::classify: tk.follow_protocol_all(); return;
            case ProtocolTag::committee_vote: gather_certificates(tk); return;
            case ProtocolTag::bb_chain: forge_chains(tk); return;
            case ProtocolTag::plurality:
                for (ProcessId p : tk.faults().faulty_ids()) {
                    const CertificatePtr cc = certs_.count(p) ? certs_.at(p) : forged_cert(tk, p);
                    for (ProcessId r : tk.faults().honest_ids())
                        tk.out(p).send(r, make_payload(PluralityMsg{split_value(tk, r), cc}));
                }
                return;
            case ProtocolTag::wrapper_gc:
            case ProtocolTag::early_gc: forge_gc(tk); return;
            default: equivocate_all(tk); return;
        }
    }

 private:
    /// Honest signatures seen so far, used as token donors.
    void harvest(const AdversaryToolkit& tk) {
        for (ProcessId h : tk.faults().honest_ids()) {
            for (const auto& e : tk.shadow(h).entries()) {
                if (const auto* m = std::get_if<SignedValueMsg>(e.payload.get())) donors_[h] = m->sig;
                else if (const auto* c = std::get_if<CommitteeVoteMsg>(e.payload.get())) donors_[h] = c->sig;
                else if (const auto* ch = std::get_if<ChainMsg>(e.payload.get()); ch && ch->chain) {
                    donors_[h] = ch->chain->signature();
                    if (ch->chain->length() == 1 && ch->chain->signer() == h) honest_certs_[h] = ch->chain->certificate();
                }
            }
        }
    }

    /// A signature claiming `signer` over `content`: a copied token when
    /// one is available (odd draws), a random one otherwise.
    Signature fake(AdversaryToolkit& tk, ProcessId signer, const Digest& content) {
        Signature s;
        s.signer = signer;
        s.digest = content;
        auto it = donors_.find(signer);
        if (it != donors_.end() && tk.rng().below(2) == 1) {
            s.token = it->second.token;
        } else {
            s.token.size = static_cast<std::uint8_t>(token_size(tk));
            for (std::size_t i = 0; i < s.token.size; ++i) s.token.bytes[i] = static_cast<std::uint8_t>(tk.rng().next());
        }
        return s;
    }

    std::size_t token_size(AdversaryToolkit& tk) {
        if (!token_size_) token_size_ = tk.sign(tk.faults().faulty_ids().front(), Digest{}).token.size;
        return *token_size_;
    }

    /// A certificate for p padded with fabricated honest nominations.
    CertificatePtr forged_cert(AdversaryToolkit& tk, ProcessId p) {
        std::vector<Signature> sigs;
        for (ProcessId q : tk.faults().faulty_ids()) sigs.push_back(tk.sign(q, committee_content(p)));
        for (ProcessId h : tk.faults().honest_ids()) {
            if (static_cast<int>(sigs.size()) >= tk.t() + 1) break;
            sigs.push_back(fake(tk, h, committee_content(p)));
        }
        return CommitteeCertificate::make(p, std::move(sigs));
    }


    void forge_gc(AdversaryToolkit& tk) {
        equivocate_all(tk);
        const auto& ctx = tk.context();
        const Value d = tk.domain().size;
        if (ctx.step == 2) {
            // Relays of votes the honest processes never cast.
            VoteBundleMsg bundle;
            for (ProcessId h : tk.faults().honest_ids())
                for (Value v = 0; v < d; ++v)
                    bundle.votes.push_back({GcStep::vote, ctx.instance, v,
                                            fake(tk, h, gc_signed_content(GcStep::vote, ctx.instance, v))});
            auto msg = make_payload(std::move(bundle));
            for (ProcessId p : tk.faults().faulty_ids()) tk.out(p).broadcast(msg);
        } else if (ctx.step == 4) {
            for (Value v = 0; v < d; ++v) {
                EchoProofMsg proof{ctx.instance, v, {}};
                const Digest content = gc_signed_content(GcStep::echo, ctx.instance, v);
                for (ProcessId q : tk.faults().faulty_ids()) proof.sigs.push_back(tk.sign(q, content));
                for (ProcessId h : tk.faults().honest_ids()) {
                    if (static_cast<int>(proof.sigs.size()) >= tk.t() + 1) break;
                    proof.sigs.push_back(fake(tk, h, content));
                }
                auto msg = make_payload(std::move(proof));
                for (ProcessId p : tk.faults().faulty_ids()) tk.out(p).broadcast(msg);
            }
        }
    }

    void forge_chains(AdversaryToolkit& tk) {
        tk.follow_protocol_all();
        const int step = tk.context().step;
        const auto& honest = tk.faults().honest_ids();
        const auto& faulty = tk.faults().faulty_ids();
        const Value d = tk.domain().size;
        if (static_cast<int>(honest.size() + faulty.size()) < step) return;

        // (a) A chain started in an honest sender's name, extended by faulty
        // processes (with real certificates when they have them).
        const ProcessId victim = honest[static_cast<std::size_t>(tk.rng().below(honest.size()))];
        const Value y = static_cast<Value>(tk.rng().below(static_cast<std::uint64_t>(d)));
        CertificatePtr vcc = honest_certs_.count(victim) ? honest_certs_.at(victim) : forged_cert(tk, victim);
        ChainPtr chain = ChainNode::origin(y, vcc, fake(tk, victim, ChainNode::link_content(nullptr, y, vcc)));
        for (int j = 2; j <= step && static_cast<std::size_t>(j - 2) < faulty.size(); ++j) {
            const ProcessId q = faulty[static_cast<std::size_t>(j - 2)];
            const CertificatePtr qcc = certs_.count(q) ? certs_.at(q) : forged_cert(tk, q);
            chain = ChainNode::sign_link(chain, y, qcc, [&](const Digest& dg) { return tk.sign(q, dg); });
        }
        if (chain->length() == step) tk.out(faulty.front()).broadcast(make_payload(ChainMsg{victim, chain}));

        // (b) A faulty sender's chain whose later links claim honest relays.
        const ProcessId s = faulty.front();
        const CertificatePtr scc = certs_.count(s) ? certs_.at(s) : forged_cert(tk, s);
        ChainPtr c2 = ChainNode::sign_link(nullptr, y, scc, [&](const Digest& dg) { return tk.sign(s, dg); });
        for (int j = 2; j <= step && static_cast<std::size_t>(j - 2) < honest.size(); ++j) {
            const ProcessId h = honest[static_cast<std::size_t>(j - 2)];
            const CertificatePtr hcc = honest_certs_.count(h) ? honest_certs_.at(h) : forged_cert(tk, h);
            c2 = ChainNode::extend(c2, hcc, fake(tk, h, ChainNode::link_content(c2, y, hcc)));
        }
        if (c2->length() == step) tk.out(s).broadcast(make_payload(ChainMsg{s, c2}));
    }

    std::map<ProcessId, Signature> donors_;
    std::map<ProcessId, CertificatePtr> honest_certs_;
    std::optional<std::size_t> token_size_;
};

/// Tries to make graded consensus finish with mixed grades and the
/// sub-protocols hand different values to the two halves of the honest
/// processes: the lower half (by id) hears the current majority value, the
/// upper half hears nothing in graded-consensus steps and the minority value
/// wherever a leader speaks.
class SplitBrainAdversary final : public detail::StrategyBase {
 public:
    using StrategyBase::StrategyBase;
    std::string name() const override { return "split-brain"; }

    void act(AdversaryToolkit& tk) override {
        const FaultSet& faults = tk.faults();
        if (tk.tag() == ProtocolTag::classify) {
            auto msg = make_payload(PredictionMsg{complement_prediction(faults)});
            for (ProcessId p : faults.faulty_ids()) tk.out(p).broadcast(msg);
            return;
        }
        observe(tk);
        const Value d = tk.domain().size;
        const bool leader_step = tk.tag() == ProtocolTag::early_king || tk.tag() == ProtocolTag::conciliate ||
                                 tk.tag() == ProtocolTag::plurality || tk.tag() == ProtocolTag::bb_chain;
        const auto half = static_cast<int>(faults.honest_ids().size() / 2);
        for (ProcessId p : faults.faulty_ids()) {
            const Outbox& shadow = tk.shadow(p);
            if (shadow.empty()) {
                spontaneous(tk, p);
                continue;
            }
            for (const auto& e : shadow.entries()) {
                for (ProcessId r : faults.honest_ids()) {
                    if (e.receiver && *e.receiver != r) continue;
                    const bool lower = detail::honest_rank(faults, r) < half;
                    if (!lower && !leader_step) continue;
                    const Value v = lower ? majority_ : (majority_ + 1) % d;
                    PayloadPtr alt = retarget(tk, p, *e.payload, v);
                    tk.out(p).send(r, alt ? alt : e.payload);
                }
            }
        }
    }

 private:
    void observe(const AdversaryToolkit& tk) {
        std::map<Value, int> counts;
        for (ProcessId h : tk.faults().honest_ids())
            for (const auto& e : tk.shadow(h).entries()) {
                if (const auto* m = std::get_if<ValueMsg>(e.payload.get())) ++counts[m->value];
                else if (const auto* s = std::get_if<SignedValueMsg>(e.payload.get())) ++counts[s->value];
            }
        int best = 0;
        for (const auto& [v, c] : counts)
            if (c > best) best = c, majority_ = v;
    }

    Value majority_ = 0;
};

/// Builds the strategy named in `spec`; nullptr for "none" (faulty processes
/// follow the protocol).
inline std::unique_ptr<Adversary> make_adversary(const AdversarySpec& spec) {
    const std::string& n = spec.name;
    if (n == "none") return nullptr;
    if (n == "silent") return std::make_unique<SilentAdversary>();
    if (n == "crash") return std::make_unique<CrashAdversary>(spec);
    if (n == "equivocator") return std::make_unique<EquivocatorAdversary>(spec);
    if (n == "vote-poisoner") return std::make_unique<VotePoisonerAdversary>(spec);
    if (n == "chain-withholder") return std::make_unique<ChainWithholderAdversary>(spec);
    if (n == "certificate-hoarder") return std::make_unique<CertificateHoarderAdversary>(spec);
    if (n == "selective-ignorer") return std::make_unique<SelectiveIgnorerAdversary>(spec);
    if (n == "forgery") return std::make_unique<ForgeryAdversary>(spec);
    if (n == "split-brain") return std::make_unique<SplitBrainAdversary>(spec);
    throw ConfigError("unknown adversary: " + n);
}

}  // namespace bapred
