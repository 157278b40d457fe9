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

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bapred/auth/chain.hpp"
#include "bapred/sim/engine.hpp"

namespace bapred {

/// Exhaustive adversary enumeration for tiny instances.
///
/// A strategy is a sequence of choices. Each time a faulty process addresses
/// an honest receiver, the strategy picks a subset of the protocol-syntactic
/// payloads available at that point (the empty subset is silence). Because
/// the available payloads depend on what the adversary has observed, the
/// behaviors form a tree; the stream walks it depth first by replaying each
/// execution from scratch under an odometer over the choice tape, so every
/// leaf (every distinct adaptive behavior) is produced exactly once.
///
/// Malformed payloads are discarded by honest parsers and so cannot be told
/// apart from silence; the syntactic alphabet plus silence is therefore
/// exhaustive up to what honest processes can observe.
class ChoiceTape {
 public:
    /// Returns a choice in [0, options). Single-option points leave no digit.
    int choose(int options) {
        if (options <= 1) return 0;
        if (pos_ < digit_.size()) {
            if (radix_[pos_] != options) throw ProtocolViolation("enumerated execution did not replay deterministically");
            return digit_[pos_++];
        }
        digit_.push_back(0);
        radix_.push_back(options);
        ++pos_;
        return 0;
    }

    /// Moves to the next unexplored leaf; false once the tree is exhausted.
    bool advance() {
        digit_.resize(pos_);
        radix_.resize(pos_);
        pos_ = 0;
        while (!digit_.empty()) {
            if (++digit_.back() < radix_.back()) return true;
            digit_.pop_back();
            radix_.pop_back();
        }
        return false;
    }

    std::size_t depth() const { return pos_; }

 private:
    std::vector<int> digit_;
    std::vector<int> radix_;
    std::size_t pos_ = 0;
};

enum class SmallProtocol { graded_consensus, core_set_gc, committee_broadcast };

inline std::string to_string(SmallProtocol p) {
    switch (p) {
        case SmallProtocol::graded_consensus: return "graded-consensus";
        case SmallProtocol::core_set_gc: return "core-set-gc";
        case SmallProtocol::committee_broadcast: return "committee-broadcast";
    }
    return "?";
}

struct EnumerationSpec {
    int n = 4;
    ValueDomain domain{2};
    SmallProtocol protocol = SmallProtocol::graded_consensus;
    /// Rounds in which faulty processes choose; later rounds are silent.
    int round_bound = 2;
    /// Strategies streamed before the enumeration reports truncation.
    std::size_t limit = 1'000'000;
    /// Committee broadcast only: the instance whose chains the adversary
    /// sends. Instances never read each other's chains, so enumerating one
    /// instance at a time covers the product space instance by instance.
    ProcessId focus{1};
};

struct EnumerationReport {
    std::size_t strategies = 0;
    bool truncated = false;
    std::size_t limit = 0;
    std::size_t max_depth = 0;

    bool exhaustive() const { return !truncated; }
    std::string describe() const {
        std::ostringstream os;
        os << strategies << " strategies, max depth " << max_depth;
        if (truncated) os << ", TRUNCATED at limit " << limit << " (sampled, not exhaustive)";
        else os << ", exhaustive";
        return os.str();
    }
};

/// The strategy driven by a choice tape.
class EnumeratedAdversary final : public Adversary {
 public:
    EnumeratedAdversary(const EnumerationSpec& spec, ChoiceTape& tape) : spec_(spec), tape_(tape) {}

    std::string name() const override { return "enumerated"; }

    /// Committee broadcast: the certificates faulty processes hold this run.
    void set_certificates(std::vector<CertificatePtr> cc) { certificates_ = std::move(cc); }

    void reset() {
        seen_chains_.clear();
        certificates_.clear();
    }

    void act(AdversaryToolkit& tk) override {
        const int step = tk.context().step;
        if (step < 1 || step > spec_.round_bound) return;
        std::vector<ChainPtr> known;
        if (spec_.protocol == SmallProtocol::committee_broadcast) known = std::move(seen_chains_);
        seen_chains_.clear();
        for (ProcessId p : tk.faults().faulty_ids()) {
            const auto cands = candidates(tk, p, step, known);
            if (cands.size() > 16) throw ConfigError("enumeration alphabet too large for this instance");
            const int options = 1 << cands.size();
            for (ProcessId q : tk.faults().honest_ids()) {
                const int mask = tape_.choose(options);
                for (std::size_t c = 0; c < cands.size(); ++c)
                    if (mask & (1 << c)) tk.out(p).send(q, cands[c]);
            }
        }
    }

    void filter_inbox(ProcessId, Inbox& inbox, int) override {
        if (spec_.protocol != SmallProtocol::committee_broadcast) return;
        for (const auto& d : inbox)
            if (const auto* m = d.as<ChainMsg>(); m && m->chain && m->instance == spec_.focus) seen_chains_.push_back(m->chain);
    }

 private:
    std::vector<PayloadPtr> candidates(AdversaryToolkit& tk, ProcessId p, int step, const std::vector<ChainPtr>& known) {
        std::vector<PayloadPtr> out;
        if (spec_.protocol != SmallProtocol::committee_broadcast) {
            for (Value v = spec_.domain.min(); v <= spec_.domain.max(); ++v) out.push_back(make_payload(ValueMsg{v}));
            return out;
        }
        const CertificatePtr cc = p.index() < certificates_.size() ? certificates_[p.index()] : nullptr;
        if (!cc) return out;  // without a certificate no chain it signs is valid
        auto sign = [&](const Digest& d) { return tk.sign(p, d); };
        if (step == 1) {
            if (p == spec_.focus)
                for (Value v = spec_.domain.min(); v <= spec_.domain.max(); ++v)
                    out.push_back(make_payload(ChainMsg{p, ChainNode::sign_link(nullptr, v, cc, sign)}));
            remember(out);
            return out;
        }
        // Extensions by p of every distinct length-(step-1) chain it has
        // seen; a verbatim forward of an honest broadcast duplicates what the
        // receiver already holds from the broadcaster.
        std::map<std::pair<Value, std::vector<ProcessId>>, ChainPtr> distinct;
        for (const auto& c : known) {
            if (c->length() != step - 1) continue;
            auto signers = c->signers();
            if (std::find(signers.begin(), signers.end(), p) != signers.end()) continue;
            distinct.try_emplace({c->value(), std::move(signers)}, c);
        }
        for (const auto& [key, c] : distinct)
            out.push_back(make_payload(ChainMsg{spec_.focus, ChainNode::sign_link(c, c->value(), cc, sign)}));
        remember(out);
        return out;
    }

    // Chains built this round stay known to every faulty process next round.
    void remember(const std::vector<PayloadPtr>& built) {
        for (const auto& b : built) seen_chains_.push_back(std::get<ChainMsg>(*b).chain);
    }

    const EnumerationSpec& spec_;
    ChoiceTape& tape_;
    std::vector<ChainPtr> seen_chains_;
    std::vector<CertificatePtr> certificates_;
};

/// Stream of every adversary behavior for one small configuration. Usage:
/// while (auto* a = stream.next()) { run one execution with *a; }
class SmallAdversaryStream {
 public:
    explicit SmallAdversaryStream(EnumerationSpec spec) : spec_(spec), adversary_(spec_, tape_) {
        if (spec_.n < 1 || spec_.n > 5) throw ConfigError("adversary enumeration supports n <= 5");
        if (spec_.domain.size < 1 || spec_.domain.size > 2) throw ConfigError("adversary enumeration supports domains of size <= 2");
        if (spec_.round_bound < 0) throw ConfigError("round bound must be non-negative");
        report_.limit = spec_.limit;
    }
    SmallAdversaryStream(const SmallAdversaryStream&) = delete;
    SmallAdversaryStream& operator=(const SmallAdversaryStream&) = delete;

    EnumeratedAdversary* next() {
        if (done_) return nullptr;
        if (started_) {
            report_.max_depth = std::max(report_.max_depth, tape_.depth());
            if (!tape_.advance()) {
                done_ = true;
                return nullptr;
            }
            if (report_.strategies >= spec_.limit) {
                report_.truncated = true;
                done_ = true;
                return nullptr;
            }
        }
        started_ = true;
        ++report_.strategies;
        adversary_.reset();
        return &adversary_;
    }

    const EnumerationReport& report() const { return report_; }
    const EnumerationSpec& spec() const { return spec_; }

 private:
    EnumerationSpec spec_;
    ChoiceTape tape_;
    EnumeratedAdversary adversary_;
    EnumerationReport report_;
    bool started_ = false;
    bool done_ = false;
};

inline SmallAdversaryStream enumerate_small_adversaries(int n, ValueDomain domain, SmallProtocol protocol, int round_bound) {
    EnumerationSpec spec;
    spec.n = n;
    spec.domain = domain;
    spec.protocol = protocol;
    spec.round_bound = round_bound;
    return SmallAdversaryStream(spec);
}

}  // namespace bapred
