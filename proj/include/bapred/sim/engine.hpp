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

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bapred/auth/signature.hpp"
#include "bapred/core.hpp"
#include "bapred/sim/message.hpp"

namespace bapred {

/// Where the running sub-protocol currently is. Protocols set it before each
/// exchange so adversaries can target specific steps.
struct RoundContext {
    std::int64_t instance = 0;  // graded-consensus instance, for signed content
    int k = 0;                  // misclassification bound of the running conditional BA
    int step = 0;               // 1-based round within the sub-protocol
    int steps = 0;              // total rounds of the sub-protocol
};

struct ExecutionConfig {
    int n = 4;
    int t = 1;
    std::vector<ProcessId> faulty;
    ValueDomain domain;
    std::uint64_t seed = 0;
    std::uint64_t shuffle_salt = 0;
    Variant variant = Variant::unauthenticated;
    SchemeKind scheme = SchemeKind::simulated;
    /// Fault-injection switch for negative controls: adopt sub-protocol
    /// outputs even after a grade-1 graded consensus.
    bool skip_grade_guard = false;
    std::int64_t round_limit = 1'000'000;
};

class Execution;
class AdversaryToolkit;

/// A Byzantine strategy controlling every faulty process. It is rushing: in
/// each round it sees what honest processes send (and what the faulty
/// processes would send if they followed the protocol) before choosing.
class Adversary {
 public:
    virtual ~Adversary() = default;
    virtual std::string name() const = 0;
    virtual void act(AdversaryToolkit& tools) = 0;
    /// Lets the strategy drop or alter what its own processes perceive.
    virtual void filter_inbox(ProcessId /*faulty*/, Inbox& /*inbox*/, int /*round*/) {}
    /// Input the faulty process's protocol code starts from.
    virtual Value faulty_input(ProcessId /*p*/, Value assigned) { return assigned; }
};

/// The adversary's capabilities for one round. It may write outboxes only for
/// faulty processes and sign only under faulty identities.
class AdversaryToolkit {
 public:
    AdversaryToolkit(Execution& ex, ProtocolTag tag, std::span<const Outbox> traffic, std::vector<Outbox>& out)
        : ex_(ex), tag_(tag), traffic_(traffic), out_(out) {}

    inline int n() const;
    inline int t() const;
    inline int round() const;
    inline const FaultSet& faults() const;
    inline const ValueDomain& domain() const;
    inline const RoundContext& context() const;
    inline Rng& rng();
    inline SignatureService* signatures();
    ProtocolTag tag() const { return tag_; }

    /// Everything sent this round, indexed by sender: real traffic for honest
    /// processes, protocol-following suggestions for faulty ones.
    std::span<const Outbox> traffic() const { return traffic_; }
    const Outbox& shadow(ProcessId p) const { return traffic_[p.index()]; }

    inline Outbox& out(ProcessId faulty);
    inline Signature sign(ProcessId signer, const Digest& content);

    void follow_protocol(ProcessId faulty) {
        Outbox& o = out(faulty);
        for (const auto& e : shadow(faulty).entries()) {
            if (e.receiver) o.send(*e.receiver, e.payload);
            else o.broadcast(e.payload);
        }
    }
    void follow_protocol_all() {
        for (ProcessId p : faults().faulty_ids()) follow_protocol(p);
    }

 private:
    Execution& ex_;
    ProtocolTag tag_;
    std::span<const Outbox> traffic_;
    std::vector<Outbox>& out_;
};

/// One deterministic synchronous execution. Protocol code is written
/// collectively: each round it fills one outbox per process (faulty processes
/// included, as shadows running the honest code) and calls exchange(), which
/// returns every process's inbox for the next step.
class Execution {
 public:
    Execution(ExecutionConfig cfg, Adversary* adversary)
        : cfg_(std::move(cfg)),
          faults_(cfg_.n, cfg_.faulty),
          adversary_(adversary),
          adversary_rng_(Rng::stream(cfg_.seed, stream_id::adversary)),
          shuffle_rng_(Rng::stream(cfg_.seed ^ Rng::mix(cfg_.shuffle_salt), stream_id::shuffle)),
          returned_(static_cast<std::size_t>(cfg_.n), false),
          return_round_(static_cast<std::size_t>(cfg_.n), -1) {
        if (cfg_.n < 1) throw ConfigError("n must be positive");
        if (cfg_.t < 0) throw ConfigError("t must be non-negative");
        if (faults_.f() > cfg_.t) throw ConfigError("more faulty processes than t");
        if (cfg_.domain.size < 1) throw ConfigError("value domain must be non-empty");
        if (cfg_.variant == Variant::unauthenticated && 3 * cfg_.t >= cfg_.n)
            throw ConfigError("unauthenticated protocols require t < n/3");
        if (cfg_.variant == Variant::authenticated) {
            if (2 * cfg_.t >= cfg_.n) throw ConfigError("authenticated protocols require t < n/2");
            signatures_ = std::make_unique<SignatureService>(make_scheme(cfg_.scheme, cfg_.n, cfg_.seed), faults_);
        }
    }

    int n() const { return cfg_.n; }
    int t() const { return cfg_.t; }
    const FaultSet& faults() const { return faults_; }
    const ValueDomain& domain() const { return cfg_.domain; }
    const ExecutionConfig& config() const { return cfg_; }
    Variant variant() const { return cfg_.variant; }
    bool skip_grade_guard() const { return cfg_.skip_grade_guard; }
    int round() const { return round_; }
    Adversary* adversary() const { return adversary_; }

    RoundContext& context() { return context_; }
    std::int64_t next_instance() { return ++instances_; }

    SignatureService* signatures() { return signatures_.get(); }
    SignatureService& require_signatures() {
        if (!signatures_) throw ConfigError("protocol requires the authenticated variant");
        return *signatures_;
    }

    /// Signing path for protocol code running on behalf of `signer`.
    Signature sign(ProcessId signer, const Digest& content) { return require_signatures().mint(signer, content); }

    std::vector<Outbox> outboxes() const { return std::vector<Outbox>(static_cast<std::size_t>(cfg_.n)); }

    std::vector<Inbox> exchange(ProtocolTag tag, std::vector<Outbox>& outboxes) {
        if (static_cast<int>(outboxes.size()) != cfg_.n) throw ProtocolViolation("outbox count differs from n");
        if (++round_ > cfg_.round_limit) throw ProtocolViolation("round limit exceeded");
        std::vector<Inbox> inboxes(static_cast<std::size_t>(cfg_.n));
        const auto tag_index = static_cast<std::size_t>(tag);
        ++rounds_by_tag_[tag_index];

        for (ProcessId p : faults_.honest_ids()) {
            if (returned(p)) {
                outboxes[p.index()].clear();
                continue;
            }
            for (const auto& e : outboxes[p.index()].entries()) {
                if (!e.payload) throw ProtocolViolation("honest process sent an empty payload");
                if (e.receiver) {
                    if (!e.receiver->valid_for(cfg_.n)) throw ProtocolViolation("honest send to unknown process");
                    inboxes[e.receiver->index()].push_back({p, e.payload});
                    if (*e.receiver != p) ++honest_messages_[tag_index];
                } else {
                    for (auto& inbox : inboxes) inbox.push_back({p, e.payload});
                    honest_messages_[tag_index] += cfg_.n - 1;
                }
            }
        }

        if (faults_.f() > 0) {
            std::vector<Outbox> faulty_out(static_cast<std::size_t>(cfg_.n));
            AdversaryToolkit tools(*this, tag, outboxes, faulty_out);
            if (adversary_) adversary_->act(tools);
            else tools.follow_protocol_all();
            for (ProcessId p : faults_.faulty_ids()) {
                for (const auto& e : faulty_out[p.index()].entries()) {
                    if (!e.payload) continue;
                    if (e.receiver) {
                        if (e.receiver->valid_for(cfg_.n)) inboxes[e.receiver->index()].push_back({p, e.payload});
                    } else {
                        for (auto& inbox : inboxes) inbox.push_back({p, e.payload});
                    }
                }
            }
            if (adversary_)
                for (ProcessId p : faults_.faulty_ids()) adversary_->filter_inbox(p, inboxes[p.index()], round_);
        }

        for (auto& inbox : inboxes) shuffle_rng_.shuffle(inbox);
        return inboxes;
    }

    /// Idle rounds keep time-boxed sub-protocols aligned; nobody sends.
    void idle(std::int64_t rounds) {
        if (rounds <= 0) return;
        round_ += static_cast<int>(rounds);
        if (round_ > cfg_.round_limit) throw ProtocolViolation("round limit exceeded");
    }

    void mark_returned(ProcessId p) {
        if (returned_[p.index()]) return;
        returned_[p.index()] = true;
        return_round_[p.index()] = round_;
    }
    bool returned(ProcessId p) const { return returned_[p.index()]; }
    int return_round(ProcessId p) const { return return_round_[p.index()]; }
    bool all_honest_returned() const {
        for (ProcessId p : faults_.honest_ids())
            if (!returned_[p.index()]) return false;
        return true;
    }

    const std::array<std::int64_t, protocol_tag_count>& honest_messages() const { return honest_messages_; }
    /// Communication rounds run under each tag (idle rounds excluded).
    const std::array<int, protocol_tag_count>& rounds_by_tag() const { return rounds_by_tag_; }

    Rng& adversary_rng() { return adversary_rng_; }

 private:
    ExecutionConfig cfg_;
    FaultSet faults_;
    Adversary* adversary_;
    std::unique_ptr<SignatureService> signatures_;
    Rng adversary_rng_;
    Rng shuffle_rng_;
    RoundContext context_;
    std::int64_t instances_ = 0;
    int round_ = 0;
    std::vector<bool> returned_;
    std::vector<int> return_round_;
    std::array<std::int64_t, protocol_tag_count> honest_messages_{};
    std::array<int, protocol_tag_count> rounds_by_tag_{};
};

int AdversaryToolkit::n() const { return ex_.n(); }
int AdversaryToolkit::t() const { return ex_.t(); }
int AdversaryToolkit::round() const { return ex_.round(); }
const FaultSet& AdversaryToolkit::faults() const { return ex_.faults(); }
const ValueDomain& AdversaryToolkit::domain() const { return ex_.domain(); }
const RoundContext& AdversaryToolkit::context() const { return ex_.context(); }
Rng& AdversaryToolkit::rng() { return ex_.adversary_rng(); }
SignatureService* AdversaryToolkit::signatures() { return ex_.signatures(); }

Outbox& AdversaryToolkit::out(ProcessId faulty) {
    if (!faulty.valid_for(ex_.n()) || !ex_.faults().faulty(faulty))
        throw ProtocolViolation("adversary cannot send as honest " + to_string(faulty));
    return out_[faulty.index()];
}

Signature AdversaryToolkit::sign(ProcessId signer, const Digest& content) {
    if (!signer.valid_for(ex_.n()) || ex_.faults().honest(signer))
        throw ProtocolViolation("adversary cannot sign as honest " + to_string(signer));
    return ex_.require_signatures().mint(signer, content);
}

}  // namespace bapred
