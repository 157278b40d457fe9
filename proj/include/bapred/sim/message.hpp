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
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "bapred/auth/chain.hpp"
#include "bapred/core.hpp"
#include "bapred/predictions.hpp"

namespace bapred {

/// Sub-protocol a round's traffic belongs to; the unit of the per-protocol
/// message breakdown.
enum class ProtocolTag : std::uint8_t {
    classify,
    wrapper_gc,
    early_gc,
    early_king,
    core_gc,
    conciliate,
    committee_vote,
    bb_chain,
    plurality,
};

inline constexpr std::size_t protocol_tag_count = 9;

inline constexpr std::array<std::string_view, protocol_tag_count> protocol_tag_names = {
    "classify",      "graded-consensus", "early-stopping-gc", "early-stopping-king", "core-set-gc",
    "conciliation",  "committee-vote",   "bb-chain",          "plurality",
};

inline std::string_view to_string(ProtocolTag tag) { return protocol_tag_names[static_cast<std::size_t>(tag)]; }

inline std::optional<ProtocolTag> parse_protocol_tag(std::string_view name) {
    for (std::size_t i = 0; i < protocol_tag_count; ++i)
        if (protocol_tag_names[i] == name) return static_cast<ProtocolTag>(i);
    return std::nullopt;
}

struct PredictionMsg {
    PredictionVector bits;
};

struct ValueMsg {
    Value value;
};

struct ConciliationMsg {
    Value value;
    std::vector<ProcessId> window;  // sorted ascending
};

enum class GcStep : std::uint8_t { vote, echo };

struct SignedValueMsg {
    GcStep step;
    std::int64_t instance;
    Value value;
    Signature sig;
};

/// Relay of the signed votes a process received directly.
struct VoteBundleMsg {
    std::vector<SignedValueMsg> votes;
};

struct EchoProofMsg {
    std::int64_t instance;
    Value value;
    std::vector<Signature> sigs;
};

struct CommitteeVoteMsg {
    Signature sig;
};

struct ChainMsg {
    ProcessId instance;  // the broadcast sender s
    ChainPtr chain;
};

struct PluralityMsg {
    Value value;
    CertificatePtr cert;
};

using Payload = std::variant<PredictionMsg, ValueMsg, ConciliationMsg, SignedValueMsg, VoteBundleMsg, EchoProofMsg,
                             CommitteeVoteMsg, ChainMsg, PluralityMsg>;
using PayloadPtr = std::shared_ptr<const Payload>;

template <typename T>
PayloadPtr make_payload(T&& body) {
    return std::make_shared<const Payload>(std::forward<T>(body));
}

/// A message as seen by its receiver.
struct Delivered {
    ProcessId sender;
    PayloadPtr payload;

    template <typename T>
    const T* as() const {
        return payload ? std::get_if<T>(payload.get()) : nullptr;
    }
};

using Inbox = std::vector<Delivered>;

/// Messages one process emits in one round. A broadcast reaches every
/// process, including the sender itself (free and uncounted).
class Outbox {
 public:
    struct Entry {
        std::optional<ProcessId> receiver;  // absent = broadcast
        PayloadPtr payload;
    };

    void broadcast(PayloadPtr p) { entries_.push_back({std::nullopt, std::move(p)}); }
    void send(ProcessId to, PayloadPtr p) { entries_.push_back({to, std::move(p)}); }
    void clear() { entries_.clear(); }
    bool empty() const { return entries_.empty(); }
    const std::vector<Entry>& entries() const { return entries_; }

    /// The payloads this outbox delivers to `to`.
    std::vector<PayloadPtr> for_receiver(ProcessId to) const {
        std::vector<PayloadPtr> out;
        for (const auto& e : entries_)
            if (!e.receiver || *e.receiver == to) out.push_back(e.payload);
        return out;
    }

 private:
    std::vector<Entry> entries_;
};

}  // namespace bapred
