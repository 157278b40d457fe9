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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace bapred {

/// Consensus values. The domain is the finite, totally ordered set
/// {0, 1, ..., domain_size - 1}; anything outside it is treated as malformed.
using Value = std::int64_t;

/// Identifier of a process, 1-based as in the protocol descriptions.
class ProcessId {
 public:
    constexpr ProcessId() = default;
    constexpr explicit ProcessId(int id) : id_(id) {}

    constexpr int value() const { return id_; }
    constexpr std::size_t index() const { return static_cast<std::size_t>(id_ - 1); }
    static constexpr ProcessId from_index(std::size_t index) {
        return ProcessId(static_cast<int>(index) + 1);
    }

    constexpr bool valid_for(int n) const { return id_ >= 1 && id_ <= n; }

    constexpr auto operator<=>(const ProcessId&) const = default;

 private:
    int id_ = 0;
};

inline std::string to_string(ProcessId p) { return "p" + std::to_string(p.value()); }

/// Raised when a scenario or protocol parameter violates a precondition.
class ConfigError : public std::invalid_argument {
 public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when honest protocol code does something the engine forbids
/// (ill-formed sends, signing for another process). Always a library bug.
class ProtocolViolation : public std::logic_error {
 public:
    using std::logic_error::logic_error;
};

struct ValueDomain {
    Value size = 2;

    bool contains(Value v) const { return v >= 0 && v < size; }
    Value min() const { return 0; }
    Value max() const { return size - 1; }
};

/// The set F of faulty identifiers for one execution (fixed, no adaptive
/// corruption).
class FaultSet {
 public:
    FaultSet() = default;
    FaultSet(int n, const std::vector<ProcessId>& faulty) : flags_(static_cast<std::size_t>(n), false) {
        for (ProcessId p : faulty) {
            if (!p.valid_for(n)) throw ConfigError("fault set member out of range: " + to_string(p));
            if (flags_[p.index()]) throw ConfigError("duplicate fault set member: " + to_string(p));
            flags_[p.index()] = true;
        }
        for (std::size_t i = 0; i < flags_.size(); ++i) {
            (flags_[i] ? faulty_ : honest_).push_back(ProcessId::from_index(i));
        }
    }

    int n() const { return static_cast<int>(flags_.size()); }
    int f() const { return static_cast<int>(faulty_.size()); }
    bool faulty(ProcessId p) const { return flags_[p.index()]; }
    bool honest(ProcessId p) const { return !flags_[p.index()]; }
    const std::vector<ProcessId>& faulty_ids() const { return faulty_; }
    const std::vector<ProcessId>& honest_ids() const { return honest_; }

 private:
    std::vector<bool> flags_;
    std::vector<ProcessId> faulty_;
    std::vector<ProcessId> honest_;
};

enum class Variant { unauthenticated, authenticated };

inline const char* to_string(Variant v) {
    return v == Variant::unauthenticated ? "unauthenticated" : "authenticated";
}

/// Deterministic seeded random streams. The generator and the bounded draw
/// below are fully specified, so results are identical across platforms
/// (std::uniform_int_distribution is not).
class Rng {
 public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    /// Independent stream for a named purpose derived from a root seed.
    static Rng stream(std::uint64_t seed, std::uint64_t purpose) {
        return Rng(mix(mix(seed) ^ mix(purpose * 0x2545f4914f6cdd1dULL + 1)));
    }

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return x % bound;
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

 private:
    std::mt19937_64 engine_;
};

/// Purposes for Rng::stream, fixed so recorded seeds replay bit-exactly.
namespace stream_id {
inline constexpr std::uint64_t predictions = 1;
inline constexpr std::uint64_t inputs = 2;
inline constexpr std::uint64_t faults = 3;
inline constexpr std::uint64_t adversary = 4;
inline constexpr std::uint64_t shuffle = 5;
inline constexpr std::uint64_t keys = 6;
}  // namespace stream_id

}  // namespace bapred

template <>
struct std::hash<bapred::ProcessId> {
    std::size_t operator()(bapred::ProcessId p) const noexcept {
        return std::hash<int>{}(p.value());
    }
};
