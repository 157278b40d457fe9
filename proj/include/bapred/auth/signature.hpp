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

#include <sodium.h>

#include <array>
#include <cstdint>
#include <cstring>
#include <memory>
#include <span>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "bapred/core.hpp"

namespace bapred {

using Digest = std::array<std::uint8_t, 32>;

/// Canonical signing encoding. Every field is a one-byte type tag followed by
/// its body, all integers big-endian:
///
///   0x01 integer  : 8-byte two's-complement value
///   0x02 text     : 4-byte length, then the bytes
///   0x03 digest   : 32 bytes (BLAKE2b-256 of a nested encoding)
///   0x04 process  : 4-byte identifier
///   0x05 blob     : 4-byte length, then the bytes (signature tokens)
///
/// Signatures cover digest(encoding), never the raw bytes, so both signature
/// implementations sign identical 32-byte messages.
class CanonicalEncoder {
 public:
    CanonicalEncoder& integer(std::int64_t v) {
        bytes_.push_back(0x01);
        put_u64(static_cast<std::uint64_t>(v));
        return *this;
    }
    CanonicalEncoder& text(std::string_view s) {
        bytes_.push_back(0x02);
        put_u32(static_cast<std::uint32_t>(s.size()));
        bytes_.insert(bytes_.end(), s.begin(), s.end());
        return *this;
    }
    CanonicalEncoder& digest(const Digest& d) {
        bytes_.push_back(0x03);
        bytes_.insert(bytes_.end(), d.begin(), d.end());
        return *this;
    }
    CanonicalEncoder& process(ProcessId p) {
        bytes_.push_back(0x04);
        put_u32(static_cast<std::uint32_t>(p.value()));
        return *this;
    }
    CanonicalEncoder& blob(std::span<const std::uint8_t> b) {
        bytes_.push_back(0x05);
        put_u32(static_cast<std::uint32_t>(b.size()));
        bytes_.insert(bytes_.end(), b.begin(), b.end());
        return *this;
    }

    const std::vector<std::uint8_t>& bytes() const { return bytes_; }

    Digest finish() const {
        Digest d{};
        crypto_generichash(d.data(), d.size(), bytes_.data(), bytes_.size(), nullptr, 0);
        return d;
    }

 private:
    void put_u32(std::uint32_t v) {
        for (int s = 24; s >= 0; s -= 8) bytes_.push_back(static_cast<std::uint8_t>(v >> s));
    }
    void put_u64(std::uint64_t v) {
        for (int s = 56; s >= 0; s -= 8) bytes_.push_back(static_cast<std::uint8_t>(v >> s));
    }

    std::vector<std::uint8_t> bytes_;
};

struct SignatureToken {
    std::array<std::uint8_t, 64> bytes{};
    std::uint8_t size = 0;

    std::span<const std::uint8_t> view() const { return {bytes.data(), size}; }
    bool operator==(const SignatureToken& o) const {
        return size == o.size && std::memcmp(bytes.data(), o.bytes.data(), size) == 0;
    }
};

struct Signature {
    ProcessId signer;
    Digest digest{};
    SignatureToken token;

    bool operator==(const Signature&) const = default;
};

/// Pluggable signature scheme. Keys are derived from the execution seed so
/// executions replay exactly.
class SignatureScheme {
 public:
    virtual ~SignatureScheme() = default;
    virtual SignatureToken sign(ProcessId signer, const Digest& digest) const = 0;
    virtual bool verify(ProcessId signer, const Digest& digest, const SignatureToken& token) const = 0;
    virtual const char* name() const = 0;
};

namespace detail {
inline void ensure_sodium() {
    static const bool ready = sodium_init() >= 0;
    if (!ready) throw std::runtime_error("libsodium failed to initialize");
}

inline std::array<std::uint8_t, 32> derive_key(std::uint64_t seed, ProcessId p) {
    Rng rng = Rng::stream(seed ^ (static_cast<std::uint64_t>(p.value()) << 32), stream_id::keys);
    std::array<std::uint8_t, 32> key{};
    for (std::size_t i = 0; i < key.size(); i += 8) {
        const std::uint64_t x = rng.next();
        std::memcpy(key.data() + i, &x, 8);
    }
    return key;
}
}  // namespace detail

/// Keyed-BLAKE2b tokens. The engine holds every key; nothing outside it can
/// mint a token for an honest signer.
class SimulatedScheme final : public SignatureScheme {
 public:
    SimulatedScheme(int n, std::uint64_t seed) {
        detail::ensure_sodium();
        keys_.reserve(static_cast<std::size_t>(n));
        for (int i = 1; i <= n; ++i) keys_.push_back(detail::derive_key(seed, ProcessId(i)));
    }

    SignatureToken sign(ProcessId signer, const Digest& digest) const override {
        SignatureToken t;
        t.size = 16;
        const auto& key = keys_.at(signer.index());
        crypto_generichash(t.bytes.data(), t.size, digest.data(), digest.size(), key.data(), key.size());
        return t;
    }

    bool verify(ProcessId signer, const Digest& digest, const SignatureToken& token) const override {
        if (!signer.valid_for(static_cast<int>(keys_.size())) || token.size != 16) return false;
        return sign(signer, digest) == token;
    }

    const char* name() const override { return "simulated"; }

 private:
    std::vector<std::array<std::uint8_t, 32>> keys_;
};

/// Real Ed25519 signatures (libsodium), deterministic keys from the seed.
class Ed25519Scheme final : public SignatureScheme {
 public:
    Ed25519Scheme(int n, std::uint64_t seed) {
        detail::ensure_sodium();
        for (int i = 1; i <= n; ++i) {
            const auto key_seed = detail::derive_key(seed, ProcessId(i));
            Keys k;
            crypto_sign_seed_keypair(k.pk.data(), k.sk.data(), key_seed.data());
            keys_.push_back(k);
        }
    }

    SignatureToken sign(ProcessId signer, const Digest& digest) const override {
        SignatureToken t;
        t.size = crypto_sign_BYTES;
        crypto_sign_detached(t.bytes.data(), nullptr, digest.data(), digest.size(), keys_.at(signer.index()).sk.data());
        return t;
    }

    bool verify(ProcessId signer, const Digest& digest, const SignatureToken& token) const override {
        if (!signer.valid_for(static_cast<int>(keys_.size())) || token.size != crypto_sign_BYTES) return false;
        return crypto_sign_verify_detached(token.bytes.data(), digest.data(), digest.size(),
                                           keys_[signer.index()].pk.data()) == 0;
    }

    const char* name() const override { return "ed25519"; }

 private:
    struct Keys {
        std::array<std::uint8_t, crypto_sign_PUBLICKEYBYTES> pk{};
        std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> sk{};
    };
    std::vector<Keys> keys_;
};

enum class SchemeKind { simulated, ed25519 };

inline std::unique_ptr<SignatureScheme> make_scheme(SchemeKind kind, int n, std::uint64_t seed) {
    if (kind == SchemeKind::ed25519) return std::make_unique<Ed25519Scheme>(n, seed);
    return std::make_unique<SimulatedScheme>(n, seed);
}

/// Per-execution signing authority. Records every signature minted for an
/// honest signer so accepted signatures can be audited against that ledger,
/// and memoizes verification (many receivers check the same signature).
class SignatureService {
 public:
    SignatureService(std::unique_ptr<SignatureScheme> scheme, FaultSet faults)
        : scheme_(std::move(scheme)), faults_(std::move(faults)) {}

    /// Mints a signature. Callers are responsible for signer authority: the
    /// engine only routes honest code here for its own identifier and the
    /// adversary toolkit for faulty identifiers.
    Signature mint(ProcessId signer, const Digest& digest) {
        if (!signer.valid_for(faults_.n())) throw ProtocolViolation("signer out of range");
        Signature s{signer, digest, scheme_->sign(signer, digest)};
        if (faults_.honest(signer)) honest_ledger_.insert(key_of(s));
        return s;
    }

    bool verify(const Signature& sig, ProcessId expected_signer, const Digest& content) {
        const bool honest_signer = sig.signer.valid_for(faults_.n()) && faults_.honest(sig.signer);
        if (sig.signer != expected_signer || sig.digest != content) {
            if (honest_signer) ++honest_rejected_;
            return false;
        }
        const CacheKey key = key_of(sig);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        const bool ok = scheme_->verify(sig.signer, sig.digest, sig.token);
        if (ok && honest_signer && !honest_ledger_.contains(key)) ++forgeries_accepted_;
        if (!ok && honest_signer) ++honest_rejected_;
        cache_.emplace(key, ok);
        return ok;
    }

    const FaultSet& faults() const { return faults_; }
    const SignatureScheme& scheme() const { return *scheme_; }
    /// Accepted signatures attributed to honest signers that were never minted.
    std::uint64_t forgeries_accepted() const { return forgeries_accepted_; }
    /// Rejected checks of signatures attributed to honest signers: forgery
    /// or replay attempts that failed.
    std::uint64_t honest_signatures_rejected() const { return honest_rejected_; }

 private:
    struct CacheKey {
        int signer;
        Digest digest;
        SignatureToken token;
        bool operator==(const CacheKey&) const = default;
    };
    struct CacheHash {
        std::size_t operator()(const CacheKey& k) const noexcept {
            std::uint64_t a = 0, b = 0;
            std::memcpy(&a, k.digest.data(), 8);
            std::memcpy(&b, k.token.bytes.data(), 8);
            return static_cast<std::size_t>(Rng::mix(a ^ (b * 31) ^ static_cast<std::uint64_t>(k.signer)));
        }
    };
    static CacheKey key_of(const Signature& s) { return {s.signer.value(), s.digest, s.token}; }

    std::unique_ptr<SignatureScheme> scheme_;
    FaultSet faults_;
    std::unordered_set<CacheKey, CacheHash> honest_ledger_;
    std::unordered_map<CacheKey, bool, CacheHash> cache_;
    std::uint64_t forgeries_accepted_ = 0;
    std::uint64_t honest_rejected_ = 0;
};

}  // namespace bapred
