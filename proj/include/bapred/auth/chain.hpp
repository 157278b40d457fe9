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

#include <functional>
#include <memory>
#include <vector>

#include "bapred/auth/certificate.hpp"

namespace bapred {

class ChainNode;
using ChainPtr = std::shared_ptr<const ChainNode>;

/// One link of a signed relay chain. The innermost link is ⟨x, cc, sig⟩ by
/// the origin; each outer link is ⟨m, cc, sig⟩ over the whole inner chain m.
///
/// Link content:  text "CHAIN", then integer x (innermost) or digest(m),
///                then digest(cc).
/// Chain digest:  text "CHAIN-MSG", digest(content), process signer, blob token.
class ChainNode {
 public:
    static Digest link_content(const ChainPtr& inner, Value x, const CertificatePtr& cc) {
        CanonicalEncoder e;
        e.text("CHAIN");
        if (inner) e.digest(inner->digest());
        else e.integer(x);
        e.digest(cc ? cc->digest() : Digest{});
        return e.finish();
    }

    /// Innermost link; `sig` should be over link_content(nullptr, x, cc).
    static ChainPtr origin(Value x, CertificatePtr cc, Signature sig) {
        return ChainPtr(new ChainNode(nullptr, x, std::move(cc), sig));
    }

    static ChainPtr extend(ChainPtr inner, CertificatePtr cc, Signature sig) {
        const Value x = inner->value();
        return ChainPtr(new ChainNode(std::move(inner), x, std::move(cc), sig));
    }

    /// Signs and builds in one step; `sign` mints for `signer`.
    template <typename SignFn>
    static ChainPtr sign_link(ChainPtr inner, Value x, CertificatePtr cc, SignFn&& sign) {
        const Digest content = link_content(inner, x, cc);
        Signature sig = sign(content);
        return inner ? extend(std::move(inner), std::move(cc), sig) : origin(x, std::move(cc), sig);
    }

    Value value() const { return value_; }
    ProcessId origin_id() const { return origin_; }
    ProcessId signer() const { return sig_.signer; }
    int length() const { return length_; }
    const ChainPtr& inner() const { return inner_; }
    const CertificatePtr& certificate() const { return cc_; }
    const Signature& signature() const { return sig_; }
    const Digest& digest() const { return digest_; }

    std::vector<ProcessId> signers() const {
        std::vector<ProcessId> out;
        for (const ChainNode* n = this; n; n = n->inner_.get()) out.push_back(n->signer());
        return out;
    }

    /// Structural validity independent of origin and length limits: every
    /// certificate is a committee certificate for its link's signer, every
    /// signature verifies over its prefix, and signers are distinct.
    bool well_formed(int t, SignatureService& svc) const {
        if (checked_t_ == t) return valid_;
        checked_t_ = t;
        valid_ = check(t, svc);
        return valid_;
    }

 private:
    ChainNode(ChainPtr inner, Value x, CertificatePtr cc, Signature sig)
        : inner_(std::move(inner)), value_(x), cc_(std::move(cc)), sig_(sig) {
        origin_ = inner_ ? inner_->origin_ : sig_.signer;
        length_ = inner_ ? inner_->length_ + 1 : 1;
        content_ = link_content(inner_, value_, cc_);
        digest_ = CanonicalEncoder().text("CHAIN-MSG").digest(content_).process(sig_.signer).blob(sig_.token.view()).finish();
    }

    bool check(int t, SignatureService& svc) const {
        if (!sig_.signer.valid_for(svc.faults().n())) return false;
        if (!is_committee_certificate(cc_, sig_.signer, t, svc)) return false;
        if (!svc.verify(sig_, sig_.signer, content_)) return false;
        if (!inner_) return true;
        if (!inner_->well_formed(t, svc)) return false;
        for (const ChainNode* n = inner_.get(); n; n = n->inner_.get())
            if (n->signer() == sig_.signer) return false;
        return true;
    }

    ChainPtr inner_;
    Value value_;
    CertificatePtr cc_;
    Signature sig_;
    ProcessId origin_;
    int length_ = 1;
    Digest content_{};
    Digest digest_{};
    mutable int checked_t_ = -1;
    mutable bool valid_ = false;
};

inline bool validate_chain(const ChainPtr& chain, ProcessId expected_origin, int max_length, int t,
                           SignatureService& svc) {
    if (!chain) return false;
    if (chain->origin_id() != expected_origin) return false;
    if (chain->length() < 1 || chain->length() > max_length) return false;
    return chain->well_formed(t, svc);
}

}  // namespace bapred
