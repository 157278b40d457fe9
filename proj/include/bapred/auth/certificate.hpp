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
#include <memory>
#include <span>
#include <vector>

#include "bapred/auth/signature.hpp"

namespace bapred {

/// Content of a committee nomination for `subject`.
inline Digest committee_content(ProcessId subject) {
    return CanonicalEncoder().text("COMMITTEE").process(subject).finish();
}

/// Proof that `subject` was nominated by enough distinct processes. Built
/// only through the factories so the digest always matches the contents.
class CommitteeCertificate {
 public:
    static std::shared_ptr<const CommitteeCertificate> make(ProcessId subject, std::vector<Signature> signatures) {
        std::sort(signatures.begin(), signatures.end(),
                  [](const Signature& a, const Signature& b) { return a.signer < b.signer; });
        CanonicalEncoder e;
        e.text("CERT").process(subject);
        for (const auto& s : signatures) e.process(s.signer).digest(s.digest).blob(s.token.view());
        return std::shared_ptr<const CommitteeCertificate>(
            new CommitteeCertificate(subject, std::move(signatures), e.finish()));
    }

    ProcessId subject() const { return subject_; }
    const std::vector<Signature>& signatures() const { return signatures_; }
    const Digest& digest() const { return digest_; }

    std::vector<ProcessId> signers() const {
        std::vector<ProcessId> out;
        for (const auto& s : signatures_) out.push_back(s.signer);
        return out;
    }

    /// At least t+1 signatures over the nomination of `expected_subject`,
    /// every one valid, no signer repeated.
    bool valid_for(ProcessId expected_subject, int t, SignatureService& svc) const {
        if (subject_ != expected_subject) return false;
        if (checked_t_ == t) return valid_;
        checked_t_ = t;
        valid_ = check(t, svc);
        return valid_;
    }

 private:
    CommitteeCertificate(ProcessId subject, std::vector<Signature> sigs, Digest digest)
        : subject_(subject), signatures_(std::move(sigs)), digest_(digest) {}

    bool check(int t, SignatureService& svc) const {
        if (static_cast<int>(signatures_.size()) < t + 1) return false;
        const Digest content = committee_content(subject_);
        for (std::size_t i = 0; i < signatures_.size(); ++i) {
            if (i > 0 && signatures_[i].signer == signatures_[i - 1].signer) return false;
            if (!svc.verify(signatures_[i], signatures_[i].signer, content)) return false;
        }
        return true;
    }

    ProcessId subject_;
    std::vector<Signature> signatures_;
    Digest digest_;
    // Executions are single-threaded and never share certificates, so a
    // memoized verdict per threshold is safe.
    mutable int checked_t_ = -1;
    mutable bool valid_ = false;
};

using CertificatePtr = std::shared_ptr<const CommitteeCertificate>;

inline bool is_committee_certificate(const CertificatePtr& cc, ProcessId subject, int t, SignatureService& svc) {
    return cc && cc->valid_for(subject, t, svc);
}

/// Keeps the valid nominations of `subject` (one per signer) and, if at least
/// t+1 remain, certifies with the t+1 smallest signer identifiers.
inline CertificatePtr assemble_committee_certificate(ProcessId subject, std::span<const Signature> sigs, int t,
                                                     SignatureService& svc) {
    const Digest content = committee_content(subject);
    std::vector<Signature> valid;
    for (const auto& s : sigs) {
        if (!s.signer.valid_for(svc.faults().n())) continue;
        if (!svc.verify(s, s.signer, content)) continue;
        const bool seen = std::any_of(valid.begin(), valid.end(), [&](const Signature& v) { return v.signer == s.signer; });
        if (!seen) valid.push_back(s);
    }
    if (static_cast<int>(valid.size()) < t + 1) return nullptr;
    std::sort(valid.begin(), valid.end(), [](const Signature& a, const Signature& b) { return a.signer < b.signer; });
    valid.resize(static_cast<std::size_t>(t + 1));
    return CommitteeCertificate::make(subject, std::move(valid));
}

}  // namespace bapred
