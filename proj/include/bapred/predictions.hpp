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
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bapred/core.hpp"

namespace bapred {

/// n-bit string indexed by process; bit j set means "p_j is honest".
/// Tag distinguishes prediction vectors from post-vote classifications.
template <typename Tag>
class ProcessBits {
 public:
    ProcessBits() = default;
    explicit ProcessBits(int n, bool fill = false) : bits_(static_cast<std::size_t>(n), fill) {}
    explicit ProcessBits(std::vector<bool> bits) : bits_(std::move(bits)) {}

    int size() const { return static_cast<int>(bits_.size()); }
    bool operator[](ProcessId p) const { return bits_[p.index()]; }
    void set(ProcessId p, bool value) { bits_[p.index()] = value; }
    void flip(ProcessId p) { bits_[p.index()] = !bits_[p.index()]; }
    const std::vector<bool>& bits() const { return bits_; }
    int count() const { return static_cast<int>(std::count(bits_.begin(), bits_.end(), true)); }

    /// '1' for honest, '0' for faulty; the scenario-file encoding.
    std::string to_string() const {
        std::string s;
        s.reserve(bits_.size());
        for (bool b : bits_) s.push_back(b ? '1' : '0');
        return s;
    }

    static ProcessBits from_string(std::string_view s) {
        std::vector<bool> bits;
        bits.reserve(s.size());
        for (char c : s) {
            if (c != '0' && c != '1') throw ConfigError("bit string may only contain '0' and '1'");
            bits.push_back(c == '1');
        }
        return ProcessBits(std::move(bits));
    }

    bool operator==(const ProcessBits&) const = default;

 private:
    std::vector<bool> bits_;
};

struct PredictionTag {};
struct ClassificationTag {};
using PredictionVector = ProcessBits<PredictionTag>;
using ClassificationVector = ProcessBits<ClassificationTag>;

/// The classification c-hat that marks exactly the honest processes.
inline ClassificationVector correct_classification(const FaultSet& faults) {
    ClassificationVector c(faults.n(), true);
    for (ProcessId p : faults.faulty_ids()) c.set(p, false);
    return c;
}

/// Leader priority order: processes classified honest in increasing id,
/// then those classified faulty in increasing id.
class Ordering {
 public:
    explicit Ordering(std::vector<ProcessId> order) : order_(std::move(order)), position_(order_.size()) {
        for (std::size_t i = 0; i < order_.size(); ++i) position_[order_[i].index()] = static_cast<int>(i) + 1;
    }

    int size() const { return static_cast<int>(order_.size()); }
    /// 1-based position, matching the position formulas.
    ProcessId at(int position) const { return order_[static_cast<std::size_t>(position - 1)]; }
    int position_of(ProcessId p) const { return position_[p.index()]; }
    const std::vector<ProcessId>& sequence() const { return order_; }

    /// Identifiers at positions first..last (1-based, inclusive), clamped to n.
    std::vector<ProcessId> window(int first, int last) const {
        std::vector<ProcessId> out;
        for (int pos = std::max(first, 1); pos <= std::min(last, size()); ++pos) out.push_back(at(pos));
        return out;
    }

 private:
    std::vector<ProcessId> order_;
    std::vector<int> position_;
};

inline Ordering ordering(const ClassificationVector& c) {
    std::vector<ProcessId> order;
    order.reserve(static_cast<std::size_t>(c.size()));
    for (int i = 1; i <= c.size(); ++i)
        if (c[ProcessId(i)]) order.emplace_back(i);
    for (int i = 1; i <= c.size(); ++i)
        if (!c[ProcessId(i)]) order.emplace_back(i);
    return Ordering(std::move(order));
}

/// Vote threshold ceil((n+1)/2).
constexpr int classification_threshold(int n) { return n / 2 + 1; }

/// Tallies one classification from the multiset of received vectors
/// (including the caller's own). Vectors of the wrong length are discarded.
inline ClassificationVector tally_classification(std::span<const PredictionVector> received, int n) {
    std::vector<int> ones(static_cast<std::size_t>(n), 0);
    for (const auto& a : received) {
        if (a.size() != n) continue;
        for (int j = 0; j < n; ++j)
            if (a.bits()[static_cast<std::size_t>(j)]) ++ones[static_cast<std::size_t>(j)];
    }
    ClassificationVector c(n);
    const int threshold = classification_threshold(n);
    for (int j = 0; j < n; ++j) c.set(ProcessId(j + 1), ones[static_cast<std::size_t>(j)] >= threshold);
    return c;
}

struct PredictionErrorReport {
    std::int64_t faulty_as_honest = 0;  // B_F
    std::int64_t honest_as_faulty = 0;  // B_H
    std::int64_t total() const { return faulty_as_honest + honest_as_faulty; }
};

/// Counts incorrect bits held by honest processes; bits held by faulty
/// processes are ignored.
inline PredictionErrorReport prediction_errors(std::span<const PredictionVector> predictions,
                                               const FaultSet& faults) {
    PredictionErrorReport report;
    for (ProcessId holder : faults.honest_ids()) {
        const auto& a = predictions[holder.index()];
        for (int j = 1; j <= faults.n(); ++j) {
            const ProcessId p(j);
            if (faults.faulty(p) && a[p]) ++report.faulty_as_honest;
            if (faults.honest(p) && !a[p]) ++report.honest_as_faulty;
        }
    }
    return report;
}

struct MisclassificationReport {
    std::vector<ProcessId> misclassified_honest;
    std::vector<ProcessId> misclassified_faulty;
    ClassificationVector correct;

    int k_h() const { return static_cast<int>(misclassified_honest.size()); }
    int k_f() const { return static_cast<int>(misclassified_faulty.size()); }
    int k_a() const { return k_h() + k_f(); }
    bool misclassified(ProcessId p) const {
        return std::binary_search(misclassified_honest.begin(), misclassified_honest.end(), p) ||
               std::binary_search(misclassified_faulty.begin(), misclassified_faulty.end(), p);
    }
};

/// A process counts once if any honest process misclassifies it.
inline MisclassificationReport misclassification_report(
    const std::map<ProcessId, ClassificationVector>& classifications, const FaultSet& faults) {
    MisclassificationReport report{{}, {}, correct_classification(faults)};
    for (int j = 1; j <= faults.n(); ++j) {
        const ProcessId p(j);
        const bool wrong = std::any_of(classifications.begin(), classifications.end(),
                                       [&](const auto& kv) { return kv.second[p] != report.correct[p]; });
        if (!wrong) continue;
        (faults.honest(p) ? report.misclassified_honest : report.misclassified_faulty).push_back(p);
    }
    return report;
}

enum class AllocationPolicy { concentrated_on_faulty, concentrated_on_honest, spread_uniform, adversarial_worst };

inline const char* to_string(AllocationPolicy p) {
    switch (p) {
        case AllocationPolicy::concentrated_on_faulty: return "concentrated-on-faulty";
        case AllocationPolicy::concentrated_on_honest: return "concentrated-on-honest";
        case AllocationPolicy::spread_uniform: return "spread-uniform";
        case AllocationPolicy::adversarial_worst: return "adversarial-worst";
    }
    return "?";
}

inline AllocationPolicy parse_allocation_policy(std::string_view s) {
    for (auto p : {AllocationPolicy::concentrated_on_faulty, AllocationPolicy::concentrated_on_honest,
                   AllocationPolicy::spread_uniform, AllocationPolicy::adversarial_worst}) {
        if (s == to_string(p)) return p;
    }
    throw ConfigError("unknown allocation policy: " + std::string(s));
}

struct PredictionSet {
    std::vector<PredictionVector> vectors;  // indexed by process; faulty entries are uncounted
    std::int64_t requested = 0;
    PredictionErrorReport realized;
    bool exact() const { return realized.total() == requested; }
};

namespace detail {

/// Bits flipped in a fixed order until the budget is spent. One bit is a
/// (holder, subject) pair with an honest holder.
struct FlipPlan {
    const FaultSet& faults;
    std::vector<PredictionVector>& vectors;
    std::int64_t remaining;

    bool flipped(ProcessId holder, ProcessId subject) const {
        return vectors[holder.index()][subject] != faults.honest(subject);
    }
    void flip(ProcessId holder, ProcessId subject) {
        if (remaining <= 0 || flipped(holder, subject)) return;
        vectors[holder.index()].flip(subject);
        --remaining;
    }
    /// Flips `count` more holders' bits about `subject` (lowest holder ids first).
    void flip_holders(ProcessId subject, std::int64_t count) {
        for (ProcessId holder : faults.honest_ids()) {
            if (count <= 0 || remaining <= 0) return;
            if (flipped(holder, subject)) continue;
            flip(holder, subject);
            --count;
        }
    }
};

}  // namespace detail

/// Largest budget the policy can realize for this fault set.
inline std::int64_t max_realizable_budget(const FaultSet& faults, AllocationPolicy policy) {
    const std::int64_t h = faults.n() - faults.f();
    switch (policy) {
        case AllocationPolicy::concentrated_on_faulty: return h * faults.f();
        case AllocationPolicy::concentrated_on_honest: return h * h;
        case AllocationPolicy::spread_uniform:
        case AllocationPolicy::adversarial_worst: return h * faults.n();
    }
    return 0;
}

/// Builds every process's prediction vector with exactly `budget` incorrect
/// honest-held bits (or the policy maximum; the realized count is reported).
/// Faulty processes hold the complement of c-hat.
inline PredictionSet generate_predictions(const FaultSet& faults, std::int64_t budget, AllocationPolicy policy,
                                          std::uint64_t seed) {
    if (budget < 0) throw ConfigError("prediction error budget must be non-negative");
    const int n = faults.n();
    const ClassificationVector c_hat = correct_classification(faults);

    PredictionSet out;
    out.requested = budget;
    out.vectors.assign(static_cast<std::size_t>(n), PredictionVector(c_hat.bits()));
    for (ProcessId p : faults.faulty_ids()) {
        std::vector<bool> complement = c_hat.bits();
        complement.flip();
        out.vectors[p.index()] = PredictionVector(std::move(complement));
    }

    detail::FlipPlan plan{faults, out.vectors, std::min(budget, max_realizable_budget(faults, policy))};
    const auto all_holders = static_cast<std::int64_t>(faults.honest_ids().size());

    switch (policy) {
        case AllocationPolicy::concentrated_on_faulty:
            for (ProcessId j : faults.faulty_ids()) plan.flip_holders(j, all_holders);
            break;
        case AllocationPolicy::concentrated_on_honest:
            for (ProcessId j : faults.honest_ids()) plan.flip_holders(j, all_holders);
            break;
        case AllocationPolicy::spread_uniform: {
            std::vector<std::pair<ProcessId, ProcessId>> bits;
            for (ProcessId holder : faults.honest_ids())
                for (int j = 1; j <= n; ++j) bits.emplace_back(holder, ProcessId(j));
            Rng rng = Rng::stream(seed, stream_id::predictions);
            rng.shuffle(bits);
            for (const auto& [holder, subject] : bits) plan.flip(holder, subject);
            break;
        }
        case AllocationPolicy::adversarial_worst: {
            // Holders needed to flip one process assuming the faulty voters
            // pile onto the same side.
            const std::int64_t need_faulty = std::max<std::int64_t>(1, classification_threshold(n) - faults.f());
            const std::int64_t need_honest =
                std::max<std::int64_t>(1, n - faults.f() - classification_threshold(n) + 1);
            for (ProcessId j : faults.faulty_ids())
                if (plan.remaining >= need_faulty) plan.flip_holders(j, need_faulty);
            for (ProcessId j : faults.honest_ids())
                if (plan.remaining >= need_honest) plan.flip_holders(j, need_honest);
            for (ProcessId j : faults.faulty_ids()) plan.flip_holders(j, all_holders);
            for (ProcessId j : faults.honest_ids()) plan.flip_holders(j, all_holders);
            break;
        }
    }

    out.realized = prediction_errors(out.vectors, faults);
    return out;
}

// ---------------------------------------------------------------------------
// Oracles over classifications. Used by tests and trace verification only.

inline int hamming_distance(const ClassificationVector& a, const ClassificationVector& b) {
    int d = 0;
    for (int j = 1; j <= a.size(); ++j) d += a[ProcessId(j)] != b[ProcessId(j)];
    return d;
}

/// Every misclassified faulty process had at least ceil((n+1)/2)-f honest
/// holders with the wrong bit; every misclassified honest one at least
/// ceil(n/2)-f. Returns the first offending process, if any.
inline std::optional<ProcessId> vote_bound_violation(std::span<const PredictionVector> predictions,
                                                     const MisclassificationReport& report,
                                                     const FaultSet& faults) {
    const int n = faults.n();
    auto wrong_holders = [&](ProcessId subject) {
        int count = 0;
        for (ProcessId holder : faults.honest_ids())
            count += predictions[holder.index()][subject] != faults.honest(subject);
        return count;
    };
    for (ProcessId p : report.misclassified_faulty)
        if (wrong_holders(p) < classification_threshold(n) - faults.f()) return p;
    for (ProcessId p : report.misclassified_honest)
        if (wrong_holders(p) < (n + 1) / 2 - faults.f()) return p;
    return std::nullopt;
}

/// Largest G subset of H contained in positions first..last of every
/// honest ordering (the intersection is the maximal such set).
inline std::vector<ProcessId> core_set(std::span<const Ordering> honest_orderings, const FaultSet& faults, int first,
                                       int last) {
    std::vector<ProcessId> g;
    for (ProcessId p : faults.honest_ids()) {
        const bool everywhere = std::all_of(honest_orderings.begin(), honest_orderings.end(), [&](const Ordering& o) {
            const int pos = o.position_of(p);
            return pos >= first && pos <= last;
        });
        if (everywhere) g.push_back(p);
    }
    return g;
}

/// Checks the core-set lemma for every window with first+k_A-1 < last <= n-t-k_A.
/// Returns the first failing window.
inline std::optional<std::pair<int, int>> core_set_violation(std::span<const Ordering> honest_orderings,
                                                             const FaultSet& faults, int t, int k_a) {
    const int n = faults.n();
    for (int first = 1; first <= n; ++first) {
        for (int last = first + k_a; last <= n - t - k_a; ++last) {
            const auto g = core_set(honest_orderings, faults, first, last);
            if (static_cast<int>(g.size()) < last - first + 1 - k_a) return std::pair{first, last};
        }
    }
    return std::nullopt;
}

}  // namespace bapred
