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
#include <optional>
#include <span>
#include <vector>

#include "bapred/core.hpp"

namespace bapred {

/// The most frequent value, ties broken towards the smallest. Empty input
/// yields nothing; callers fall back to their own estimate.
inline std::optional<Value> plurality_tiebreak(std::span<const Value> values) {
    if (values.empty()) return std::nullopt;
    std::vector<Value> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    Value best = sorted.front();
    std::size_t best_count = 0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        if (j - i > best_count) {
            best_count = j - i;
            best = sorted[i];
        }
        i = j;
    }
    return best;
}

/// Counts, per value, the distinct senders that sent it. A sender that sends
/// several values counts once towards each of them.
class SenderTally {
 public:
    explicit SenderTally(int n) : n_(n) {}

    void add(ProcessId sender, Value v) {
        Entry& e = entry(v);
        if (!e.seen[sender.index()]) {
            e.seen[sender.index()] = true;
            ++e.count;
        }
    }

    int count(Value v) const {
        for (const auto& e : entries_)
            if (e.value == v) return e.count;
        return 0;
    }

    bool sent(ProcessId sender, Value v) const {
        for (const auto& e : entries_)
            if (e.value == v) return e.seen[sender.index()];
        return false;
    }

    /// Smallest value reaching the threshold.
    std::optional<Value> smallest_with_at_least(int threshold) const {
        std::optional<Value> best;
        for (const auto& e : entries_)
            if (e.count >= threshold && (!best || e.value < *best)) best = e.value;
        return best;
    }

    std::vector<Value> values() const {
        std::vector<Value> out;
        for (const auto& e : entries_) out.push_back(e.value);
        std::sort(out.begin(), out.end());
        return out;
    }

 private:
    struct Entry {
        Value value;
        std::vector<bool> seen;
        int count = 0;
    };

    Entry& entry(Value v) {
        for (auto& e : entries_)
            if (e.value == v) return e;
        entries_.push_back({v, std::vector<bool>(static_cast<std::size_t>(n_), false), 0});
        return entries_.back();
    }

    int n_;
    std::vector<Entry> entries_;
};

}  // namespace bapred
