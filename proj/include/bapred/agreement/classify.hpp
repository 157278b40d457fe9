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

#include <optional>
#include <vector>

#include "bapred/predictions.hpp"
#include "bapred/sim/engine.hpp"

namespace bapred {

/// The voting round: everyone broadcasts its prediction vector, and bit j of
/// the classification is set iff a strict majority of senders (counting
/// oneself) predicted p_j honest. A sender that sends several vectors
/// supports a bit if any of them sets it.
inline std::vector<ClassificationVector> classify(Execution& ex, const std::vector<PredictionVector>& predictions,
                                                  const std::vector<bool>& active) {
    const int n = ex.n();
    ex.context().step = 1;
    ex.context().steps = 1;
    auto out = ex.outboxes();
    for (int i = 0; i < n; ++i)
        if (active[static_cast<std::size_t>(i)])
            out[static_cast<std::size_t>(i)].broadcast(make_payload(PredictionMsg{predictions[static_cast<std::size_t>(i)]}));
    auto in = ex.exchange(ProtocolTag::classify, out);

    std::vector<ClassificationVector> result;
    result.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        std::vector<std::optional<PredictionVector>> merged(static_cast<std::size_t>(n));
        for (const auto& d : in[static_cast<std::size_t>(i)]) {
            const auto* m = d.as<PredictionMsg>();
            if (!m || m->bits.size() != n) continue;
            auto& slot = merged[d.sender.index()];
            if (!slot) {
                slot = m->bits;
                continue;
            }
            for (int j = 1; j <= n; ++j)
                if (m->bits[ProcessId(j)]) slot->set(ProcessId(j), true);
        }
        std::vector<PredictionVector> votes;
        for (auto& s : merged)
            if (s) votes.push_back(std::move(*s));
        result.push_back(tally_classification(votes, n));
    }
    return result;
}

}  // namespace bapred
