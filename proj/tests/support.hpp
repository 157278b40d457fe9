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
#include <string>
#include <vector>

#include "bapred/harness/scenario.hpp"

namespace bapred::test {

/// Sends whatever the test installs, for faulty processes only.
class ScriptedAdversary final : public Adversary {
 public:
    std::function<void(AdversaryToolkit&)> script;
    std::string name() const override { return "scripted"; }
    void act(AdversaryToolkit& tk) override {
        if (script) script(tk);
    }
};

inline ExecutionConfig config(int n, int t, std::vector<ProcessId> faulty, Variant v = Variant::unauthenticated,
                              Value domain = 2) {
    ExecutionConfig cfg;
    cfg.n = n;
    cfg.t = t;
    cfg.faulty = std::move(faulty);
    cfg.domain = ValueDomain{domain};
    cfg.variant = v;
    return cfg;
}

inline std::vector<ProcessId> ids(std::initializer_list<int> xs) {
    std::vector<ProcessId> out;
    for (int x : xs) out.emplace_back(x);
    return out;
}

inline Scenario scenario(Variant v, int n, std::vector<ProcessId> faulty, std::vector<Value> inputs,
                         std::string adversary = "none", std::int64_t budget = 0, std::uint64_t seed = 1) {
    Scenario s;
    s.variant = v;
    s.n = n;
    s.t = default_t(v, n);
    s.faulty = std::move(faulty);
    s.inputs = std::move(inputs);
    s.budget = budget;
    s.adversary.name = std::move(adversary);
    s.seed = seed;
    return s;
}

inline std::vector<Value> constant(int n, Value v) { return std::vector<Value>(static_cast<std::size_t>(n), v); }

inline std::vector<Value> alternating(int n) {
    std::vector<Value> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i % 2;
    return v;
}

inline std::int64_t tag_messages(const ExecutionResult& r, ProtocolTag tag) {
    return r.honest_messages_by_tag[static_cast<std::size_t>(tag)];
}

}  // namespace bapred::test
