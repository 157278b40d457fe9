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

#include <cstdint>
#include <string>

#include <json.hpp>

#include "bapred/harness/scenario.hpp"
#include "bapred/harness/scenario_file.hpp"
#include "bapred/harness/verify.hpp"

namespace bapred {

inline constexpr const char* record_schema = "bapred.record/1";

/// One flat record per execution: the scenario fields at top level (so a
/// record is itself a replayable scenario), then measurements and verdicts.
inline nlohmann::json make_record(std::size_t index, const Scenario& s, const ExecutionResult& r, const VerdictSet& v) {
    nlohmann::json j = to_json(s);
    j["schema"] = record_schema;
    j["index"] = index;
    j["f"] = s.f();
    j["B_realized"] = r.realized.total();
    j["B_F"] = r.realized.faulty_as_honest;
    j["B_H"] = r.realized.honest_as_faulty;
    if (r.misclassification) {
        j["k_A"] = r.misclassification->k_a();
        j["k_H"] = r.misclassification->k_h();
        j["k_F"] = r.misclassification->k_f();
    } else {
        j["k_A"] = j["k_H"] = j["k_F"] = nullptr;
    }
    j["rounds"] = r.rounds_elapsed;
    j["setup_rounds"] = r.setup_rounds;
    j["messages_total"] = r.honest_messages_total;
    nlohmann::json by_tag = nlohmann::json::object();
    for (std::size_t i = 0; i < protocol_tag_count; ++i)
        if (r.rounds_by_tag[i] > 0) by_tag[std::string(protocol_tag_names[i])] = r.honest_messages_by_tag[i];
    j["messages"] = by_tag;

    const FaultSet faults(s.n, s.faulty);
    nlohmann::json decisions = nlohmann::json::object();
    std::optional<Value> common;
    bool agreed = true;
    for (ProcessId p : faults.honest_ids()) {
        const auto& d = r.decisions[p.index()];
        decisions[std::to_string(p.value())] = d ? nlohmann::json(*d) : nlohmann::json(nullptr);
        if (!d) continue;
        if (!common) common = d;
        else agreed = agreed && *common == *d;
    }
    j["decisions"] = decisions;
    j["decision"] = common && agreed ? nlohmann::json(*common) : nlohmann::json(nullptr);
    j["forgeries_accepted"] = r.forgeries_accepted;
    j["signatures_rejected"] = r.honest_signatures_rejected;

    if (r.wrapper) {
        j["alpha"] = r.wrapper->alpha;
        j["phase_count"] = r.wrapper->phase_count;
        nlohmann::json phases = nlohmann::json::array();
        for (const auto& ph : r.phases) {
            nlohmann::json d = nlohmann::json::array();
            for (ProcessId p : ph.decided) d.push_back(p.value());
            nlohmann::json ret = nlohmann::json::array();
            for (ProcessId p : ph.returned) ret.push_back(p.value());
            phases.push_back({{"phase", ph.phase},
                              {"T", ph.T},
                              {"k", ph.k},
                              {"first_round", ph.first_round},
                              {"last_round", ph.last_round},
                              {"grade1", ph.grade1},
                              {"messages", {{"gc", ph.messages_gc}, {"early", ph.messages_early}, {"class", ph.messages_class}}},
                              {"decided", d},
                              {"returned", ret}});
        }
        j["phases"] = phases;
    }

    nlohmann::json verdicts = nlohmann::json::object();
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& x : v.verdicts) {
        verdicts[x.property] = x.pass;
        if (!x.pass) failures.push_back({{"property", x.property}, {"detail", x.detail}});
    }
    j["verdicts"] = verdicts;
    j["failures"] = failures;
    j["pass"] = v.all_pass();
    return j;
}

/// Runs, verifies and serializes one point; the line carries no trailing newline.
inline std::string execute_record(std::size_t index, const Scenario& s, VerdictSet* verdicts = nullptr) {
    const ExecutionResult r = run_execution(s);
    VerdictSet v = verify_execution(r, s);
    std::string line = make_record(index, s, r, v).dump();
    if (verdicts) *verdicts = std::move(v);
    return line;
}

/// Re-executes the scenario embedded in a record and returns the new line.
inline std::string replay_record(const std::string& line) {
    const auto j = nlohmann::json::parse(line);
    if (j.value("schema", std::string()) != record_schema) throw ConfigError("not a bapred.record/1 line");
    return execute_record(j.at("index").get<std::size_t>(), scenario_from_json(j));
}

}  // namespace bapred
