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

#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <sstream>

#include "bapred/harness/metrics.hpp"
#include "bapred/harness/scenario_file.hpp"
#include "bapred/harness/sweep.hpp"
#include "support.hpp"

using namespace bapred;
using namespace bapred::test;

namespace {

std::vector<nlohmann::json> lines_of(const std::string& out) {
    std::vector<nlohmann::json> v;
    std::istringstream in(out);
    for (std::string line; std::getline(in, line);) v.push_back(nlohmann::json::parse(line));
    return v;
}

SweepSummary sweep(const std::string& text, std::string& out, unsigned workers = 1) {
    std::ostringstream sink;
    SweepOptions opt;
    opt.workers = workers;
    const auto summary = run_sweep(parse_sweep_text(text), sink, opt);
    out = sink.str();
    return summary;
}

}  // namespace

TEST_CASE("syntax errors report line and column", "[harness][file]") {
    const std::string text = "{\n  \"schema\": \"bapred.scenario/1\",\n  \"n\": ,\n}";
    try {
        parse_sweep_text(text);
        FAIL("expected a parse error");
    } catch (const ScenarioFileError& e) {
        CHECK(e.line() == 3);
        CHECK(e.column() == 8);
        CHECK(std::string(e.what()).rfind("line 3, column 8: ", 0) == 0);
    }
}

TEST_CASE("field errors point at the offending key", "[harness][file]") {
    const std::string text = "{\"schema\": \"bapred.scenario/1\",\n \"n\": 7,\n \"adversry\": \"silent\"}";
    try {
        parse_sweep_text(text);
        FAIL("expected a field error");
    } catch (const ScenarioFileError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("unknown field") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_sweep_text("{\"n\": 7}"), ScenarioFileError);  // no schema
    CHECK_THROWS_AS(parse_sweep_text(R"({"schema": "bapred.scenario/1", "n": 7, "adversary": "telepath"})"),
                    ScenarioFileError);
    CHECK_THROWS_AS(parse_sweep_text(R"({"schema": "bapred.scenario/1", "n": 7, "f": "3x"})"), ScenarioFileError);
    CHECK_THROWS_AS(parse_sweep_text(R"({"schema": "bapred.scenario/1", "n": 7, "inputs": "zigzag"})"),
                    ScenarioFileError);
}

TEST_CASE("axis expressions", "[harness][file]") {
    CHECK(parse_axis_expr("4n").eval(10, 3) == 40);
    CHECK(parse_axis_expr("t/2").eval(10, 3) == 1);
    CHECK(parse_axis_expr("n").eval(10, 3) == 10);
    CHECK(parse_axis_expr(6).eval(10, 3) == 6);
    CHECK_THROWS_AS(parse_axis_expr("n/0"), ConfigError);
}

TEST_CASE("infeasible points are skipped with a reason, the rest still run", "[harness][sweep]") {
    std::string out;
    const auto s = sweep(R"({"schema": "bapred.scenario/1", "n": 7, "f": 2, "B": [0, 1000], "allocation": "auto",
                            "adversary": ["equivocator", "chain-withholder"], "seeds": [3]})",
                         out);
    CHECK(s.points == 4);
    CHECK(s.executed == 1);
    REQUIRE(s.skipped.size() == 3);
    CHECK(s.skipped[0].second.find("adversary needs signatures") != std::string::npos);
    CHECK(s.skipped[1].second.find("not realizable") != std::string::npos);
    CHECK(s.violations.empty());
    CHECK(lines_of(out).size() == 1);

    const auto bad_t = parse_sweep_text(R"({"schema": "bapred.scenario/1", "n": 6, "t": 2})");
    REQUIRE(bad_t.size() == 1);
    CHECK_FALSE(bad_t[0].scenario);
    CHECK(bad_t[0].skipped.find("resilience") != std::string::npos);
}

TEST_CASE("a one-point sweep writes one passing record that replays", "[harness][record]") {
    std::string out;
    const auto s = sweep(R"({"schema": "bapred.scenario/1", "n": 10, "f": 3, "B": "n", "adversary": "split-brain",
                            "inputs": "split", "seeds": [5]})",
                         out);
    CHECK(s.executed == 1);
    CHECK(s.violations.empty());
    const auto records = lines_of(out);
    REQUIRE(records.size() == 1);
    const auto& r = records[0];
    CHECK(r["schema"] == "bapred.record/1");
    CHECK(r["index"] == 0);
    CHECK(r["n"] == 10);
    CHECK(r["f"] == 3);
    CHECK(r["B"] == 10);
    CHECK(r["inputs"] == nlohmann::json({0, 0, 0, 0, 0, 1, 1, 1, 1, 1}));
    CHECK(r["pass"] == true);
    CHECK(r["failures"].empty());
    CHECK(r["verdicts"]["agreement"] == true);
    CHECK(r["messages"].contains("classify"));
    for (const char* key : {"B_realized", "k_A", "rounds", "messages_total", "decision", "phases", "alpha"})
        CHECK(r.contains(key));

    std::string line = out.substr(0, out.size() - 1);
    CHECK(replay_record(line) == line);
    CHECK_THROWS_AS(replay_record(R"({"schema": "other"})"), ConfigError);
}

TEST_CASE("records come out in point order with several workers", "[harness][sweep]") {
    const std::string text = R"({"schema": "bapred.scenario/1", "n": [7, 10], "f": ["t"], "B": [0, "n"],
                                 "adversary": ["silent", "equivocator"], "seeds": {"from": 1, "count": 3}})";
    std::string serial, parallel;
    sweep(text, serial, 1);
    const auto s = sweep(text, parallel, 4);
    CHECK(s.executed == 24);
    CHECK(serial == parallel);
    const auto records = lines_of(parallel);
    for (std::size_t i = 0; i < records.size(); ++i) CHECK(records[i]["index"] == i);
    // The seed varies fastest.
    CHECK(records[0]["seed"] == 1);
    CHECK(records[1]["seed"] == 2);
    CHECK(records[3]["adversary"]["name"] == "equivocator");
    CHECK(s.axes.at("n").at("7").runs == 12);
}

TEST_CASE("rounds grow at most one doubling per doubling of B", "[harness][sweep]") {
    const std::string text = R"({"schema": "bapred.scenario/1", "n": 60, "t": 19, "f": 19, "B": [0, "n", "4n", "16n"],
                                 "allocation": "adversarial-worst", "adversary": ["equivocator", "split-brain"],
                                 "seeds": [1, 2]})";
    std::string out;
    const auto s = sweep(text, out);
    REQUIRE(s.executed == 16);
    CHECK(s.violations.empty());

    const auto& by_b = s.axes.at("B");
    std::vector<double> mean;
    for (const char* b : {"0", "60", "240", "960"}) mean.push_back(by_b.at(b).rounds / static_cast<double>(by_b.at(b).runs));
    // Integer values are listed numerically, not as text.
    CHECK(by_b.begin()->first == "0");
    CHECK(std::next(by_b.begin())->first == "60");

    const auto cfg = WrapperConfig::make(Variant::unauthenticated, 19);
    CHECK(mean[0] <= static_cast<double>(cfg.rounds_through(2)));
    for (std::size_t i = 1; i < mean.size(); ++i) {
        INFO("B step " << i);
        CHECK(mean[i] >= mean[i - 1] - static_cast<double>(cfg.phase_rounds(1)));
        CHECK(mean[i] <= 2.0 * mean[i - 1] + static_cast<double>(cfg.rounds_through(1)));
    }
}

TEST_CASE("inputs patterns", "[harness][file]") {
    const auto points = parse_sweep_text(
        R"({"schema": "bapred.scenario/1", "n": 5, "domain": 3, "inputs": ["alternating", "split", "unanimous-2"]})");
    REQUIRE(points.size() == 3);
    CHECK(points[0].scenario->inputs == std::vector<Value>{0, 1, 2, 0, 1});
    CHECK(points[1].scenario->inputs == std::vector<Value>{0, 0, 0, 1, 1});
    CHECK(points[2].scenario->inputs == std::vector<Value>{2, 2, 2, 2, 2});
}

TEST_CASE("a sweep stops at the first violation unless told otherwise", "[harness][sweep]") {
    const std::string text = R"({"schema": "bapred.scenario/1", "n": 4, "faulty": [1], "B": 0,
                                 "allocation": "concentrated-on-honest", "adversary": "equivocator",
                                 "inputs": ["unanimous-1", "unanimous-0"], "seeds": [1], "mutant": true})";
    std::string out;
    const auto s = sweep(text, out);
    REQUIRE(s.violations.size() == 1);
    CHECK(s.aborted);
    CHECK(s.violations[0].index == 0);
    CHECK(scenario_from_json(nlohmann::json::parse(s.violations[0].scenario)).skip_grade_guard);

    std::ostringstream sink;
    SweepOptions opt;
    opt.abort_on_violation = false;
    const auto all = run_sweep(parse_sweep_text(text), sink, opt);
    CHECK_FALSE(all.aborted);
    CHECK(all.executed == 2);
}

TEST_CASE("verification flags a corrupted decision and names both processes", "[harness][verify]") {
    const auto s = scenario(Variant::unauthenticated, 7, ids({6}), constant(7, 1), "equivocator");
    auto r = run_execution(s);
    auto v = verify_execution(r, s);
    CHECK(v.all_pass());
    CHECK(std::any_of(v.verdicts.begin(), v.verdicts.end(), [](const Verdict& x) { return x.property == "strong-unanimity"; }));

    r.decisions[2] = 0;
    v = verify_execution(r, s);
    REQUIRE_FALSE(v.all_pass());
    bool agreement_failed = false;
    for (const auto* f : v.failures()) {
        if (f->property != "agreement") continue;
        agreement_failed = true;
        CHECK(f->detail == "p1 decided 1, p3 decided 0");
    }
    CHECK(agreement_failed);

    r.return_rounds[0] = -1;
    v = verify_execution(r, s);
    const auto failed = v.failures();
    CHECK(std::any_of(failed.begin(), failed.end(), [](const Verdict* x) { return x->property == "termination"; }));
}

TEST_CASE("worker count follows BAPRED_WORKERS", "[harness][sweep]") {
    ::setenv("BAPRED_WORKERS", "3", 1);
    CHECK(default_workers() == 3);
    ::setenv("BAPRED_WORKERS", "zero", 1);
    CHECK(default_workers() >= 1);
    ::unsetenv("BAPRED_WORKERS");
    CHECK(default_workers() >= 1);
}
