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
#include <atomic>
#include <cctype>
#include <condition_variable>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "bapred/harness/metrics.hpp"

namespace bapred {

/// Worker count: BAPRED_WORKERS if set, else the hardware concurrency.
inline unsigned default_workers() {
    if (const char* env = std::getenv("BAPRED_WORKERS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

struct SweepOptions {
    unsigned workers = 0;  // 0 = default_workers()
    bool abort_on_violation = true;
};

struct SweepViolation {
    std::size_t index = 0;
    std::string scenario;  // full reproducing scenario, JSON
    std::vector<Verdict> failures;
};

struct AxisAggregate {
    std::size_t runs = 0;
    double rounds = 0;
    double messages = 0;
};

/// Orders axis values numerically when both are integers, else as text.
struct AxisValueLess {
    bool operator()(const std::string& a, const std::string& b) const {
        auto numeric = [](const std::string& s) {
            return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
        };
        if (numeric(a) && numeric(b) && a.size() != b.size()) return a.size() < b.size();
        return a < b;
    }
};

struct SweepSummary {
    std::size_t points = 0;
    std::size_t executed = 0;
    std::vector<std::pair<std::size_t, std::string>> skipped;
    std::vector<SweepViolation> violations;
    bool aborted = false;
    /// axis name -> axis value -> totals (divide by runs for the mean).
    std::map<std::string, std::map<std::string, AxisAggregate, AxisValueLess>> axes;
};

/// Executes every feasible point, writing one record line per execution to
/// `sink` in point order regardless of which worker finished first.
inline SweepSummary run_sweep(const std::vector<SweepPoint>& points, std::ostream& sink, SweepOptions opt = {}) {
    SweepSummary summary;
    summary.points = points.size();
    const unsigned workers = opt.workers ? opt.workers : default_workers();

    struct Slot {
        bool done = false;
        std::string line;
        VerdictSet verdicts;
        std::int64_t rounds = 0;
        std::int64_t messages = 0;
        std::string error;
    };
    std::vector<Slot> slots(points.size());
    std::mutex mu;
    std::condition_variable cv;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};

    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= points.size() || stop.load()) return;
            Slot s;
            if (points[i].scenario) {
                try {
                    s.line = execute_record(points[i].index, *points[i].scenario, &s.verdicts);
                    const auto j = nlohmann::json::parse(s.line);
                    s.rounds = j["rounds"].get<std::int64_t>();
                    s.messages = j["messages_total"].get<std::int64_t>();
                } catch (const std::exception& e) {
                    s.error = e.what();
                }
            }
            s.done = true;
            {
                std::lock_guard<std::mutex> lk(mu);
                slots[i] = std::move(s);
            }
            cv.notify_all();
        }
    };

    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);

    for (std::size_t i = 0; i < points.size(); ++i) {
        Slot s;
        {
            std::unique_lock<std::mutex> lk(mu);
            cv.wait(lk, [&] { return slots[i].done || (stop.load() && next.load() <= i); });
            if (!slots[i].done) break;
            s = std::move(slots[i]);
        }
        const SweepPoint& p = points[i];
        if (!p.scenario) {
            summary.skipped.emplace_back(p.index, p.skipped);
            continue;
        }
        if (!s.error.empty()) {
            SweepViolation v{p.index, to_json(*p.scenario).dump(), {{"execution", false, s.error}}};
            summary.violations.push_back(std::move(v));
            if (opt.abort_on_violation) {
                stop.store(true);
                summary.aborted = true;
                break;
            }
            continue;
        }
        sink << s.line << '\n';
        ++summary.executed;
        const Scenario& sc = *p.scenario;
        auto bump = [&](const std::string& axis, const std::string& value) {
            auto& a = summary.axes[axis][value];
            ++a.runs;
            a.rounds += static_cast<double>(s.rounds);
            a.messages += static_cast<double>(s.messages);
        };
        bump("variant", to_string(sc.variant));
        bump("n", std::to_string(sc.n));
        bump("f", std::to_string(sc.f()));
        bump("B", std::to_string(sc.budget));
        bump("adversary", sc.adversary.name);
        if (!s.verdicts.all_pass()) {
            SweepViolation v{p.index, to_json(sc).dump(), {}};
            for (const auto* f : s.verdicts.failures()) v.failures.push_back(*f);
            summary.violations.push_back(std::move(v));
            if (opt.abort_on_violation) {
                stop.store(true);
                summary.aborted = true;
                break;
            }
        }
    }
    stop.store(true);
    cv.notify_all();
    for (auto& t : pool) t.join();
    sink.flush();
    return summary;
}

inline void print_summary(std::ostream& os, const SweepSummary& s) {
    os << "points " << s.points << ", executed " << s.executed << ", skipped " << s.skipped.size() << ", violations "
       << s.violations.size() << (s.aborted ? " (aborted)" : "") << '\n';
    for (const auto& [index, why] : s.skipped) os << "  skipped #" << index << ": " << why << '\n';
    for (const auto& [axis, values] : s.axes) {
        os << "  " << std::left << std::setw(10) << axis << std::right << std::setw(8) << "runs" << std::setw(14)
           << "mean rounds" << std::setw(16) << "mean messages" << '\n';
        for (const auto& [value, a] : values) {
            os << "    " << std::left << std::setw(20) << value << std::right << std::setw(6) << a.runs << std::fixed
               << std::setprecision(1) << std::setw(14) << a.rounds / static_cast<double>(a.runs) << std::setw(16)
               << a.messages / static_cast<double>(a.runs) << '\n';
        }
    }
    for (const auto& v : s.violations) {
        os << "VIOLATION at point #" << v.index << '\n';
        for (const auto& f : v.failures) os << "  " << f.property << ": " << f.detail << '\n';
        os << "  reproduce with scenario: " << v.scenario << '\n';
    }
}

}  // namespace bapred
