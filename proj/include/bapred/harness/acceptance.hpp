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

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bapred/harness/metrics.hpp"
#include "bapred/harness/oracle.hpp"
#include "bapred/harness/sweep.hpp"

namespace bapred {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0;
};

inline std::string format_criterion(const CriterionResult& c) {
    std::ostringstream os;
    os << (c.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << c.detail << " ["
       << std::fixed << std::setprecision(1) << c.seconds << "s]";
    return os.str();
}

/// The safety/liveness grid: every catalog adversary, both variants, random
/// and unanimous inputs, five seeds per point.
inline nlohmann::json safety_grid_document(bool mutant = false) {
    nlohmann::json adversaries = nlohmann::json::array();
    for (const auto& info : strategy_catalog()) adversaries.push_back(info.name);
    nlohmann::json doc = {
        {"schema", scenario_schema},
        {"protocol", "ba-with-predictions"},
        {"variant", {"unauthenticated", "authenticated"}},
        {"n", {4, 7, 16, 40}},
        {"t", "max"},
        {"f", {0, 1, "t/2", "t"}},
        {"B", {0, "n", "4n"}},
        {"allocation", "auto"},
        {"adversary", adversaries},
        {"inputs", {"random", "unanimous-1"}},
        {"seeds", {{"from", 1}, {"count", 5}}},
    };
    if (mutant) doc["mutant"] = true;
    return doc;
}

namespace detail {

inline Scenario acceptance_scenario(ProtocolKind protocol, Variant v, int n, int t, int f, std::int64_t budget,
                                    const std::string& adversary, std::uint64_t seed) {
    Scenario s;
    s.protocol = protocol;
    s.variant = v;
    s.n = n;
    s.t = t;
    s.faulty = draw_fault_set(n, f, seed);
    s.inputs = draw_inputs(n, 2, seed);
    s.budget = budget;
    s.adversary.name = adversary;
    s.seed = seed;
    const FaultSet faults(n, s.faulty);
    const auto policy = auto_policy(faults, budget, seed);
    if (!policy) throw ConfigError("budget not realizable");
    s.allocation = *policy;
    return s;
}

inline std::vector<int> distinct_f(int t) {
    std::vector<int> out;
    for (int f : {0, 1, t / 2, t})
        if (f <= t && std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
    return out;
}

inline std::vector<std::string> catalog_names(Variant v) {
    std::vector<std::string> out;
    for (const auto& info : strategy_catalog())
        if (v == Variant::authenticated || !info.authenticated_only) out.push_back(info.name);
    return out;
}

inline bool verdict_ok(const nlohmann::json& rec, const std::string& name) {
    const auto& v = rec["verdicts"];
    return !v.contains(name) || v[name].get<bool>();
}

}  // namespace detail

/// Runs the acceptance criteria. The safety grid is executed once and its
/// records feed the criteria that are statements about that grid.
class AcceptanceSuite {
 public:
    explicit AcceptanceSuite(std::ostream& log, unsigned workers = 0) : log_(log), workers_(workers) {}

    std::vector<CriterionResult> run_all() {
        std::vector<CriterionResult> out;
        auto timed = [&](auto&& fn) {
            const auto t0 = std::chrono::steady_clock::now();
            CriterionResult c = fn();
            c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (c.id == 1) c.seconds += grid_seconds_;
            log_ << format_criterion(c) << std::endl;
            out.push_back(std::move(c));
        };
        run_grid();
        timed([&] { return safety_liveness(); });
        timed([&] { return exhaustive_oracle(); });
        timed([&] { return classification_bound(); });
        timed([&] { return unauth_class_budgets(); });
        timed([&] { return auth_class_budgets(); });
        timed([&] { return round_scaling(); });
        timed([&] { return message_budgets(); });
        timed([&] { return determinism(); });
        timed([&] { return negative_controls(); });
        return out;
    }

    void run_grid() {
        if (!records_.empty()) return;
        const auto t0 = std::chrono::steady_clock::now();
        const auto points = expand_sweep(safety_grid_document());
        std::ostringstream sink;
        SweepOptions opt;
        opt.workers = workers_;
        opt.abort_on_violation = false;
        grid_summary_ = run_sweep(points, sink, opt);
        std::istringstream in(sink.str());
        for (std::string line; std::getline(in, line);) {
            lines_.push_back(line);
            records_.push_back(nlohmann::json::parse(line));
        }
        grid_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    /// 1: Agreement, Strong Unanimity and Termination on every grid execution.
    CriterionResult safety_liveness() {
        CriterionResult c{1, "safety/liveness grid", false, {}, 0};
        std::size_t agreement = 0, unanimity = 0, termination = 0, unanimous_runs = 0, other = 0;
        std::string first;
        for (const auto& rec : records_) {
            const bool a = detail::verdict_ok(rec, "agreement");
            const bool u = detail::verdict_ok(rec, "strong-unanimity");
            const bool t = detail::verdict_ok(rec, "termination");
            agreement += !a;
            unanimity += !u;
            termination += !t;
            unanimous_runs += rec["verdicts"].contains("strong-unanimity");
            if ((!a || !u || !t) && first.empty()) first = " first failure at point #" + std::to_string(rec["index"].get<int>());
            other += !rec["pass"].get<bool>() && a && u && t;
        }
        std::ostringstream os;
        os << records_.size() << " executions (" << grid_summary_.skipped.size() << " infeasible points skipped, "
           << unanimous_runs << " unanimous-input), agreement failures " << agreement << ", strong-unanimity failures "
           << unanimity << ", termination failures " << termination << ", other verdict failures " << other
           << ", errors " << errors() << first;
        c.detail = os.str();
        c.pass = !records_.empty() && agreement == 0 && unanimity == 0 && termination == 0 && unanimous_runs > 0 &&
                 errors() == 0 && grid_seconds_ < 600;
        return c;
    }

    /// 2: exhaustive enumeration at n=4 (graded consensus, window graded
    /// consensus) and n=5 (implicit-committee broadcast, k=1).
    CriterionResult exhaustive_oracle() {
        CriterionResult c{2, "exhaustive small-instance oracle", true, {}, 0};
        std::ostringstream os;
        for (const auto& rep : {graded_consensus_oracle(4, 1), core_set_oracle(4, 1, 1), committee_oracle(5, 1, 1)}) {
            c.pass = c.pass && rep.pass() && rep.executions > 0;
            os << rep.describe() << "; ";
        }
        c.detail = os.str();
        return c;
    }

    /// 3: k_A * (ceil(n/2) - f) <= B on every grid execution.
    CriterionResult classification_bound() {
        CriterionResult c{3, "classification bound", false, {}, 0};
        std::size_t checked = 0, violated = 0, unrealized = 0;
        for (const auto& rec : records_) {
            if (rec["k_A"].is_null()) continue;
            ++checked;
            const int n = rec["n"], f = rec["f"], k_a = rec["k_A"];
            const std::int64_t b = rec["B_realized"];
            violated += static_cast<std::int64_t>(k_a) * ((n + 1) / 2 - f) > b;
            unrealized += b != rec["B"].get<std::int64_t>();
        }
        std::ostringstream os;
        os << checked << " executions checked, " << violated << " exceed the bound, " << unrealized
           << " with realized B different from requested";
        c.detail = os.str();
        c.pass = checked > 0 && violated == 0 && unrealized == 0;
        return c;
    }

    /// 4: standalone unauthenticated classification agreement under its
    /// preconditions: at most 5(2k+1) rounds and 5n((2k+1)(3k+1)+k) messages.
    CriterionResult unauth_class_budgets() {
        CriterionResult c{4, "unauthenticated classification agreement budgets", false, {}, 0};
        std::size_t runs = 0, excluded = 0, round_over = 0, message_over = 0;
        std::int64_t worst_rounds = std::numeric_limits<std::int64_t>::min();
        std::int64_t worst_messages = std::numeric_limits<std::int64_t>::min();
        for (int n : {20, 40, 60}) {
            const int t = default_t(Variant::unauthenticated, n);
            for (int k : {1, 2, 3}) {
                if (!class_ba_unauth_condition(n, t, k)) continue;
                for (int f : detail::distinct_f(t))
                    for (std::int64_t b : {std::int64_t{0}, std::int64_t{n / 2}, std::int64_t{n}})
                        for (const auto& adv : detail::catalog_names(Variant::unauthenticated))
                            for (std::uint64_t seed = 1; seed <= 2; ++seed) {
                                Scenario s = detail::acceptance_scenario(ProtocolKind::classification_ba,
                                                                         Variant::unauthenticated, n, t, f, b, adv, seed);
                                s.params["k"] = k;
                                const auto r = run_execution(s);
                                if (r.misclassification->k_a() > k) {
                                    ++excluded;
                                    continue;
                                }
                                ++runs;
                                const std::int64_t rounds = r.rounds_elapsed - r.setup_rounds;
                                const std::int64_t msgs = r.honest_messages_total - r.setup_messages;
                                round_over += rounds > class_ba_unauth_rounds(k);
                                message_over += msgs > class_ba_unauth_messages(n, k);
                                worst_rounds = std::max(worst_rounds, rounds - class_ba_unauth_rounds(k));
                                worst_messages = std::max(worst_messages, msgs - class_ba_unauth_messages(n, k));
                            }
            }
        }
        std::ostringstream os;
        os << runs << " runs with k >= k_A (" << excluded << " with k < k_A not counted), " << round_over
           << " over the round bound, " << message_over << " over the message bound; least slack " << -worst_rounds
           << " rounds, " << -worst_messages << " messages";
        c.detail = os.str();
        c.pass = runs > 0 && round_over == 0 && message_over == 0;
        return c;
    }

    /// 5: standalone authenticated classification agreement: exactly k+3
    /// rounds; committee |C| <= 3k+1, |C∩F| <= k, |C∩H| >= k+1 when k >= k_A.
    CriterionResult auth_class_budgets() {
        CriterionResult c{5, "authenticated classification agreement budgets", false, {}, 0};
        std::size_t runs = 0, composition_runs = 0, round_bad = 0, composition_bad = 0;
        for (int n : {10, 20, 40}) {
            const int t = default_t(Variant::authenticated, n);
            for (int k : {1, 2, 4}) {
                if (!class_ba_auth_condition(n, t, k)) continue;
                for (int f : detail::distinct_f(t))
                    for (std::int64_t b : {std::int64_t{0}, std::int64_t{n / 2}, std::int64_t{n}})
                        for (const auto& adv : detail::catalog_names(Variant::authenticated))
                            for (std::uint64_t seed = 1; seed <= 2; ++seed) {
                                Scenario s = detail::acceptance_scenario(ProtocolKind::classification_ba,
                                                                         Variant::authenticated, n, t, f, b, adv, seed);
                                s.params["k"] = k;
                                const auto r = run_execution(s);
                                ++runs;
                                round_bad += r.rounds_elapsed - r.setup_rounds != class_ba_auth_rounds(k);
                                if (r.misclassification->k_a() > k) continue;
                                ++composition_runs;
                                const FaultSet faults(n, s.faulty);
                                int in_f = 0;
                                for (ProcessId p : r.auth->committee) in_f += faults.faulty(p);
                                const int size = static_cast<int>(r.auth->committee.size());
                                composition_bad += size > 3 * k + 1 || in_f > k || size - in_f < k + 1;
                            }
            }
        }
        std::ostringstream os;
        os << runs << " runs, " << round_bad << " not lasting exactly k+3 rounds; committee checked in "
           << composition_runs << " runs with k >= k_A, " << composition_bad << " with bad composition";
        c.detail = os.str();
        c.pass = runs > 0 && composition_runs > 0 && round_bad == 0 && composition_bad == 0;
        return c;
    }

    /// 6: wrapper rounds at n=60, f=t under C*min(floor(B/n)+1, f+1) + C',
    /// and within one phase of the predicted exit phase; at B=0 the phase
    /// count does not depend on f by more than one phase.
    CriterionResult round_scaling() {
        CriterionResult c{6, "round scaling", true, {}, 0};
        std::ostringstream os;
        const int n = 60;
        for (Variant v : {Variant::unauthenticated, Variant::authenticated}) {
            const int t = default_t(v, n);
            const WrapperConfig cfg = WrapperConfig::make(v, t);
            const int r_gc = graded_consensus_rounds(v);
            auto class_cond = [&](int k) {
                return v == Variant::unauthenticated ? class_ba_unauth_condition(n, t, k) : class_ba_auth_condition(n, t, k);
            };
            std::size_t runs = 0, envelope_bad = 0, phase_bad = 0;
            double worst_ratio = 0;
            for (std::int64_t mult : {0, 1, 2, 4, 8}) {
                const std::int64_t b = mult * n;
                const int f = t;
                const int denom = (n + 1) / 2 - f;
                const double beta = static_cast<double>(n) / denom;
                const std::int64_t m = std::min<std::int64_t>(b / n + 1, f + 1);
                const double big_c = 16.0 * static_cast<double>(cfg.alpha) * beta;
                const double small_c = 1.0 + 3.0 * r_gc * cfg.phase_count;
                const double envelope = big_c * static_cast<double>(m) + small_c;
                const std::int64_t k_bound = b / denom;
                int predicted = cfg.phase_count;
                for (int phase = 1; phase <= cfg.phase_count; ++phase) {
                    const bool es = early_stopping_rounds_needed(v, f) <= cfg.budget(phase);
                    const bool cls = cfg.k(phase) >= k_bound && class_cond(cfg.k(phase));
                    if (es || cls) {
                        predicted = phase;
                        break;
                    }
                }
                const std::int64_t allowed = cfg.rounds_through(std::min(cfg.phase_count, predicted + 2));
                for (const std::string adv : {"equivocator", "split-brain"})
                    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
                        const auto s = detail::acceptance_scenario(ProtocolKind::ba_with_predictions, v, n, t, f, b, adv, seed);
                        const auto r = run_execution(s);
                        ++runs;
                        envelope_bad += r.rounds_elapsed > envelope;
                        phase_bad += r.rounds_elapsed > allowed;
                        worst_ratio = std::max(worst_ratio, r.rounds_elapsed / envelope);
                    }
            }
            // B = 0 across f: phase counts within one phase of each other.
            std::set<std::size_t> phases;
            for (int f : {1, t / 2, t})
                for (const std::string adv : {"equivocator", "split-brain"})
                    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
                        const auto s = detail::acceptance_scenario(ProtocolKind::ba_with_predictions, v, n, t, f, 0, adv, seed);
                        phases.insert(run_execution(s).phases.size());
                    }
            const bool f_independent = *phases.rbegin() - *phases.begin() <= 1;
            c.pass = c.pass && envelope_bad == 0 && phase_bad == 0 && f_independent;
            os << to_string(v) << " t=" << t << " alpha=" << cfg.alpha << ": " << runs << " runs, " << envelope_bad
               << " over envelope (max ratio " << std::setprecision(3) << worst_ratio << "), " << phase_bad
               << " past predicted phase + 1, B=0 phase counts " << *phases.begin() << ".." << *phases.rbegin() << "; ";
        }
        c.detail = os.str();
        return c;
    }

    /// 7: per-phase wrapper messages within the substitutes' budgets.
    CriterionResult message_budgets() {
        CriterionResult c{7, "message budgets", false, {}, 0};
        std::size_t phases = 0, over = 0, totals_over = 0;
        for (const auto& rec : records_) {
            const int n = rec["n"], t = rec["t"], f = rec["f"];
            const Variant v = parse_variant(rec["variant"].get<std::string>());
            const int k_a = rec["k_A"].is_null() ? 0 : rec["k_A"].get<int>();
            const std::int64_t classify_msgs = rec["messages"].value("classify", std::int64_t{0});
            std::int64_t budget_total = static_cast<std::int64_t>(n) * (n - 1);
            bool bad = classify_msgs > budget_total;
            for (const auto& ph : rec["phases"]) {
                ++phases;
                const int k = ph["k"];
                const std::int64_t T = ph["T"];
                const std::int64_t gc = 3 * graded_consensus_messages(v, n);
                const std::int64_t es = early_stopping_messages(v, n, t, T);
                std::int64_t cls = 0;
                if (v == Variant::unauthenticated) {
                    cls = k >= k_a && class_ba_unauth_condition(n, t, k) ? class_ba_unauth_messages(n, k)
                                                                        : 5LL * (n - 1) * (n - f);
                } else {
                    const int committee = k >= k_a && class_ba_auth_condition(n, t, k) ? std::min(n, 3 * k + 1) : n;
                    cls = class_ba_auth_messages(n, k, committee, std::min(committee, n - f));
                }
                const auto& msg = ph["messages"];
                const bool phase_bad = msg["gc"].get<std::int64_t>() > gc || msg["early"].get<std::int64_t>() > es ||
                                       msg["class"].get<std::int64_t>() > cls;
                over += phase_bad;
                budget_total += gc + es + cls;
            }
            bad = bad || rec["messages_total"].get<std::int64_t>() > budget_total;
            totals_over += bad;
        }
        std::ostringstream os;
        os << phases << " phases in " << records_.size() << " executions, " << over << " phases over budget, "
           << totals_over << " executions over the total budget";
        c.detail = os.str();
        c.pass = phases > 0 && over == 0 && totals_over == 0;
        return c;
    }

    /// 8: 20 randomly selected grid records replay byte-identically.
    CriterionResult determinism() {
        CriterionResult c{8, "deterministic replay", false, {}, 0};
        if (lines_.empty()) {
            c.detail = "no records";
            return c;
        }
        Rng rng(0x5eed);
        std::size_t same = 0;
        std::string first_diff;
        for (int i = 0; i < 20; ++i) {
            const std::size_t pick = static_cast<std::size_t>(rng.below(lines_.size()));
            const std::string again = replay_record(lines_[pick]);
            if (again == lines_[pick]) ++same;
            else if (first_diff.empty()) first_diff = ", first mismatch at record " + std::to_string(pick);
        }
        c.detail = std::to_string(same) + "/20 replays byte-identical" + first_diff;
        c.pass = same == 20;
        return c;
    }

    /// 9: (a) the guard-disabled mutant breaks Agreement somewhere on the
    /// grid; (b) no forged honest signature is ever accepted on the grid,
    /// while the forgery adversary demonstrably attempts forgeries.
    CriterionResult negative_controls() {
        CriterionResult c{9, "negative controls", false, {}, 0};
        const auto points = expand_sweep(safety_grid_document(true));
        std::size_t tried = 0;
        std::optional<std::size_t> found;
        for (const auto& p : points) {
            if (!p.scenario) continue;
            ++tried;
            VerdictSet v;
            execute_record(p.index, *p.scenario, &v);
            if (const auto* a = v.find("agreement"); a && !a->pass) {
                found = p.index;
                break;
            }
        }
        std::size_t accepted = 0, forgery_runs = 0;
        std::uint64_t rejected = 0;
        for (const auto& rec : records_) {
            if (rec["variant"] != "authenticated") continue;
            accepted += rec["forgeries_accepted"].get<std::uint64_t>() > 0;
            if (rec["adversary"]["name"] == "forgery") {
                ++forgery_runs;
                rejected += rec["signatures_rejected"].get<std::uint64_t>();
            }
        }
        std::ostringstream os;
        os << "(a) mutant ";
        if (found) os << "violates agreement at point #" << *found << " (" << tried << " executions tried)";
        else os << "never violated agreement in " << tried << " executions";
        os << "; (b) " << accepted << " authenticated executions accepted a forged signature; forgery adversary ran "
           << forgery_runs << " times with " << rejected << " forged or replayed signatures rejected";
        c.detail = os.str();
        c.pass = found.has_value() && accepted == 0 && forgery_runs > 0 && rejected > 0;
        return c;
    }

    const SweepSummary& grid_summary() const { return grid_summary_; }
    const std::vector<std::string>& grid_lines() const { return lines_; }

 private:
    std::size_t errors() const {
        std::size_t e = 0;
        for (const auto& v : grid_summary_.violations) e += !v.failures.empty() && v.failures.front().property == "execution";
        return e;
    }

    std::ostream& log_;
    unsigned workers_;
    SweepSummary grid_summary_;
    std::vector<std::string> lines_;
    std::vector<nlohmann::json> records_;
    double grid_seconds_ = 0;
};

}  // namespace bapred
