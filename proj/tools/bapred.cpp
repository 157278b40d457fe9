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

// bapred: run scenario and sweep files, replay records, list strategies and
// run the acceptance suite.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bapred/harness/acceptance.hpp"
#include "bapred/harness/metrics.hpp"
#include "bapred/harness/scenario_file.hpp"
#include "bapred/harness/sweep.hpp"

namespace {

using namespace bapred;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Output stream for --out, falling back to stdout.
class Sink {
 public:
    explicit Sink(const std::string& path) {
        if (path.empty() || path == "-") return;
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw ConfigError("cannot write " + path);
    }
    std::ostream& get() { return file_ ? *file_ : std::cout; }

 private:
    std::unique_ptr<std::ofstream> file_;
};

int cmd_sweep(const std::string& path, const std::string& out, unsigned workers, std::optional<std::uint64_t> seed,
              bool keep_going) {
    const std::string text = read_file(path);
    nlohmann::json doc = parse_scenario_document(text);
    if (seed) doc["seeds"] = nlohmann::json::array({*seed});
    const auto points = expand_sweep(doc, text);
    Sink sink(out);
    SweepOptions opt;
    opt.workers = workers;
    opt.abort_on_violation = !keep_going;
    const auto summary = run_sweep(points, sink.get(), opt);
    print_summary(std::cerr, summary);
    return summary.violations.empty() ? 0 : 1;
}

/// A single scenario, given as a file or inline JSON (the form printed when
/// a sweep reports a violation, or a whole record line).
int cmd_run(const std::string& arg, const std::string& out, std::optional<std::uint64_t> seed) {
    const std::string text = arg.rfind('{', 0) == 0 ? arg : read_file(arg);
    Scenario s = scenario_from_json(parse_scenario_document(text));
    if (seed) s.seed = *seed;
    VerdictSet v;
    const std::string line = execute_record(0, s, &v);
    Sink sink(out);
    sink.get() << line << '\n';
    for (const auto& x : v.verdicts) std::cerr << (x.pass ? "  ok   " : "  FAIL ") << x.property << (x.pass ? "" : ": " + x.detail) << '\n';
    return v.all_pass() ? 0 : 1;
}

int cmd_replay(const std::string& path, std::size_t count, std::uint64_t pick_seed) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) lines.push_back(line);
    std::vector<std::size_t> picks;
    if (count == 0 || count >= lines.size()) {
        for (std::size_t i = 0; i < lines.size(); ++i) picks.push_back(i);
    } else {
        Rng rng(pick_seed);
        for (std::size_t i = 0; i < count; ++i) picks.push_back(static_cast<std::size_t>(rng.below(lines.size())));
    }
    std::size_t mismatches = 0;
    for (std::size_t i : picks) {
        if (replay_record(lines[i]) == lines[i]) continue;
        ++mismatches;
        std::cerr << "line " << i + 1 << " does not replay identically\n";
    }
    std::cerr << picks.size() - mismatches << "/" << picks.size() << " records replayed byte-identically\n";
    return mismatches == 0 ? 0 : 1;
}

int cmd_acceptance(unsigned workers) {
    AcceptanceSuite suite(std::cout, workers);
    const auto results = suite.run_all();
    bool ok = true;
    for (const auto& c : results) ok = ok && c.pass;
    return ok ? 0 : 1;
}

void cmd_strategies() {
    for (const auto& s : strategy_catalog())
        std::cout << s.name << (s.authenticated_only ? " (authenticated only)" : "") << ": " << s.summary << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Byzantine agreement with classification predictions: simulator and harness"};
    app.require_subcommand(1);

    std::string path, out;
    unsigned workers = 0;
    std::optional<std::uint64_t> seed;
    bool keep_going = false;
    std::size_t count = 0;
    std::uint64_t pick_seed = 1;

    auto* sweep = app.add_subcommand("sweep", "expand a sweep file and run every point, writing JSONL records");
    sweep->add_option("file", path, "sweep or scenario file")->required();
    sweep->add_option("-o,--out", out, "record output path (default stdout)");
    sweep->add_option("-w,--workers", workers, "worker threads (default BAPRED_WORKERS or all cores)");
    sweep->add_option("-s,--seed", seed, "replace the seeds axis with one seed");
    sweep->add_flag("-k,--keep-going", keep_going, "do not stop at the first property violation");

    auto* run = app.add_subcommand("run", "run one scenario (file or inline JSON) and print its record");
    run->add_option("scenario", path, "scenario file or JSON text")->required();
    run->add_option("-o,--out", out, "record output path (default stdout)");
    run->add_option("-s,--seed", seed, "override the scenario seed");

    auto* replay = app.add_subcommand("replay", "re-execute records and compare byte for byte");
    replay->add_option("records", path, "JSONL record file")->required();
    replay->add_option("-n,--count", count, "replay this many randomly chosen records (default all)");
    replay->add_option("--pick-seed", pick_seed, "seed for choosing records");

    auto* acceptance = app.add_subcommand("acceptance", "run the acceptance suite");
    acceptance->add_option("-w,--workers", workers, "worker threads for the grid");

    auto* strategies = app.add_subcommand("strategies", "list the adversary catalog");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sweep) return cmd_sweep(path, out, workers, seed, keep_going);
        if (*run) return cmd_run(path, out, seed);
        if (*replay) return cmd_replay(path, count, pick_seed);
        if (*acceptance) return cmd_acceptance(workers);
        if (*strategies) cmd_strategies();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
