#pragma once

// Conformance runner. For one suite path: build a fresh emulator, check that
// its snapshot matches state 1, then for every edge apply the action and
// compare the snapshot against the destination state. The first mismatch
// ends the path; other paths keep running.

#include "mbt/action.hpp"
#include "mbt/emulator.hpp"
#include "mbt/error.hpp"
#include "mbt/graph_io.hpp"
#include "mbt/system_state.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace mbt {

// ---------------------------------------------------------------------------
// State comparison

struct Comparison {
    bool actors_equal = true;
    bool events_equal = true;
    std::string diff;

    bool equal() const noexcept { return actors_equal && events_equal; }
};

namespace detail {

inline void diff_values(const Value& impl, const Value& model, const std::string& where, std::string& out)
{
    if (impl == model) return;
    if (impl.is_record() && model.is_record()) {
        std::map<std::string, const Value*> a, b;
        for (const auto& [k, v] : impl.fields()) a[k] = &v;
        for (const auto& [k, v] : model.fields()) b[k] = &v;
        for (const auto& [k, v] : b) {
            auto it = a.find(k);
            if (it == a.end())
                out += where + "/" + k + ": missing in implementation\n";
            else
                diff_values(*it->second, *v, where + "/" + k, out);
        }
        for (const auto& [k, v] : a)
            if (!b.count(k)) out += where + "/" + k + ": not in model\n";
        return;
    }
    out += where + ": implementation " + to_text(impl) + " vs model " + to_text(model) + "\n";
}

} // namespace detail

/// Field-level comparison of an implementation snapshot against a model
/// state. Model-only globals are not compared; events are compared as sets.
inline Comparison compare_states(const SystemState& impl, const SystemState& model)
{
    Comparison c;
    if (impl.actors.size() != model.actors.size()) {
        c.actors_equal = false;
        c.diff += "actor count: implementation " + std::to_string(impl.actors.size()) + " vs model "
                  + std::to_string(model.actors.size()) + "\n";
    } else {
        for (std::size_t i = 0; i < impl.actors.size(); ++i) {
            if (impl.actors[i] == model.actors[i]) continue;
            c.actors_equal = false;
            detail::diff_values(impl.actors[i], model.actors[i], "replica " + std::to_string(i), c.diff);
        }
    }
    if (impl.down != model.down) {
        c.actors_equal = false;
        c.diff += "crashed actors differ\n";
    }

    std::vector<Event> a = impl.events, b = model.events;
    for (auto* v : {&a, &b}) {
        std::sort(v->begin(), v->end());
        v->erase(std::unique(v->begin(), v->end()), v->end());
    }
    if (a != b) {
        c.events_equal = false;
        std::vector<Event> extra, missing;
        std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(extra));
        std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(missing));
        for (const auto& e : extra) c.diff += "event only in implementation: " + to_text(e) + "\n";
        for (const auto& e : missing) c.diff += "event only in model: " + to_text(e) + "\n";
    }
    return c;
}

// ---------------------------------------------------------------------------
// Verdicts and reports

enum class Status { Pass, StateMismatch, EventsMismatch, IllegalAction, ActorFailure, NotRun };

inline const char* to_string(Status s)
{
    switch (s) {
    case Status::Pass: return "PASS";
    case Status::StateMismatch: return "STATE_MISMATCH";
    case Status::EventsMismatch: return "EVENTS_MISMATCH";
    case Status::IllegalAction: return "ILLEGAL_ACTION";
    case Status::ActorFailure: return "ACTOR_FAILURE";
    case Status::NotRun: return "NOT_RUN";
    }
    return "?";
}

struct Verdict {
    std::size_t path = 0; // 1-based
    Status status = Status::Pass;
    std::optional<std::size_t> step; // 0 = initial state, k = after the k-th action
    std::string diff;

    nlohmann::json to_json() const
    {
        nlohmann::json j{{"path", path}, {"status", to_string(status)}};
        if (step) j["step"] = *step;
        if (!diff.empty()) j["diff"] = diff;
        return j;
    }

    std::string serialize() const { return to_json().dump(); }
};

struct ReplayStep {
    Action action;
    std::size_t dest = 0; // 1-based state index
};

/// Suite with labels and states decoded for execution.
struct ExecutableSuite {
    std::string model;
    Bounds bounds;
    std::string hash;
    std::vector<SystemState> states;
    std::vector<std::vector<ReplayStep>> paths;
};

inline ExecutableSuite decode_suite(const SuiteFile& f)
{
    ExecutableSuite s{f.model, f.bounds, f.hash, {}, {}};
    s.states.reserve(f.states.size());
    for (const auto& v : f.states) s.states.push_back(SystemState::from_value(v));
    s.paths.reserve(f.paths.size());
    for (const auto& p : f.paths) {
        std::vector<ReplayStep> steps;
        steps.reserve(p.size());
        for (const auto& st : p) steps.push_back({Action::from_value(st.label), st.dest});
        s.paths.push_back(std::move(steps));
    }
    return s;
}

using StateLookup = std::function<const SystemState&(std::size_t)>;

/// Executes one sequence of steps from a fresh emulator.
inline Verdict run_steps(const EmulatorConfig& config, const std::vector<ReplayStep>& steps,
                         const StateLookup& state, std::size_t path_id)
{
    Verdict v;
    v.path = path_id;
    auto mismatch = [&](std::size_t step, const Comparison& c) {
        v.status = c.actors_equal ? Status::EventsMismatch : Status::StateMismatch;
        v.step = step;
        v.diff = c.diff;
        return v;
    };
    try {
        Emulator emu(config);
        if (auto c = compare_states(emu.snapshot(), state(1)); !c.equal()) return mismatch(0, c);
        for (std::size_t i = 0; i < steps.size(); ++i) {
            try {
                emu.step(steps[i].action);
            } catch (const Error& e) {
                v.step = i + 1;
                v.diff = e.what();
                v.status = e.code() == ErrorCode::IllegalAction ? Status::IllegalAction : Status::ActorFailure;
                return v;
            }
            if (auto c = compare_states(emu.snapshot(), state(steps[i].dest)); !c.equal()) return mismatch(i + 1, c);
        }
    } catch (const Error& e) {
        v.status = Status::ActorFailure;
        if (!v.step) v.step = 0;
        v.diff = e.what();
    }
    return v;
}

inline Verdict run_path(const EmulatorConfig& config, const ExecutableSuite& suite, std::size_t path_id)
{
    if (path_id < 1 || path_id > suite.paths.size())
        fail(ErrorCode::Usage, "no path " + std::to_string(path_id));
    StateLookup lookup = [&](std::size_t i) -> const SystemState& { return suite.states.at(i - 1); };
    return run_steps(config, suite.paths[path_id - 1], lookup, path_id);
}

// ---------------------------------------------------------------------------
// Replay logs
//
//   # mbt-replay v1 model=<name> bounds=<k:v,...> suite=<hash> path=<id>
//   S <index> <state>      every state the path references, ascending
//   A <dest> <action>      one per step

struct ReplayLog {
    std::string model;
    Bounds bounds;
    std::string suite_hash;
    std::size_t path = 0;
    std::map<std::size_t, SystemState> states;
    std::vector<ReplayStep> steps;
};

inline std::string write_replay_log(const ExecutableSuite& suite, std::size_t path_id)
{
    const auto& steps = suite.paths.at(path_id - 1);
    std::map<std::size_t, const SystemState*> used{{1, &suite.states.at(0)}};
    for (const auto& s : steps) used[s.dest] = &suite.states.at(s.dest - 1);
    std::string out = "# mbt-replay v" + std::to_string(kFormatVersion) + " model=" + suite.model + " bounds="
                      + bounds_to_text(suite.bounds) + " suite=" + suite.hash + " path=" + std::to_string(path_id)
                      + "\n";
    for (const auto& [i, s] : used) out += "S " + std::to_string(i) + " " + s->canonical_key() + "\n";
    for (const auto& s : steps) out += "A " + std::to_string(s.dest) + " " + to_text(s.action) + "\n";
    return out;
}

inline ReplayLog read_replay_log(std::string_view text)
{
    auto lines = detail::split_lines(text);
    if (lines.empty()) fail(ErrorCode::MalformedInput, "line 1: empty replay log");
    auto h = detail::parse_header(lines[0]);
    if (h.kind != "replay") fail(ErrorCode::MalformedInput, "line 1: expected an mbt-replay file");
    ReplayLog log;
    log.model = h.get("model");
    log.bounds = bounds_from_text(h.get("bounds"));
    log.suite_hash = h.get("suite");
    log.path = h.get_size("path");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto line = lines[i];
        if (line.empty()) continue;
        detail::with_line(i + 1, [&] {
            ValueReader r(line.substr(1));
            auto idx = r.read_int();
            if (idx < 1) fail(ErrorCode::MalformedInput, "state index must be positive");
            Value v = r.read();
            r.expect_end();
            if (line[0] == 'S')
                log.states[static_cast<std::size_t>(idx)] = SystemState::from_value(v);
            else if (line[0] == 'A')
                log.steps.push_back({Action::from_value(v), static_cast<std::size_t>(idx)});
            else
                fail(ErrorCode::MalformedInput, "unknown record");
        });
    }
    if (!log.states.count(1)) fail(ErrorCode::MalformedInput, "replay log lacks state 1");
    for (const auto& s : log.steps)
        if (!log.states.count(s.dest))
            fail(ErrorCode::MalformedInput, "replay log lacks state " + std::to_string(s.dest));
    return log;
}

/// Re-executes a replay log. With `expected_suite_hash`, logs produced from a
/// different suite are rejected.
inline Verdict replay(const ReplayLog& log, const EmulatorConfig& config,
                      const std::optional<std::string>& expected_suite_hash = std::nullopt)
{
    if (expected_suite_hash && *expected_suite_hash != log.suite_hash)
        fail(ErrorCode::HashMismatch, "replay log was recorded against suite " + log.suite_hash);
    StateLookup lookup = [&](std::size_t i) -> const SystemState& { return log.states.at(i); };
    return run_steps(config, log.steps, lookup, log.path);
}

// ---------------------------------------------------------------------------
// Whole-suite runs

struct RunOptions {
    unsigned parallelism = 1;
    bool fail_fast = false;
    std::optional<std::filesystem::path> replay_dir;
};

struct RunReport {
    std::string model;
    std::string suite_hash;
    std::vector<Verdict> verdicts; // one per path, in path order
    std::map<std::string, std::size_t> totals;
    std::vector<std::string> replay_logs;
    double wall_seconds = 0;

    bool all_passed() const
    {
        auto it = totals.find(to_string(Status::Pass));
        return (it == totals.end() ? 0 : it->second) == verdicts.size();
    }

    double paths_per_second() const { return wall_seconds > 0 ? static_cast<double>(verdicts.size()) / wall_seconds : 0; }

    /// Deterministic part of the report: totals and every non-PASS verdict.
    /// Timing is left out so identical runs give identical bytes.
    nlohmann::json to_json() const
    {
        nlohmann::json failures = nlohmann::json::array();
        for (const auto& v : verdicts)
            if (v.status != Status::Pass) failures.push_back(v.to_json());
        return {{"model", model},         {"suite_hash", suite_hash}, {"paths", verdicts.size()},
                {"totals", totals},       {"failures", failures},     {"replay_logs", replay_logs}};
    }
};

/// Runs every path on its own emulator. Workers get contiguous blocks of
/// path ids and share only the immutable suite, so verdicts do not depend on
/// the parallelism level (fail-fast aside, which skips whatever has not
/// started once a failure is seen).
inline RunReport run_suite(const EmulatorConfig& config, const ExecutableSuite& suite, const RunOptions& options = {})
{
    if (options.parallelism < 1) fail(ErrorCode::Usage, "parallelism must be at least 1");
    RunReport report;
    report.model = suite.model;
    report.suite_hash = suite.hash;
    const std::size_t n = suite.paths.size();
    report.verdicts.resize(n);
    for (std::size_t i = 0; i < n; ++i) report.verdicts[i] = {i + 1, Status::NotRun, std::nullopt, {}};

    std::atomic<bool> stop{false};
    auto worker = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            if (options.fail_fast && stop.load(std::memory_order_relaxed)) return;
            report.verdicts[i] = run_path(config, suite, i + 1);
            if (report.verdicts[i].status != Status::Pass) stop = true;
        }
    };

    auto start = std::chrono::steady_clock::now();
    const std::size_t workers = std::min<std::size_t>(options.parallelism, std::max<std::size_t>(n, 1));
    if (workers <= 1) {
        worker(0, n);
    } else {
        std::vector<std::thread> threads;
        const std::size_t block = (n + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            std::size_t b = std::min(n, w * block), e = std::min(n, b + block);
            threads.emplace_back(worker, b, e);
        }
        for (auto& t : threads) t.join();
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    for (const auto& v : report.verdicts) ++report.totals[to_string(v.status)];
    if (options.replay_dir) {
        std::filesystem::create_directories(*options.replay_dir);
        for (const auto& v : report.verdicts) {
            if (v.status == Status::Pass || v.status == Status::NotRun) continue;
            auto file = *options.replay_dir / ("path-" + std::to_string(v.path) + ".replay");
            std::ofstream(file, std::ios::binary) << write_replay_log(suite, v.path);
            report.replay_logs.push_back(file.filename().string());
        }
    }
    return report;
}

} // namespace mbt
