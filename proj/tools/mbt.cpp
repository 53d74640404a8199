// mbt: explore a model, generate a covering suite, run it against the
// implementation, replay failures, print statistics.
//
// Exit status: 0 success, 1 verification failure, 2 usage or format error.

#include "mbt/conformance.hpp"
#include "mbt/models/registry.hpp"
#include "mbt/tsg.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace mbt;

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Usage, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Usage, "cannot write " + path);
    out << text;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int exit_code(ErrorCode c)
{
    switch (c) {
    case ErrorCode::Usage:
    case ErrorCode::MalformedInput:
    case ErrorCode::MalformedPath:
    case ErrorCode::LogVersionMismatch:
    case ErrorCode::HashMismatch: return kUsage;
    default: return kFailed;
    }
}

// ---------------------------------------------------------------------------

struct ExploreArgs {
    std::string model;
    std::optional<int> replicas, max_queries, max_views;
    std::vector<std::string> bound;
    std::string out, dot;
    std::size_t state_cap = 10'000'000;
};

Bounds parse_bounds(const ExploreArgs& a)
{
    Bounds b;
    for (const auto& kv : a.bound) {
        auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) fail(ErrorCode::Usage, "--bound expects key=value, got '" + kv + "'");
        try {
            b[kv.substr(0, eq)] = std::stoll(kv.substr(eq + 1));
        } catch (const std::exception&) {
            fail(ErrorCode::Usage, "--bound value must be an integer: '" + kv + "'");
        }
    }
    if (a.replicas) b["replicas"] = *a.replicas;
    if (a.max_queries) b["max_queries"] = *a.max_queries;
    if (a.max_views) b["max_views"] = *a.max_views;
    return b;
}

void print_counterexample(const TransitionGraph& g, const InvariantViolation& v)
{
    std::cout << "violation " << v.invariant << " at state " << v.state_index << ": " << v.detail << "\n";
    std::cout << "counterexample (" << v.counterexample.size() << " steps):\n";
    for (std::size_t i = 0; i < v.counterexample.size(); ++i) {
        const auto& e = g.edges.at(v.counterexample[i]);
        std::cout << "  " << i + 1 << ". " << to_text(e.action) << " -> " << e.to + 1 << "\n";
    }
}

int cmd_explore(const ExploreArgs& a)
{
    models::require_known(a.model);
    Bounds bounds = parse_bounds(a);
    ExploreOptions opts;
    opts.state_cap = a.state_cap;
    auto t0 = std::chrono::steady_clock::now();
    auto x = models::explore(a.model, bounds, opts);
    const double t = seconds_since(t0);
    const auto& r = x.result;

    std::cout << "model=" << a.model << " bounds=" << bounds_to_text(x.graph.bounds) << "\n";
    std::cout << stats_record(graph_stats(r.graph)) << "\n";
    std::cerr << "explored in " << t << " s\n";
    if (r.cap_exceeded) {
        std::cout << "error: STATE_CAP_EXCEEDED after " << r.graph.vertex_count() << " states\n";
        return kFailed;
    }
    if (!r.violations.empty()) {
        for (const auto& v : r.violations) print_counterexample(r.graph, v);
        return kFailed;
    }
    if (a.model == "vr") {
        std::cout << "quiescent sinks checked=" << x.progress.sinks_checked
                  << " violations=" << x.progress.violations.size() << "\n";
        for (const auto& v : x.progress.violations)
            std::cout << "violation " << v.invariant << " at state " << v.state_index << ": " << v.detail << "\n";
    }
    if (!a.out.empty()) spit(a.out, write_graph(x.graph));
    if (!a.dot.empty()) spit(a.dot, export_dot(x.graph));
    return x.progress.violations.empty() ? kOk : kFailed;
}

// ---------------------------------------------------------------------------

LabeledGraph load_graph(const std::string& path)
{
    std::string text = slurp(path);
    if (path.size() > 4 && path.substr(path.size() - 4) == ".dot") return import_dot(text);
    return read_graph(text);
}

int cmd_gensuite(const std::string& graph_path, const std::string& algorithm, const std::string& out)
{
    auto alg = tsg::algorithm_from_string(algorithm);
    LabeledGraph g = load_graph(graph_path);
    auto cg = to_cover_graph(g);
    auto t0 = std::chrono::steady_clock::now();
    auto suite = tsg::generate(cg, alg);
    const double t = seconds_since(t0);
    auto cov = tsg::verify_coverage(cg, suite);

    std::cout << "algorithm=" << algorithm << " P=" << cov.path_count << " L=" << cov.total_length
              << " uncovered=" << cov.uncovered.size() << "\n";
    std::cerr << "generated in " << t << " s";
    if (t > 0) std::cerr << " (" << static_cast<double>(cov.path_count) / t << " paths/s)";
    std::cerr << "\n";
    if (!cov.uncovered.empty()) {
        std::cout << "uncovered edges:";
        for (int e : cov.uncovered) std::cout << " " << e + 1;
        std::cout << "\n";
        return kFailed;
    }
    if (!out.empty()) {
        auto f = make_suite_file(g, suite, alg);
        spit(out, write_suite(f));
    }
    return kOk;
}

// ---------------------------------------------------------------------------

struct RunArgs {
    std::string model, suite, out, replay_dir, mutation = "none";
    unsigned jobs = 1;
    bool fail_fast = false;
};

int cmd_run(const RunArgs& a)
{
    SuiteFile file = read_suite(slurp(a.suite));
    if (!a.model.empty() && a.model != file.model)
        fail(ErrorCode::Usage, "suite was generated for model '" + file.model + "', not '" + a.model + "'; refusing to run");
    models::require_known(file.model);
    auto config = models::emulator_config(file.model, file.bounds, vr::mutation_from_string(a.mutation));
    auto suite = decode_suite(file);

    RunOptions opts;
    opts.parallelism = a.jobs;
    opts.fail_fast = a.fail_fast;
    if (!a.replay_dir.empty()) opts.replay_dir = a.replay_dir;
    auto report = run_suite(config, suite, opts);

    std::cout << "model=" << report.model << " suite=" << report.suite_hash << " paths=" << report.verdicts.size();
    for (const auto& [status, n] : report.totals) std::cout << " " << status << "=" << n;
    std::cout << "\n";
    std::cerr << "ran in " << report.wall_seconds << " s (" << report.paths_per_second() << " paths/s, "
              << a.jobs << " jobs)\n";
    std::size_t shown = 0;
    for (const auto& v : report.verdicts) {
        if (v.status == Status::Pass || v.status == Status::NotRun) continue;
        if (shown++ == 5) {
            std::cout << "...\n";
            break;
        }
        std::cout << v.serialize() << "\n";
    }
    if (!report.replay_logs.empty())
        std::cout << report.replay_logs.size() << " replay logs in " << a.replay_dir << "\n";
    if (!a.out.empty()) spit(a.out, report.to_json().dump(2) + "\n");
    return report.all_passed() ? kOk : kFailed;
}

int cmd_replay(const std::string& log_path, const std::string& mutation, const std::string& suite_path)
{
    ReplayLog log = read_replay_log(slurp(log_path));
    std::optional<std::string> expected;
    if (!suite_path.empty()) expected = read_suite(slurp(suite_path)).hash;
    models::require_known(log.model);
    auto config = models::emulator_config(log.model, log.bounds, vr::mutation_from_string(mutation));
    Verdict v = replay(log, config, expected);
    std::cout << v.serialize() << "\n";
    return v.status == Status::Pass ? kOk : kFailed;
}

// ---------------------------------------------------------------------------

int cmd_stats(const std::string& graph_path, const std::string& suite_path)
{
    if (graph_path.empty() == suite_path.empty()) fail(ErrorCode::Usage, "stats needs exactly one of --graph or --suite");
    nlohmann::json rec;
    if (!graph_path.empty()) {
        LabeledGraph g = load_graph(graph_path);
        auto cg = to_cover_graph(g);
        const int d = tsg::diameter(cg);
        auto t0 = std::chrono::steady_clock::now();
        auto suite = tsg::min_suite(cg);
        const double t = seconds_since(t0);
        std::cout << "D\t|V|\t|E|\t|P|\tgen(min) s\n"
                  << d << "\t" << g.states.size() << "\t" << g.edges.size() << "\t" << suite.paths.size() << "\t" << t
                  << "\n";
        rec = {{"D", d}, {"V", g.states.size()}, {"E", g.edges.size()}, {"P", suite.paths.size()},
               {"L", suite.total_length()}, {"model", g.model}};
    } else {
        SuiteFile f = read_suite(slurp(suite_path));
        std::cout << "D\t|V|\t|E|\t|P|\tL\n"
                  << f.diameter << "\t" << f.states.size() << "\t" << f.edge_count << "\t" << f.paths.size() << "\t"
                  << f.total_length() << "\n";
        rec = {{"D", f.diameter}, {"V", f.states.size()}, {"E", f.edge_count}, {"P", f.paths.size()},
               {"L", f.total_length()}, {"model", f.model}, {"algorithm", f.algorithm}};
    }
    std::cout << "record " << rec.dump() << "\n";
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Model-based testing pipeline for actor systems"};
    app.require_subcommand(1);

    ExploreArgs ex;
    auto* explore = app.add_subcommand("explore", "Explore a model's transition graph and check invariants");
    explore->add_option("--model", ex.model, "kv or vr")->required();
    explore->add_option("--replicas", ex.replicas, "Number of actors");
    explore->add_option("--max-queries", ex.max_queries, "Client requests per run (SETs for kv)");
    explore->add_option("--max-views", ex.max_views, "Highest view number (vr)");
    explore->add_option("--bound", ex.bound, "Extra bound as key=value");
    explore->add_option("--out", ex.out, "Graph file to write");
    explore->add_option("--dot", ex.dot, "DOT export to write");
    explore->add_option("--state-cap", ex.state_cap, "Abort after this many states");

    std::string graph, algorithm = "min", out;
    auto* gensuite = app.add_subcommand("gensuite", "Generate an edge-covering test suite from a graph");
    gensuite->add_option("--graph", graph, "Graph file (mbt graph, edge list or .dot)")->required();
    gensuite->add_option("--algorithm", algorithm, "baseline, flow or min")
        ->check(CLI::IsMember({"baseline", "flow", "min"}));
    gensuite->add_option("--out", out, "Suite file to write");

    RunArgs ra;
    auto* run = app.add_subcommand("run", "Run a suite against the implementation");
    run->add_option("--suite", ra.suite, "Suite file")->required();
    run->add_option("--model", ra.model, "Expected model name");
    run->add_option("--jobs", ra.jobs, "Worker threads")->check(CLI::PositiveNumber);
    run->add_option("--out", ra.out, "Report file to write (JSON)");
    run->add_option("--replay-log", ra.replay_dir, "Directory for replay logs of failing paths");
    run->add_option("--mutation", ra.mutation, "Seeded implementation bug (vr)");
    run->add_flag("--fail-fast", ra.fail_fast, "Stop scheduling paths after the first failure");

    std::string log_path, mutation = "none", suite_path;
    auto* rep = app.add_subcommand("replay", "Re-execute one replay log");
    rep->add_option("--replay-log", log_path, "Replay log file")->required();
    rep->add_option("--mutation", mutation, "Seeded implementation bug (vr)");
    rep->add_option("--suite", suite_path, "Reject the log unless it was recorded against this suite");

    std::string stats_graph, stats_suite;
    auto* stats = app.add_subcommand("stats", "Print D, |V|, |E|, |P| for a graph or suite");
    stats->add_option("--graph", stats_graph, "Graph file");
    stats->add_option("--suite", stats_suite, "Suite file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*explore) return cmd_explore(ex);
        if (*gensuite) return cmd_gensuite(graph, algorithm, out);
        if (*run) return cmd_run(ra);
        if (*rep) return cmd_replay(log_path, mutation, suite_path);
        if (*stats) return cmd_stats(stats_graph, stats_suite);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailed;
    }
    return kUsage;
}
