// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include "mbt/conformance.hpp"
#include "mbt/models/registry.hpp"
#include "mbt/tsg.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#ifndef MBT_CLI
#error "MBT_CLI must name the mbt executable"
#endif

using namespace mbt;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failed = 0;

void report(int id, const char* name, bool ok, const std::string& detail)
{
    std::cout << (ok ? "PASS" : "FAIL") << "  " << id << " " << name << ": " << detail << std::endl;
    if (!ok) ++failed;
}

Bounds vr_bounds(int queries, int views)
{
    return {{"replicas", 3}, {"max_queries", queries}, {"max_views", views}};
}

struct Built {
    models::Exploration x;
    tsg::TestSuite suite;
    tsg::CoverageReport coverage;
    ExecutableSuite exec;
};

Built build(const std::string& model, const Bounds& b)
{
    Built out{models::explore(model, b), {}, {}, {}};
    auto cg = to_cover_graph(out.x.graph);
    out.suite = tsg::min_suite(cg);
    out.coverage = tsg::verify_coverage(cg, out.suite);
    auto f = make_suite_file(out.x.graph, out.suite, tsg::Algorithm::Min);
    write_suite(f);
    out.exec = decode_suite(f);
    return out;
}

void coverage_exhaustive()
{
    auto t0 = Clock::now();
    auto vr = build("vr", vr_bounds(1, 1));
    auto kv = build("kv", {{"replicas", 3}, {"max_queries", 1}});
    const double t = since(t0);
    const bool ok = vr.x.result.ok() && kv.x.result.ok() && vr.coverage.uncovered.empty()
                    && kv.coverage.uncovered.empty() && t < 60.0;
    std::ostringstream d;
    d << "vr |V|=" << vr.x.graph.states.size() << " |E|=" << vr.x.graph.edges.size() << " uncovered="
      << vr.coverage.uncovered.size() << "; kv |V|=" << kv.x.graph.states.size() << " |E|=" << kv.x.graph.edges.size()
      << " uncovered=" << kv.coverage.uncovered.size() << "; " << t << " s (limit 60)";
    report(1, "coverage exhaustiveness", ok, d.str());
}

void suite_ordering()
{
    std::mt19937_64 rng(2024);
    auto t0 = Clock::now();
    int bad = 0, uncovered = 0;
    for (int i = 0; i < 1000; ++i) {
        auto g = oracle::random_rooted_graph(rng, 50, 200);
        auto b = tsg::baseline_suite(g), f = tsg::flow_suite(g), m = tsg::min_suite(g);
        for (const auto* s : {&b, &f, &m}) uncovered += !tsg::verify_coverage(g, *s).uncovered.empty();
        const auto bound = static_cast<std::size_t>(tsg::diameter(g) + 1) * g.edges.size();
        if (!(m.total_length() <= f.total_length() && f.total_length() <= b.total_length()
              && b.total_length() <= bound))
            ++bad;
    }
    const double t = since(t0);
    std::ostringstream d;
    d << "1000 graphs, " << bad << " ordering violations, " << uncovered << " suites with uncovered edges; " << t
      << " s (limit 30)";
    report(2, "suite-size ordering and bounds", bad == 0 && uncovered == 0 && t < 30.0, d.str());
}

void exact_optimality()
{
    std::mt19937_64 rng(7);
    int mismatches = 0;
    const int n = 500;
    for (int i = 0; i < n; ++i) {
        auto g = oracle::random_rooted_graph(rng, 7, 7);
        if (tsg::min_suite(g).total_length() != oracle::min_cover_length(g)) ++mismatches;
    }
    report(3, "exact optimality oracle", mismatches == 0,
           std::to_string(n) + " graphs with <= 7 edges, " + std::to_string(mismatches) + " mismatches");
}

void flow_oracle()
{
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> nv(2, 8), cap(0, 10);
    int mismatches = 0;
    const int n = 1000;
    for (int i = 0; i < n; ++i) {
        const int v = nv(rng);
        std::uniform_int_distribution<int> any(0, v - 1), ne(0, 4 * v);
        flow::FlowNetwork net(v);
        std::vector<std::tuple<int, int, oracle::Amount>> edges;
        for (int k = ne(rng); k > 0; --k) {
            int a = any(rng), b = any(rng), c = cap(rng);
            net.add_edge(a, b, 0, c);
            edges.emplace_back(a, b, c);
        }
        int s = any(rng), t = any(rng);
        if (flow::max_flow(net, s, t).value != oracle::unit_max_flow(v, edges, s, t)) ++mismatches;
    }
    report(4, "flow-solver oracle", mismatches == 0,
           std::to_string(n) + " networks, " + std::to_string(mismatches) + " mismatches");
}

std::size_t failing_paths(const Built& b, vr::Mutation m)
{
    auto r = run_suite(models::emulator_config(b.exec.model, b.exec.bounds, m), b.exec);
    return r.verdicts.size() - r.totals[to_string(Status::Pass)];
}

void conformance_soundness(const Built& vr, const Built& vr2, const Built& kv)
{
    const std::size_t vr_bad = failing_paths(vr, vr::Mutation::None);
    const std::size_t vr2_bad = failing_paths(vr2, vr::Mutation::None);
    const std::size_t kv_bad = failing_paths(kv, vr::Mutation::None);
    int detected = 0, total = 0;
    std::ostringstream d;
    d << "unmodified: vr " << vr.exec.paths.size() - vr_bad << "/" << vr.exec.paths.size() << " + "
      << vr2.exec.paths.size() - vr2_bad << "/" << vr2.exec.paths.size() << ", kv " << kv.exec.paths.size() - kv_bad
      << "/" << kv.exec.paths.size() << " pass; mutations:";
    for (const auto& [m, name] : vr::mutation_names()) {
        if (m == vr::Mutation::None) continue;
        ++total;
        std::size_t bad = failing_paths(vr, m) + failing_paths(vr2, m);
        detected += bad > 0;
        d << " " << name << "=" << bad;
    }
    d << "; detected " << detected << "/" << total;
    report(5, "conformance soundness", vr_bad == 0 && vr2_bad == 0 && kv_bad == 0 && detected == total && total >= 5,
           d.str());
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool pipeline(const fs::path& dir)
{
    fs::create_directories(dir);
    const std::string cli = MBT_CLI;
    const std::string d = dir.string();
    const std::string quiet = " >/dev/null 2>&1";
    std::string cmds[] = {
        cli + " explore --model vr --replicas 3 --max-queries 1 --max-views 1 --out " + d + "/vr.graph" + quiet,
        cli + " gensuite --graph " + d + "/vr.graph --algorithm min --out " + d + "/vr.suite" + quiet,
        cli + " run --suite " + d + "/vr.suite --jobs 2 --out " + d + "/vr.report" + quiet,
    };
    for (const auto& c : cmds)
        if (std::system(c.c_str()) != 0) return false;
    return true;
}

void determinism()
{
    auto base = fs::temp_directory_path() / ("mbt-acceptance-" + std::to_string(::getpid()));
    bool ran = pipeline(base / "a") && pipeline(base / "b");
    int same = 0;
    std::ostringstream d;
    if (ran) {
        for (const char* f : {"vr.graph", "vr.suite", "vr.report"}) {
            auto a = slurp(base / "a" / f), b = slurp(base / "b" / f);
            bool eq = !a.empty() && a == b;
            same += eq;
            d << f << (eq ? " identical (" + std::to_string(a.size()) + " bytes) " : " DIFFERENT ");
        }
    } else {
        d << "pipeline failed ";
    }
    fs::remove_all(base);
    d << "across two processes";
    report(6, "determinism", ran && same == 3, d.str());
}

void throughput(const Built& vr)
{
    auto cg = to_cover_graph(vr.x.graph);
    auto t0 = Clock::now();
    auto s = tsg::min_suite(cg);
    const double gen = since(t0);
    const double gen_rate = static_cast<double>(s.paths.size()) / gen;

    RunOptions o;
    o.parallelism = 1;
    auto r = run_suite(models::emulator_config("vr", vr.exec.bounds), vr.exec, o);
    const double run_rate = r.paths_per_second();
    std::ostringstream d;
    d << "replay " << static_cast<long>(run_rate) << " paths/s on 1 core (min 333), generation "
      << static_cast<long>(gen_rate) << " paths/s (min 3333)";
    report(7, "throughput", r.all_passed() && run_rate >= 1000.0 / 3 && gen_rate >= 10000.0 / 3, d.str());
}

void invariant_checking()
{
    auto b = vr_bounds(2, 1);
    b["bug_commit_without_quorum"] = 1;
    auto x = models::explore("vr", b);
    bool ok = x.result.violations.size() == 1;
    std::ostringstream d;
    if (ok) {
        const auto& v = x.result.violations[0];
        auto dist = bfs_distances(x.result.graph.vertex_count(), x.result.graph.edges);
        ok = v.invariant == "PrefixLogConsistency" && v.counterexample.size() == *dist[v.state_index - 1];
        d << v.invariant << " at state " << v.state_index << ", counterexample " << v.counterexample.size()
          << " steps (shortest " << *dist[v.state_index - 1] << "): " << v.detail;
    } else {
        d << "no violation reported";
    }
    report(8, "invariant checking", ok, d.str());
}

} // namespace

int main()
{
    coverage_exhaustive();
    suite_ordering();
    exact_optimality();
    flow_oracle();
    auto vr = build("vr", vr_bounds(1, 1));
    auto vr2 = build("vr", vr_bounds(2, 0));
    auto kv = build("kv", {{"replicas", 3}, {"max_queries", 1}});
    conformance_soundness(vr, vr2, kv);
    determinism();
    throughput(vr);
    invariant_checking();
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
