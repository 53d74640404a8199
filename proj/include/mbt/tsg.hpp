#pragma once

// Test-suite generation: cover every edge of a single-source multigraph with
// paths that start at the source.
//
//   baseline_suite  one path per edge: BFS-tree path to its tail + the edge
//   flow_suite      feasible circulation (every edge >= 1, free returns to
//                   the source), Eulerian circuit, split at the returns
//   min_suite       same reduction solved at minimum cost, which minimizes
//                   the total path length
//
// Ties are broken by ascending edge id throughout.

#include "mbt/error.hpp"
#include "mbt/flow.hpp"

#include <algorithm>
#include <cstddef>
#include <deque>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mbt::tsg {

struct CoverGraph {
    int vertex_count = 1;
    int source = 0;
    std::vector<std::pair<int, int>> edges; // (tail, head); index = edge id
};

using Path = std::vector<int>; // edge ids, starting at the source

struct TestSuite {
    std::vector<Path> paths;

    std::size_t total_length() const
    {
        std::size_t n = 0;
        for (const auto& p : paths) n += p.size();
        return n;
    }
};

namespace detail {

inline std::vector<std::vector<int>> out_edges(const CoverGraph& g)
{
    std::vector<std::vector<int>> out(static_cast<std::size_t>(g.vertex_count));
    for (int id = 0; id < static_cast<int>(g.edges.size()); ++id)
        out[static_cast<std::size_t>(g.edges[static_cast<std::size_t>(id)].first)].push_back(id);
    return out;
}

struct BfsTree {
    std::vector<int> depth;       // -1 when unreachable
    std::vector<int> parent_edge; // -1 for the source
};

inline BfsTree bfs_tree(const CoverGraph& g)
{
    BfsTree t{std::vector<int>(static_cast<std::size_t>(g.vertex_count), -1),
              std::vector<int>(static_cast<std::size_t>(g.vertex_count), -1)};
    auto out = out_edges(g);
    std::deque<int> q{g.source};
    t.depth[static_cast<std::size_t>(g.source)] = 0;
    while (!q.empty()) {
        int v = q.front();
        q.pop_front();
        for (int id : out[static_cast<std::size_t>(v)]) {
            int w = g.edges[static_cast<std::size_t>(id)].second;
            if (t.depth[static_cast<std::size_t>(w)] < 0) {
                t.depth[static_cast<std::size_t>(w)] = t.depth[static_cast<std::size_t>(v)] + 1;
                t.parent_edge[static_cast<std::size_t>(w)] = id;
                q.push_back(w);
            }
        }
    }
    return t;
}

inline void require_single_source(const CoverGraph& g, const BfsTree& t)
{
    for (int v = 0; v < g.vertex_count; ++v)
        if (t.depth[static_cast<std::size_t>(v)] < 0)
            fail(ErrorCode::UnreachableVertex, "vertex " + std::to_string(v + 1) + " is not reachable from the source");
}

inline void validate(const CoverGraph& g)
{
    if (g.vertex_count < 1 || g.source < 0 || g.source >= g.vertex_count)
        fail(ErrorCode::MalformedInput, "cover graph needs at least one vertex and a valid source");
    for (const auto& [u, v] : g.edges)
        if (u < 0 || u >= g.vertex_count || v < 0 || v >= g.vertex_count)
            fail(ErrorCode::MalformedInput, "edge endpoint out of range");
}

} // namespace detail

inline int diameter(const CoverGraph& g)
{
    detail::validate(g);
    auto t = detail::bfs_tree(g);
    detail::require_single_source(g, t);
    return *std::max_element(t.depth.begin(), t.depth.end());
}

inline TestSuite baseline_suite(const CoverGraph& g)
{
    detail::validate(g);
    auto t = detail::bfs_tree(g);
    detail::require_single_source(g, t);
    TestSuite suite;
    suite.paths.reserve(g.edges.size());
    for (int id = 0; id < static_cast<int>(g.edges.size()); ++id) {
        Path p;
        for (int v = g.edges[static_cast<std::size_t>(id)].first; t.parent_edge[static_cast<std::size_t>(v)] >= 0;
             v = g.edges[static_cast<std::size_t>(t.parent_edge[static_cast<std::size_t>(v)])].first)
            p.push_back(t.parent_edge[static_cast<std::size_t>(v)]);
        std::reverse(p.begin(), p.end());
        p.push_back(id);
        suite.paths.push_back(std::move(p));
    }
    return suite;
}

/// Edge of the multigraph handed to euler_circuit: an endpoint pair plus a
/// multiplicity.
struct MultiEdge {
    int from = 0;
    int to = 0;
    std::int64_t count = 1;
};

/// Hierholzer's construction from `start`. Returns indices into `edges`, one
/// entry per traversed copy. Throws UNBALANCED_DEGREE if some vertex has
/// in-degree != out-degree or the copies are not all reachable from `start`.
inline std::vector<int> euler_circuit(int vertex_count, const std::vector<MultiEdge>& edges, int start)
{
    const auto n = static_cast<std::size_t>(vertex_count);
    std::vector<std::int64_t> balance(n, 0);
    std::vector<std::vector<int>> out(n);
    std::int64_t total = 0;
    for (int id = 0; id < static_cast<int>(edges.size()); ++id) {
        const auto& e = edges[static_cast<std::size_t>(id)];
        if (e.count <= 0) continue;
        balance[static_cast<std::size_t>(e.from)] -= e.count;
        balance[static_cast<std::size_t>(e.to)] += e.count;
        out[static_cast<std::size_t>(e.from)].push_back(id);
        total += e.count;
    }
    for (std::size_t v = 0; v < n; ++v)
        if (balance[v] != 0)
            fail(ErrorCode::UnbalancedDegree, "vertex " + std::to_string(v + 1) + " has net degree "
                                                  + std::to_string(balance[v]));

    std::vector<std::int64_t> left(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) left[i] = std::max<std::int64_t>(edges[i].count, 0);
    std::vector<std::size_t> cursor(n, 0);

    std::vector<int> circuit;
    circuit.reserve(static_cast<std::size_t>(total));
    std::vector<std::pair<int, int>> stack{{start, -1}}; // (vertex, edge used to reach it)
    while (!stack.empty()) {
        int v = stack.back().first;
        auto& c = cursor[static_cast<std::size_t>(v)];
        const auto& adj = out[static_cast<std::size_t>(v)];
        while (c < adj.size() && left[static_cast<std::size_t>(adj[c])] == 0) ++c;
        if (c < adj.size()) {
            int id = adj[c];
            --left[static_cast<std::size_t>(id)];
            stack.emplace_back(edges[static_cast<std::size_t>(id)].to, id);
        } else {
            if (stack.back().second >= 0) circuit.push_back(stack.back().second);
            stack.pop_back();
        }
    }
    if (static_cast<std::int64_t>(circuit.size()) != total)
        fail(ErrorCode::UnbalancedDegree, "flow edges are not connected to the start vertex");
    std::reverse(circuit.begin(), circuit.end());
    return circuit;
}

namespace detail {

// Builds G' = G + {v -> s}, lower bound 1 on original edges, 0 on returns,
// capacity |E| + 1 as the finite stand-in for infinity, cost 1 / 0.
inline flow::FlowNetwork covering_network(const CoverGraph& g)
{
    const auto cap = static_cast<flow::Amount>(g.edges.size()) + 1;
    flow::FlowNetwork net(g.vertex_count);
    for (const auto& [u, v] : g.edges) net.add_edge(u, v, 1, cap, 1);
    for (int v = 0; v < g.vertex_count; ++v) net.add_edge(v, g.source, 0, cap, 0);
    return net;
}

inline TestSuite split_circulation(const CoverGraph& g, const std::vector<flow::Amount>& f)
{
    const int m = static_cast<int>(g.edges.size());
    std::vector<MultiEdge> multi;
    multi.reserve(f.size());
    for (int id = 0; id < m; ++id)
        multi.push_back({g.edges[static_cast<std::size_t>(id)].first, g.edges[static_cast<std::size_t>(id)].second,
                         f[static_cast<std::size_t>(id)]});
    for (int v = 0; v < g.vertex_count; ++v) {
        // The s -> s return never helps; dropping it keeps the circuit free of empty paths.
        flow::Amount c = v == g.source ? 0 : f[static_cast<std::size_t>(m + v)];
        multi.push_back({v, g.source, c});
    }

    TestSuite suite;
    Path current;
    for (int id : euler_circuit(g.vertex_count, multi, g.source)) {
        if (id < m) {
            current.push_back(id);
        } else if (!current.empty()) {
            suite.paths.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) suite.paths.push_back(std::move(current));
    return suite;
}

} // namespace detail

inline TestSuite flow_suite(const CoverGraph& g)
{
    detail::validate(g);
    detail::require_single_source(g, detail::bfs_tree(g));
    if (g.edges.empty()) return {};
    auto net = detail::covering_network(g);
    return detail::split_circulation(g, flow::solve_circulation(net));
}

inline TestSuite min_suite(const CoverGraph& g)
{
    detail::validate(g);
    detail::require_single_source(g, detail::bfs_tree(g));
    if (g.edges.empty()) return {};
    auto net = detail::covering_network(g);
    return detail::split_circulation(g, flow::solve_min_cost_circulation(net));
}

struct CoverageReport {
    std::vector<std::size_t> hits; // per edge id
    std::vector<int> uncovered;
    std::size_t path_count = 0;
    std::size_t total_length = 0;
    std::size_t diameter = 0;
    std::size_t upper_bound = 0; // (D + 1) * |E|

    bool complete() const noexcept { return uncovered.empty(); }
    bool within_bound() const noexcept { return total_length <= upper_bound; }
};

/// Checks that every path starts at the source and chains head-to-tail
/// (MALFORMED_PATH otherwise), then tallies per-edge coverage.
inline CoverageReport verify_coverage(const CoverGraph& g, const TestSuite& suite)
{
    CoverageReport r;
    r.hits.assign(g.edges.size(), 0);
    r.path_count = suite.paths.size();
    r.diameter = static_cast<std::size_t>(diameter(g));
    r.upper_bound = (r.diameter + 1) * g.edges.size();
    for (std::size_t pi = 0; pi < suite.paths.size(); ++pi) {
        int at = g.source;
        for (int id : suite.paths[pi]) {
            if (id < 0 || id >= static_cast<int>(g.edges.size()))
                fail(ErrorCode::MalformedPath, "path " + std::to_string(pi + 1) + " names unknown edge " + std::to_string(id));
            const auto& [u, v] = g.edges[static_cast<std::size_t>(id)];
            if (u != at)
                fail(ErrorCode::MalformedPath, "path " + std::to_string(pi + 1) + " breaks at edge " + std::to_string(id));
            ++r.hits[static_cast<std::size_t>(id)];
            at = v;
        }
        r.total_length += suite.paths[pi].size();
    }
    for (int id = 0; id < static_cast<int>(r.hits.size()); ++id)
        if (r.hits[static_cast<std::size_t>(id)] == 0) r.uncovered.push_back(id);
    return r;
}

enum class Algorithm { Baseline, Flow, Min };

inline Algorithm algorithm_from_string(const std::string& s)
{
    if (s == "baseline") return Algorithm::Baseline;
    if (s == "flow") return Algorithm::Flow;
    if (s == "min") return Algorithm::Min;
    fail(ErrorCode::Usage, "unknown algorithm '" + s + "' (expected baseline, flow or min)");
}

inline const char* to_string(Algorithm a)
{
    switch (a) {
    case Algorithm::Baseline: return "baseline";
    case Algorithm::Flow: return "flow";
    case Algorithm::Min: return "min";
    }
    return "?";
}

inline TestSuite generate(const CoverGraph& g, Algorithm a)
{
    switch (a) {
    case Algorithm::Baseline: return baseline_suite(g);
    case Algorithm::Flow: return flow_suite(g);
    case Algorithm::Min: return min_suite(g);
    }
    return {};
}

} // namespace mbt::tsg
