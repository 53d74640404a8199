#pragma once

// Breadth-first enumeration of a reference model's reachable states.
//
// A reference model is any type satisfying ReferenceModel: it has a typed
// State, produces the labeled actions enabled in a state, applies them
// purely, projects states to the canonical SystemState form and reports
// invariant violations. The explorer deduplicates on the canonical key,
// numbers states in BFS discovery order (the initial state is index 1 in
// every external format) and records one edge per (state, enabled action).

#include "mbt/action.hpp"
#include "mbt/error.hpp"
#include "mbt/system_state.hpp"

#include <concepts>
#include <cstddef>
#include <deque>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace mbt {

struct NamedViolation {
    std::string invariant;
    std::string detail;
};

template <class M>
concept ReferenceModel = requires(const M& m, const typename M::State& s, const Action& a) {
    { m.name() } -> std::convertible_to<std::string>;
    { m.init() } -> std::same_as<typename M::State>;
    { m.enabled(s) } -> std::same_as<std::vector<Action>>;
    { m.apply(s, a) } -> std::same_as<typename M::State>;
    { m.project(s) } -> std::same_as<SystemState>;
    { m.invariants(s) } -> std::same_as<std::vector<NamedViolation>>;
};

struct GraphEdge {
    std::size_t from = 0; // 0-based vertex
    std::size_t to = 0;
    Action action;
};

struct TransitionGraph {
    std::vector<SystemState> states; // states[0] is the initial state
    std::vector<GraphEdge> edges;

    std::size_t vertex_count() const noexcept { return states.size(); }
    std::size_t edge_count() const noexcept { return edges.size(); }
};

struct InvariantViolation {
    std::size_t state_index = 0; // 1-based
    std::string invariant;
    std::string detail;
    std::vector<std::size_t> counterexample; // edge indices from state 1 to state_index
};

struct ExploreOptions {
    std::size_t state_cap = 10'000'000;
    bool stop_at_first_violation = true;
};

struct ExploreResult {
    TransitionGraph graph;
    std::vector<InvariantViolation> violations;
    bool cap_exceeded = false;

    bool ok() const noexcept { return violations.empty() && !cap_exceeded; }
};

namespace detail {

inline std::vector<std::size_t> path_to(const std::vector<std::optional<std::size_t>>& parent_edge,
                                        const std::vector<GraphEdge>& edges, std::size_t v)
{
    std::vector<std::size_t> path;
    while (parent_edge[v]) {
        path.push_back(*parent_edge[v]);
        v = edges[*parent_edge[v]].from;
    }
    return {path.rbegin(), path.rend()};
}

} // namespace detail

/// BFS from the model's initial state. On an invariant violation the result
/// carries the shortest counterexample (BFS tree path); on hitting the state
/// cap it carries the partial graph with cap_exceeded set.
template <ReferenceModel M>
ExploreResult explore(const M& model, const ExploreOptions& options = {})
{
    using State = typename M::State;
    ExploreResult result;
    auto& graph = result.graph;

    std::unordered_map<std::string, std::size_t> index;
    std::vector<std::optional<std::size_t>> parent_edge;
    std::deque<std::pair<std::size_t, State>> frontier;

    auto discover = [&](State&& s) -> std::pair<std::size_t, bool> {
        SystemState projected = model.project(s);
        std::string key = projected.canonical_key();
        auto [it, inserted] = index.try_emplace(std::move(key), graph.states.size());
        if (!inserted) return {it->second, false};
        graph.states.push_back(std::move(projected));
        parent_edge.emplace_back();
        frontier.emplace_back(it->second, std::move(s));
        return {it->second, true};
    };

    auto check = [&](std::size_t v, const State& s) {
        for (auto& nv : model.invariants(s))
            result.violations.push_back({v + 1, std::move(nv.invariant), std::move(nv.detail),
                                         detail::path_to(parent_edge, graph.edges, v)});
        return result.violations.empty() || !options.stop_at_first_violation;
    };

    discover(model.init());
    if (!check(0, frontier.front().second)) return result;

    while (!frontier.empty()) {
        auto [v, state] = std::move(frontier.front());
        frontier.pop_front();
        for (auto& action : model.enabled(state)) {
            State next = model.apply(state, action);
            std::size_t edge_id = graph.edges.size();
            auto [w, fresh] = discover(std::move(next));
            graph.edges.push_back({v, w, std::move(action)});
            if (!fresh) continue;
            parent_edge[w] = edge_id;
            if (!check(w, frontier.back().second)) return result;
            if (graph.states.size() > options.state_cap) {
                result.cap_exceeded = true;
                return result;
            }
        }
    }
    return result;
}

/// Breadth-first distances from vertex 0; nullopt for unreachable vertices.
inline std::vector<std::optional<std::size_t>> bfs_distances(std::size_t vertex_count,
                                                             const std::vector<GraphEdge>& edges)
{
    std::vector<std::vector<std::size_t>> adj(vertex_count);
    for (const auto& e : edges) adj[e.from].push_back(e.to);
    std::vector<std::optional<std::size_t>> dist(vertex_count);
    if (vertex_count == 0) return dist;
    std::deque<std::size_t> q{0};
    dist[0] = 0;
    while (!q.empty()) {
        std::size_t v = q.front();
        q.pop_front();
        for (std::size_t w : adj[v]) {
            if (!dist[w]) {
                dist[w] = *dist[v] + 1;
                q.push_back(w);
            }
        }
    }
    return dist;
}

/// Sinks (no outgoing edges) as 0-based vertex ids, ascending.
inline std::vector<std::size_t> sinks(const TransitionGraph& g)
{
    std::vector<bool> has_out(g.vertex_count(), false);
    for (const auto& e : g.edges) has_out[e.from] = true;
    std::vector<std::size_t> out;
    for (std::size_t v = 0; v < has_out.size(); ++v)
        if (!has_out[v]) out.push_back(v);
    return out;
}

struct GraphStats {
    std::size_t vertices = 0;
    std::size_t edges = 0;
    std::size_t diameter = 0;
    std::size_t sinks = 0;
    bool single_source = true;
};

inline GraphStats graph_stats(const TransitionGraph& g)
{
    GraphStats st;
    st.vertices = g.vertex_count();
    st.edges = g.edge_count();
    for (const auto& d : bfs_distances(g.vertex_count(), g.edges)) {
        if (!d)
            st.single_source = false;
        else
            st.diameter = std::max(st.diameter, *d);
    }
    st.sinks = sinks(g).size();
    return st;
}

inline std::string stats_record(const GraphStats& st)
{
    return "V=" + std::to_string(st.vertices) + " E=" + std::to_string(st.edges) + " D="
           + std::to_string(st.diameter) + " sinks=" + std::to_string(st.sinks);
}

struct ProgressReport {
    std::vector<InvariantViolation> violations;
    std::size_t sinks_checked = 0;
    bool vacuous = false; // no sinks at all; nothing was checked
};

/// Bounded reading of an eventual-progress property: at every sink whose
/// bounds are exhausted (`exhausted`), `check` must return no complaint.
template <class Exhausted, class Check>
ProgressReport check_quiescent_progress(const TransitionGraph& g, Exhausted&& exhausted, Check&& check)
{
    ProgressReport report;
    auto ss = sinks(g);
    report.vacuous = ss.empty();
    for (std::size_t v : ss) {
        if (!exhausted(g.states[v])) continue;
        ++report.sinks_checked;
        if (std::optional<std::string> complaint = check(g.states[v]))
            report.violations.push_back({v + 1, "QuiescentProgress", std::move(*complaint), {}});
    }
    return report;
}

} // namespace mbt
