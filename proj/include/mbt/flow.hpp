#pragma once

// Integral flow solvers: Dinic max-flow, lower-bounded circulation via the
// super-source/super-sink reduction, and min-cost circulation by successive
// shortest paths with vertex potentials (non-negative costs only).
//
// Residual arcs are scanned in ascending edge-id order everywhere, so every
// result is a deterministic function of the input network.

#include "mbt/error.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <queue>
#include <string>
#include <utility>
#include <vector>

namespace mbt::flow {

using Amount = std::int64_t;

struct FlowEdge {
    int from = 0;
    int to = 0;
    Amount lower = 0;
    Amount capacity = 0;
    Amount cost = 0;
};

class FlowNetwork {
public:
    explicit FlowNetwork(int vertex_count = 0) : n_(vertex_count) {}

    int add_edge(int from, int to, Amount lower, Amount capacity, Amount cost = 0)
    {
        if (from < 0 || from >= n_ || to < 0 || to >= n_) fail(ErrorCode::Usage, "flow edge endpoint out of range");
        if (lower < 0 || lower > capacity) fail(ErrorCode::Usage, "flow edge needs 0 <= lower <= capacity");
        edges_.push_back({from, to, lower, capacity, cost});
        return static_cast<int>(edges_.size()) - 1;
    }

    int vertex_count() const noexcept { return n_; }
    const std::vector<FlowEdge>& edges() const noexcept { return edges_; }

private:
    int n_;
    std::vector<FlowEdge> edges_;
};

/// True iff `f` respects bounds on every edge and balances at every vertex.
inline bool is_circulation(const FlowNetwork& net, const std::vector<Amount>& f)
{
    if (f.size() != net.edges().size()) return false;
    std::vector<Amount> balance(static_cast<std::size_t>(net.vertex_count()), 0);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto& e = net.edges()[i];
        if (f[i] < e.lower || f[i] > e.capacity) return false;
        balance[static_cast<std::size_t>(e.from)] -= f[i];
        balance[static_cast<std::size_t>(e.to)] += f[i];
    }
    return std::all_of(balance.begin(), balance.end(), [](Amount b) { return b == 0; });
}

namespace detail {

/// Paired residual arcs: arc 2k is forward, 2k+1 its reverse.
class Residual {
public:
    struct Arc {
        int to;
        Amount cap;
        Amount cost;
    };

    explicit Residual(int n) : adj(static_cast<std::size_t>(n)) {}

    int add(int from, int to, Amount cap, Amount cost = 0)
    {
        int id = static_cast<int>(arcs.size());
        arcs.push_back({to, cap, cost});
        arcs.push_back({from, 0, -cost});
        adj[static_cast<std::size_t>(from)].push_back(id);
        adj[static_cast<std::size_t>(to)].push_back(id + 1);
        return id;
    }

    Amount flow_on(int forward_arc) const { return arcs[static_cast<std::size_t>(forward_arc) ^ 1U].cap; }

    void push(int arc, Amount amount)
    {
        arcs[static_cast<std::size_t>(arc)].cap -= amount;
        arcs[static_cast<std::size_t>(arc) ^ 1U].cap += amount;
    }

    int size() const { return static_cast<int>(adj.size()); }

    std::vector<Arc> arcs;
    std::vector<std::vector<int>> adj;
};

/// Dinic restricted to arcs accepted by `usable`.
template <class Usable>
Amount dinic(Residual& r, int s, int t, Usable&& usable)
{
    const auto n = static_cast<std::size_t>(r.size());
    std::vector<int> level(n), next(n);
    Amount total = 0;

    auto bfs = [&] {
        std::fill(level.begin(), level.end(), -1);
        std::deque<int> q{s};
        level[static_cast<std::size_t>(s)] = 0;
        while (!q.empty()) {
            int v = q.front();
            q.pop_front();
            for (int a : r.adj[static_cast<std::size_t>(v)]) {
                const auto& arc = r.arcs[static_cast<std::size_t>(a)];
                if (arc.cap > 0 && level[static_cast<std::size_t>(arc.to)] < 0 && usable(a)) {
                    level[static_cast<std::size_t>(arc.to)] = level[static_cast<std::size_t>(v)] + 1;
                    q.push_back(arc.to);
                }
            }
        }
        return level[static_cast<std::size_t>(t)] >= 0;
    };

    // Iterative blocking-flow search along the level graph.
    auto augment = [&]() -> Amount {
        std::vector<int> stack; // arcs on the current s-v path
        int v = s;
        while (true) {
            if (v == t) {
                Amount bottleneck = std::numeric_limits<Amount>::max();
                for (int a : stack) bottleneck = std::min(bottleneck, r.arcs[static_cast<std::size_t>(a)].cap);
                for (int a : stack) r.push(a, bottleneck);
                return bottleneck;
            }
            auto& i = next[static_cast<std::size_t>(v)];
            const auto& out = r.adj[static_cast<std::size_t>(v)];
            bool advanced = false;
            for (; i < static_cast<int>(out.size()); ++i) {
                const int a = out[static_cast<std::size_t>(i)];
                const auto& arc = r.arcs[static_cast<std::size_t>(a)];
                if (arc.cap > 0 && level[static_cast<std::size_t>(arc.to)] == level[static_cast<std::size_t>(v)] + 1
                    && usable(a)) {
                    stack.push_back(out[static_cast<std::size_t>(i)]);
                    v = arc.to;
                    advanced = true;
                    break;
                }
            }
            if (advanced) continue;
            // Dead end: retreat and skip the arc that led here.
            if (stack.empty()) return 0;
            level[static_cast<std::size_t>(v)] = -1;
            int a = stack.back();
            stack.pop_back();
            v = r.arcs[static_cast<std::size_t>(a) ^ 1U].to;
            ++next[static_cast<std::size_t>(v)];
        }
    };

    while (bfs()) {
        std::fill(next.begin(), next.end(), 0);
        while (Amount pushed = augment()) total += pushed;
    }
    return total;
}

inline Amount dinic(Residual& r, int s, int t)
{
    return dinic(r, s, t, [](int) { return true; });
}

} // namespace detail

struct MaxFlowResult {
    Amount value = 0;
    std::vector<Amount> flow; // per network edge
};

/// Maximum s-t flow by Dinic's algorithm. Lower bounds are ignored; costs
/// are irrelevant.
inline MaxFlowResult max_flow(const FlowNetwork& net, int s, int t)
{
    MaxFlowResult result;
    result.flow.assign(net.edges().size(), 0);
    if (s == t) return result;
    detail::Residual r(net.vertex_count());
    std::vector<int> arc_of;
    for (const auto& e : net.edges()) arc_of.push_back(r.add(e.from, e.to, e.capacity));
    result.value = detail::dinic(r, s, t);
    for (std::size_t i = 0; i < arc_of.size(); ++i) result.flow[i] = r.flow_on(arc_of[i]);
    return result;
}

namespace detail {

// Lower-bound reduction shared by both circulation solvers: f = l + f' with
// 0 <= f' <= u - l, and vertex demands d(v) = sum l(in) - sum l(out) served
// from a super source (d > 0) or drained to a super sink (d < 0).
struct Reduction {
    Residual residual;
    std::vector<int> arc_of;
    int source;
    int sink;
    Amount required = 0;
};

inline Reduction reduce(const FlowNetwork& net)
{
    const int n = net.vertex_count();
    Reduction red{Residual(n + 2), {}, n, n + 1, 0};
    std::vector<Amount> demand(static_cast<std::size_t>(n), 0);
    for (const auto& e : net.edges()) {
        red.arc_of.push_back(red.residual.add(e.from, e.to, e.capacity - e.lower, e.cost));
        demand[static_cast<std::size_t>(e.to)] += e.lower;
        demand[static_cast<std::size_t>(e.from)] -= e.lower;
    }
    for (int v = 0; v < n; ++v) {
        Amount d = demand[static_cast<std::size_t>(v)];
        if (d > 0) {
            red.residual.add(red.source, v, d);
            red.required += d;
        } else if (d < 0) {
            red.residual.add(v, red.sink, -d);
        }
    }
    return red;
}

inline std::vector<Amount> lift(const FlowNetwork& net, const Reduction& red)
{
    std::vector<Amount> f(net.edges().size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = net.edges()[i].lower + red.residual.flow_on(red.arc_of[i]);
    return f;
}

} // namespace detail

/// Feasible circulation respecting lower bounds. Throws INFEASIBLE when none
/// exists.
inline std::vector<Amount> solve_circulation(const FlowNetwork& net)
{
    auto red = detail::reduce(net);
    Amount pushed = detail::dinic(red.residual, red.source, red.sink);
    if (pushed != red.required)
        fail(ErrorCode::Infeasible, "circulation demands " + std::to_string(red.required) + ", routed "
                                        + std::to_string(pushed));
    return detail::lift(net, red);
}

/// Minimum-cost feasible circulation. Costs must be non-negative, which
/// makes the zero residual flow optimal and lets potentials start at zero.
///
/// Primal-dual successive shortest paths: each phase runs Dijkstra on reduced
/// costs, folds the distances into the potentials and then saturates the
/// zero-reduced-cost subgraph with a blocking flow, so the number of phases is
/// bounded by the number of distinct path costs rather than by the demand.
inline std::vector<Amount> solve_min_cost_circulation(const FlowNetwork& net)
{
    for (const auto& e : net.edges())
        if (e.cost < 0) fail(ErrorCode::Usage, "min-cost circulation requires non-negative costs");

    auto red = detail::reduce(net);
    auto& r = red.residual;
    const auto n = static_cast<std::size_t>(r.size());
    constexpr Amount inf = std::numeric_limits<Amount>::max() / 4;
    std::vector<Amount> potential(n, 0), dist(n);
    Amount pushed = 0;

    auto reduced = [&](int from, const detail::Residual::Arc& arc) {
        return arc.cost + potential[static_cast<std::size_t>(from)] - potential[static_cast<std::size_t>(arc.to)];
    };

    while (pushed < red.required) {
        std::fill(dist.begin(), dist.end(), inf);
        using Item = std::pair<Amount, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        dist[static_cast<std::size_t>(red.source)] = 0;
        pq.emplace(0, red.source);
        while (!pq.empty()) {
            auto [d, v] = pq.top();
            pq.pop();
            if (d != dist[static_cast<std::size_t>(v)]) continue;
            for (int a : r.adj[static_cast<std::size_t>(v)]) {
                const auto& arc = r.arcs[static_cast<std::size_t>(a)];
                if (arc.cap <= 0) continue;
                Amount nd = d + reduced(v, arc);
                if (nd < dist[static_cast<std::size_t>(arc.to)]) {
                    dist[static_cast<std::size_t>(arc.to)] = nd;
                    pq.emplace(nd, arc.to);
                }
            }
        }
        if (dist[static_cast<std::size_t>(red.sink)] >= inf) break;
        // Unreached vertices get the sink distance, which keeps every
        // residual reduced cost non-negative.
        const Amount cut = dist[static_cast<std::size_t>(red.sink)];
        for (std::size_t v = 0; v < n; ++v) potential[v] += std::min(dist[v], cut);

        Amount phase = detail::dinic(r, red.source, red.sink, [&](int a) {
            const auto& arc = r.arcs[static_cast<std::size_t>(a)];
            return reduced(r.arcs[static_cast<std::size_t>(a) ^ 1U].to, arc) == 0;
        });
        if (phase == 0) break;
        pushed += phase;
    }
    if (pushed != red.required)
        fail(ErrorCode::Infeasible, "circulation demands " + std::to_string(red.required) + ", routed "
                                        + std::to_string(pushed));
    return detail::lift(net, red);
}

inline Amount circulation_cost(const FlowNetwork& net, const std::vector<Amount>& f)
{
    Amount c = 0;
    for (std::size_t i = 0; i < f.size(); ++i) c += net.edges()[i].cost * f[i];
    return c;
}

} // namespace mbt::flow
