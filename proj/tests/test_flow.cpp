#include "mbt/flow.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mbt;
using flow::Amount;
using flow::FlowNetwork;

TEST(MaxFlow, SingleEdge)
{
    FlowNetwork net(2);
    net.add_edge(0, 1, 0, 5);
    EXPECT_EQ(flow::max_flow(net, 0, 1).value, 5);
}

TEST(MaxFlow, TwoDisjointPaths)
{
    FlowNetwork net(4);
    net.add_edge(0, 1, 0, 10);
    net.add_edge(1, 3, 0, 3);
    net.add_edge(0, 2, 0, 4);
    net.add_edge(2, 3, 0, 10);
    auto r = flow::max_flow(net, 0, 3);
    EXPECT_EQ(r.value, 7);
    EXPECT_EQ(r.flow, (std::vector<Amount>{3, 3, 4, 4}));
}

TEST(MaxFlow, SourceEqualsSink)
{
    FlowNetwork net(1);
    net.add_edge(0, 0, 0, 3);
    EXPECT_EQ(flow::max_flow(net, 0, 0).value, 0);
}

TEST(MaxFlow, MatchesUnitAugmentationOnRandomNetworks)
{
    std::mt19937_64 rng(20240611);
    std::uniform_int_distribution<int> nv(2, 8), cap(0, 10);
    for (int trial = 0; trial < 600; ++trial) {
        const int n = nv(rng);
        std::uniform_int_distribution<int> any(0, n - 1), ne(0, 3 * n);
        FlowNetwork net(n);
        std::vector<std::tuple<int, int, Amount>> edges;
        for (int k = ne(rng); k > 0; --k) {
            int u = any(rng), v = any(rng);
            Amount c = cap(rng);
            net.add_edge(u, v, 0, c);
            edges.emplace_back(u, v, c);
        }
        int s = any(rng), t = any(rng);
        auto r = flow::max_flow(net, s, t);
        ASSERT_EQ(r.value, oracle::unit_max_flow(n, edges, s, t)) << "trial " << trial;

        // The assignment is a feasible flow of that value.
        std::vector<Amount> bal(static_cast<std::size_t>(n), 0);
        for (std::size_t i = 0; i < edges.size(); ++i) {
            ASSERT_GE(r.flow[i], 0);
            ASSERT_LE(r.flow[i], std::get<2>(edges[i]));
            bal[static_cast<std::size_t>(std::get<0>(edges[i]))] -= r.flow[i];
            bal[static_cast<std::size_t>(std::get<1>(edges[i]))] += r.flow[i];
        }
        for (int v = 0; v < n; ++v) {
            if (s == t || (v != s && v != t)) ASSERT_EQ(bal[static_cast<std::size_t>(v)], 0);
        }
        if (s != t) ASSERT_EQ(bal[static_cast<std::size_t>(t)], r.value);
    }
}

TEST(Circulation, TwoCycleWithLowerBounds)
{
    FlowNetwork net(2);
    net.add_edge(0, 1, 1, 4);
    net.add_edge(1, 0, 1, 4);
    auto f = flow::solve_circulation(net);
    EXPECT_EQ(f, (std::vector<Amount>{1, 1}));
    EXPECT_TRUE(flow::is_circulation(net, f));
}

TEST(Circulation, SelfLoopCarriesNothing)
{
    FlowNetwork net(1);
    net.add_edge(0, 0, 0, 3);
    EXPECT_EQ(flow::solve_circulation(net), std::vector<Amount>{0});
}

TEST(Circulation, InfeasibleDemandIsReported)
{
    FlowNetwork net(2);
    net.add_edge(0, 1, 2, 3);
    net.add_edge(1, 0, 0, 1);
    try {
        flow::solve_circulation(net);
        FAIL() << "expected INFEASIBLE";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Infeasible);
    }
}

TEST(Circulation, AgreesWithExhaustiveSearch)
{
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> ne(1, 6), lower(0, 2), extra(0, 2), cost(0, 1), vv(0, 5);
    int feasible = 0;
    for (int trial = 0; trial < 400; ++trial) {
        FlowNetwork net(6);
        for (int k = ne(rng); k > 0; --k) {
            Amount l = lower(rng);
            net.add_edge(vv(rng), vv(rng), l, l + extra(rng), cost(rng));
        }
        auto expected = oracle::brute_force_min_circulation(net);
        if (!expected) {
            EXPECT_THROW(flow::solve_circulation(net), Error) << "trial " << trial;
            EXPECT_THROW(flow::solve_min_cost_circulation(net), Error) << "trial " << trial;
            continue;
        }
        ++feasible;
        auto f = flow::solve_circulation(net);
        ASSERT_TRUE(flow::is_circulation(net, f)) << "trial " << trial;
        auto g = flow::solve_min_cost_circulation(net);
        ASSERT_TRUE(flow::is_circulation(net, g)) << "trial " << trial;
        ASSERT_EQ(flow::circulation_cost(net, g), *expected) << "trial " << trial;
    }
    EXPECT_GT(feasible, 50);
}

TEST(Circulation, RejectsNegativeCosts)
{
    FlowNetwork net(1);
    net.add_edge(0, 0, 0, 1, -1);
    EXPECT_THROW(flow::solve_min_cost_circulation(net), Error);
}

TEST(FlowNetwork, RejectsBadEdges)
{
    FlowNetwork net(2);
    EXPECT_THROW(net.add_edge(0, 2, 0, 1), Error);
    EXPECT_THROW(net.add_edge(0, 1, 3, 2), Error);
}
