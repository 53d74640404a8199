#include "mbt/tsg.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mbt;
using tsg::CoverGraph;
using tsg::Path;

namespace {

CoverGraph chain() { return {3, 0, {{0, 1}, {1, 2}}}; }

CoverGraph star(int k)
{
    CoverGraph g{k + 1, 0, {}};
    for (int i = 1; i <= k; ++i) g.edges.emplace_back(0, i);
    return g;
}

// The example transition graph with edges E1..E7 (ids 0..6): E1 and E2 lead
// from the initial state to the same state, E3 continues from there, then
// E4 E5 E6 form a chain and E7 is a shortcut out of E3's head.
CoverGraph branching()
{
    return {6, 0, {{0, 1}, {0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {2, 4}}};
}

void expect_valid(const CoverGraph& g, const tsg::TestSuite& s)
{
    for (const Path& p : s.paths) {
        ASSERT_FALSE(p.empty());
        EXPECT_EQ(g.edges[static_cast<std::size_t>(p.front())].first, g.source);
        for (std::size_t i = 1; i < p.size(); ++i)
            EXPECT_EQ(g.edges[static_cast<std::size_t>(p[i - 1])].second, g.edges[static_cast<std::size_t>(p[i])].first);
    }
    auto r = tsg::verify_coverage(g, s);
    EXPECT_TRUE(r.uncovered.empty());
}

} // namespace

TEST(Diameter, Examples)
{
    EXPECT_EQ(tsg::diameter({4, 0, {{0, 1}, {1, 2}, {2, 3}}}), 3);
    EXPECT_EQ(tsg::diameter({1, 0, {}}), 0);
    EXPECT_EQ(tsg::diameter(star(5)), 1);
}

TEST(Diameter, UnreachableVertexIsRejected)
{
    try {
        tsg::diameter({3, 0, {{0, 1}}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnreachableVertex);
    }
}

TEST(Baseline, Chain)
{
    auto s = tsg::baseline_suite(chain());
    EXPECT_EQ(s.paths, (std::vector<Path>{{0}, {0, 1}}));
    EXPECT_EQ(s.total_length(), 3u);
}

TEST(Baseline, Star)
{
    auto s = tsg::baseline_suite(star(4));
    EXPECT_EQ(s.paths.size(), 4u);
    EXPECT_EQ(s.total_length(), 4u);
}

TEST(Baseline, BranchingGraphHasOnePathPerEdge)
{
    auto s = tsg::baseline_suite(branching());
    EXPECT_EQ(s.paths.size(), 7u);
    expect_valid(branching(), s);
}

TEST(FlowSuite, Chain)
{
    auto s = tsg::flow_suite(chain());
    EXPECT_EQ(s.paths, (std::vector<Path>{{0, 1}}));
}

TEST(FlowSuite, Star)
{
    auto s = tsg::flow_suite(star(4));
    EXPECT_EQ(s.paths.size(), 4u);
    EXPECT_EQ(s.total_length(), 4u);
}

TEST(FlowSuite, BranchingGraph)
{
    auto s = tsg::flow_suite(branching());
    expect_valid(branching(), s);
    // Two paths from the initial state are forced by E1 and E2; E3 is on both.
    EXPECT_EQ(s.paths.size(), 2u);
    EXPECT_EQ(s.total_length(), 8u);
}

TEST(MinSuite, ChainAndStar)
{
    EXPECT_EQ(tsg::min_suite(chain()).total_length(), 2u);
    EXPECT_EQ(tsg::min_suite(chain()).paths.size(), 1u);
    EXPECT_EQ(tsg::min_suite(star(6)).total_length(), 6u);
}

TEST(MinSuite, BranchingGraph)
{
    auto s = tsg::min_suite(branching());
    expect_valid(branching(), s);
    EXPECT_EQ(s.total_length(), 8u);
    EXPECT_EQ(oracle::min_cover_length(branching()), 8u);
}

TEST(MinSuite, EmptyGraph)
{
    EXPECT_TRUE(tsg::min_suite({1, 0, {}}).paths.empty());
    EXPECT_TRUE(tsg::flow_suite({1, 0, {}}).paths.empty());
}

// Oracle outputs for a few fixed graphs, computed once and frozen so that a
// regression in either side shows up here first.
TEST(MinSuite, FrozenOracleValues)
{
    struct Case {
        CoverGraph g;
        std::size_t expected;
    };
    std::vector<Case> cases{
        {{2, 0, {{0, 1}, {1, 0}}}, 2},                         // 2-cycle: one closed walk
        {{3, 0, {{0, 1}, {0, 2}, {1, 2}, {2, 2}}}, 4},         // s->a->b, s->b, loop at b
        {{3, 0, {{0, 1}, {1, 2}, {1, 2}, {1, 2}}}, 6},         // three parallels after a bottleneck
        {{4, 0, {{0, 1}, {1, 2}, {2, 1}, {2, 3}, {3, 0}}}, 6}, // one walk, repeating a->b once
    };
    for (const auto& c : cases) {
        EXPECT_EQ(oracle::min_cover_length(c.g), c.expected);
        EXPECT_EQ(tsg::min_suite(c.g).total_length(), c.expected);
    }
}

TEST(MinSuite, EqualsExhaustiveSearchOnSmallGraphs)
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        auto g = oracle::random_rooted_graph(rng, 6, 7);
        auto s = tsg::min_suite(g);
        expect_valid(g, s);
        ASSERT_EQ(s.total_length(), oracle::min_cover_length(g)) << "trial " << trial;
        ASSERT_GE(s.total_length(), g.edges.size());
    }
}

TEST(Suites, OrderingAndBoundOnRandomGraphs)
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        auto g = oracle::random_rooted_graph(rng, 30, 90);
        auto b = tsg::baseline_suite(g), f = tsg::flow_suite(g), m = tsg::min_suite(g);
        expect_valid(g, b);
        expect_valid(g, f);
        expect_valid(g, m);
        const auto bound = static_cast<std::size_t>(tsg::diameter(g) + 1) * g.edges.size();
        ASSERT_LE(m.total_length(), f.total_length()) << "trial " << trial;
        ASSERT_LE(f.total_length(), b.total_length()) << "trial " << trial;
        ASSERT_LE(b.total_length(), bound) << "trial " << trial;
    }
}

TEST(Suites, Deterministic)
{
    std::mt19937_64 rng(5);
    auto g = oracle::random_rooted_graph(rng, 20, 60);
    EXPECT_EQ(tsg::flow_suite(g).paths, tsg::flow_suite(g).paths);
    EXPECT_EQ(tsg::min_suite(g).paths, tsg::min_suite(g).paths);
}

TEST(Euler, Triangle)
{
    auto c = tsg::euler_circuit(3, {{0, 1, 1}, {1, 2, 1}, {2, 0, 1}}, 0);
    EXPECT_EQ(c, (std::vector<int>{0, 1, 2}));
}

TEST(Euler, TwoLoopsThroughStart)
{
    auto c = tsg::euler_circuit(3, {{0, 1, 1}, {1, 0, 1}, {0, 2, 1}, {2, 0, 1}}, 0);
    ASSERT_EQ(c.size(), 4u);
    std::vector<int> sorted = c;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(sorted, (std::vector<int>{0, 1, 2, 3}));
}

TEST(Euler, ChainWithReturn)
{
    // Flow multigraph of s -> a -> b: only the backward edge b -> s is used.
    auto c = tsg::euler_circuit(3, {{0, 1, 1}, {1, 2, 1}, {0, 0, 0}, {1, 0, 0}, {2, 0, 1}}, 0);
    EXPECT_EQ(c, (std::vector<int>{0, 1, 4}));
}

TEST(Euler, MultiplicitiesAreExpanded)
{
    auto c = tsg::euler_circuit(2, {{0, 1, 3}, {1, 0, 3}}, 0);
    EXPECT_EQ(c, (std::vector<int>{0, 1, 0, 1, 0, 1}));
}

TEST(Euler, UnbalancedIsRejected)
{
    try {
        tsg::euler_circuit(2, {{0, 1, 2}, {1, 0, 1}}, 0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnbalancedDegree);
    }
}

TEST(VerifyCoverage, ReportsMissingEdge)
{
    CoverGraph g = star(3);
    tsg::TestSuite s{{{0}, {2}}};
    auto r = tsg::verify_coverage(g, s);
    EXPECT_EQ(r.uncovered, std::vector<int>{1});
}

TEST(VerifyCoverage, RejectsBrokenPath)
{
    tsg::TestSuite s{{{1}}};
    EXPECT_THROW(tsg::verify_coverage(chain(), s), Error);
}

TEST(Algorithm, Names)
{
    EXPECT_EQ(tsg::algorithm_from_string("flow"), tsg::Algorithm::Flow);
    EXPECT_STREQ(tsg::to_string(tsg::Algorithm::Min), "min");
    EXPECT_THROW(tsg::algorithm_from_string("greedy"), Error);
}
