#include "mbt/explorer.hpp"
#include "mbt/models/registry.hpp"

#include <gtest/gtest.h>

#include <deque>
#include <map>

using namespace mbt;

namespace {

// Naive re-exploration keyed by canonical text, used to check vertex and edge
// counts of the real explorer.
template <class M>
std::pair<std::size_t, std::size_t> count_by_brute_force(const M& m)
{
    std::map<std::string, bool> seen;
    std::deque<typename M::State> todo{m.init()};
    seen[m.project(m.init()).canonical_key()] = true;
    std::size_t edges = 0;
    while (!todo.empty()) {
        auto s = todo.front();
        todo.pop_front();
        for (const auto& a : m.enabled(s)) {
            ++edges;
            auto t = m.apply(s, a);
            auto key = m.project(t).canonical_key();
            if (!seen.count(key)) {
                seen[key] = true;
                todo.push_back(t);
            }
        }
    }
    return {seen.size(), edges};
}

struct Stuck {
    using State = int;
    std::string name() const { return "stuck"; }
    State init() const { return 0; }
    std::vector<Action> enabled(const State&) const { return {}; }
    State apply(const State& s, const Action&) const { return s; }
    SystemState project(const State&) const { return {}; }
    std::vector<NamedViolation> invariants(const State&) const { return {}; }
};

Value init_replica(int r) { return vr::replica_image(false, {}, 0, 0, r, 0, false); }

Bounds vr_bounds(int replicas, int queries, int views)
{
    return {{"replicas", replicas}, {"max_queries", queries}, {"max_views", views}};
}

const Value& replica(const SystemState& s, int r) { return s.actors.at(static_cast<std::size_t>(r)); }

} // namespace

// --- explorer ---------------------------------------------------------------

TEST(Explorer, NoEnabledActions)
{
    auto r = explore(Stuck{});
    EXPECT_EQ(r.graph.vertex_count(), 1u);
    EXPECT_EQ(r.graph.edge_count(), 0u);
}

TEST(Explorer, KvOneActorOneSet)
{
    auto r = explore(kv::KvModel(kv::KvBounds{}));
    ASSERT_TRUE(r.ok());
    ASSERT_EQ(r.graph.vertex_count(), 3u);
    ASSERT_EQ(r.graph.edge_count(), 2u);
    EXPECT_EQ(r.graph.edges[0].action.kind, ActionKind::Inject);
    EXPECT_EQ(r.graph.edges[1].action.kind, ActionKind::Deliver);
    EXPECT_EQ(r.graph.edges[1].to, 2u);
}

TEST(Explorer, CountsMatchBruteForce)
{
    kv::KvBounds kb;
    kb.actors = 2;
    kb.max_sets = 1;
    kb.max_gets = 1;
    kb.max_crashes = 1;
    kb.max_drops = 1;
    kb.max_corrupts = 1;
    kv::KvModel km(kb);
    auto r = explore(km);
    auto [v, e] = count_by_brute_force(km);
    EXPECT_EQ(r.graph.vertex_count(), v);
    EXPECT_EQ(r.graph.edge_count(), e);

    vr::VrModel vm(vr::VrBounds::from(vr_bounds(3, 1, 0)));
    auto rv = explore(vm);
    auto [vv, ve] = count_by_brute_force(vm);
    EXPECT_EQ(rv.graph.vertex_count(), vv);
    EXPECT_EQ(rv.graph.edge_count(), ve);
}

TEST(Explorer, EveryVertexReachableFromInit)
{
    auto x = models::explore("vr", vr_bounds(3, 1, 1));
    auto d = bfs_distances(x.result.graph.vertex_count(), x.result.graph.edges);
    for (const auto& di : d) ASSERT_TRUE(di.has_value());
    EXPECT_TRUE(graph_stats(x.result.graph).single_source);
}

TEST(Explorer, SameModelGivesSameGraph)
{
    auto a = models::explore("vr", vr_bounds(3, 1, 1));
    auto b = models::explore("vr", vr_bounds(3, 1, 1));
    EXPECT_EQ(write_graph(a.graph), write_graph(b.graph));
}

TEST(Explorer, DeliveriesToDistinctActorsFormDiamonds)
{
    kv::KvBounds kb;
    kb.actors = 3;
    kb.max_sets = 2;
    auto r = explore(kv::KvModel(kb));
    const auto& g = r.graph;
    std::map<std::pair<std::size_t, std::string>, std::size_t> step; // (from, action) -> to
    std::vector<std::vector<std::size_t>> out(g.vertex_count());
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        step[{g.edges[i].from, to_text(g.edges[i].action)}] = g.edges[i].to;
        out[g.edges[i].from].push_back(i);
    }
    int diamonds = 0;
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
        for (std::size_t i : out[v]) {
            for (std::size_t j : out[v]) {
                const auto &a = g.edges[i].action, &b = g.edges[j].action;
                if (a.kind != ActionKind::Deliver || b.kind != ActionKind::Deliver) continue;
                if (a.event->destination == b.event->destination) continue;
                auto ab = step.find({g.edges[i].to, to_text(b)});
                auto ba = step.find({g.edges[j].to, to_text(a)});
                ASSERT_NE(ab, step.end());
                ASSERT_NE(ba, step.end());
                ASSERT_EQ(ab->second, ba->second);
                ++diamonds;
            }
        }
    }
    EXPECT_GT(diamonds, 0);
}

TEST(Explorer, StateCap)
{
    ExploreOptions o;
    o.state_cap = 100;
    auto x = models::explore("vr", vr_bounds(3, 1, 1), o);
    EXPECT_TRUE(x.result.cap_exceeded);
    EXPECT_FALSE(x.result.ok());
}

TEST(Explorer, InvariantsHoldOnKvWithFaults)
{
    kv::KvBounds kb;
    kb.actors = 2;
    kb.max_sets = 2;
    kb.max_gets = 1;
    kb.max_crashes = 1;
    kb.max_drops = 1;
    kb.max_corrupts = 1;
    auto r = explore(kv::KvModel(kb));
    EXPECT_TRUE(r.ok());
    EXPECT_GT(r.graph.vertex_count(), 100u);
}

// --- KV model -----------------------------------------------------------------

TEST(KvModel, SetInThreeActorSystemNotifiesAll)
{
    kv::KvBounds kb;
    kb.actors = 3;
    kv::KvModel m(kb);
    auto s = m.apply(m.init(), Action::inject(kv::set_request(1, "k", "v1")));
    s = m.apply(s, Action::deliver(kv::set_request(1, "k", "v1")));
    auto p = m.project(s);
    ASSERT_EQ(p.events.size(), 3u);
    for (const auto& e : p.events) EXPECT_EQ(e.kind, kv::kKeyUpdated);
    EXPECT_EQ(p.actors[1], kv::storage_image({{"k", "v1"}}));
}

TEST(KvModel, GetAbsentAnswersNil)
{
    kv::KvBounds kb;
    kb.max_gets = 1;
    kv::KvModel m(kb);
    auto get = kv::get_request(0, "k", 1);
    auto s = m.apply(m.apply(m.init(), Action::inject(get)), Action::deliver(get));
    auto p = m.project(s);
    ASSERT_EQ(p.events.size(), 1u);
    EXPECT_EQ(p.events[0].kind, kv::kValueResponse);
    EXPECT_TRUE(p.events[0].payload.at("value").is_nil());
}

TEST(KvModel, DisabledActionIsGuardViolation)
{
    kv::KvModel m;
    try {
        m.apply(m.init(), Action::deliver(kv::set_request(0, "k", "v1")));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::GuardViolation);
    }
}

// --- VR model -----------------------------------------------------------------

TEST(VrModel, InitState)
{
    vr::VrModel m;
    auto p = m.project(m.init());
    ASSERT_EQ(p.actors.size(), 3u);
    for (int r = 0; r < 3; ++r) EXPECT_EQ(replica(p, r), init_replica(r));
    EXPECT_TRUE(p.events.empty());
    EXPECT_EQ(p.globals.at("queriesCount"), Value(0));
    const Value& r0 = replica(p, 0);
    EXPECT_EQ(r0.at("status"), Value("Normal"));
    EXPECT_TRUE(r0.at("log").items().empty());
    EXPECT_EQ(r0.at("downloadReplica"), Value(0));
}

TEST(VrModel, InitEnabledActions)
{
    vr::VrModel m(vr::VrBounds::from(vr_bounds(3, 1, 1)));
    auto acts = m.enabled(m.init());
    int injects = 0, timeouts = 0;
    for (const auto& a : acts) {
        injects += a.kind == ActionKind::Inject;
        timeouts += a.kind == ActionKind::Timeout;
    }
    EXPECT_EQ(injects, 3);
    EXPECT_EQ(timeouts, 3);
    EXPECT_EQ(acts.size(), 6u);
}

TEST(VrModel, NoRequestsWhenQueryBoundIsZero)
{
    vr::VrModel m(vr::VrBounds::from(vr_bounds(3, 0, 1)));
    for (const auto& a : m.enabled(m.init())) EXPECT_NE(a.kind, ActionKind::Inject);
}

TEST(VrModel, NoTimeoutAtMaxView)
{
    vr::VrModel m(vr::VrBounds::from(vr_bounds(3, 0, 1)));
    auto s = m.apply(m.init(), Action::timeout(1));
    for (const auto& a : m.enabled(s)) EXPECT_FALSE(a.kind == ActionKind::Timeout && a.target == 1);
    EXPECT_THROW(m.apply(s, Action::timeout(1)), Error);
}

TEST(VrModel, TimeoutPostState)
{
    vr::VrModel m(vr::VrBounds::from(vr_bounds(3, 1, 1)));
    auto s = m.apply(m.init(), Action::timeout(1));
    auto p = m.project(s);
    EXPECT_EQ(replica(p, 1), vr::replica_image(true, {}, 1, 0, vr::kNone, 0, false));
    EXPECT_EQ(replica(p, 0), init_replica(0));
    EXPECT_EQ(replica(p, 2), init_replica(2));
    EXPECT_EQ(p.events, (std::vector<Event>{vr::start_view_change(1, 0, 1), vr::start_view_change(1, 2, 1)}));
    EXPECT_EQ(p.globals.at("queriesCount"), Value(0));
}

TEST(VrModel, OnlyRequestsChangeQueriesCount)
{
    auto x = models::explore("vr", vr_bounds(3, 1, 1));
    const auto& g = x.result.graph;
    for (const auto& e : g.edges) {
        auto before = g.states[e.from].globals.at("queriesCount").as_int();
        auto after = g.states[e.to].globals.at("queriesCount").as_int();
        ASSERT_EQ(after, before + (e.action.kind == ActionKind::Inject ? 1 : 0));
    }
}

TEST(VrModel, ApplyIsPure)
{
    vr::VrModel m;
    auto s = m.apply(m.init(), Action::inject(vr::request(1, 0)));
    auto a = Action::deliver(vr::request(1, 0));
    EXPECT_EQ(m.project(m.apply(s, a)), m.project(m.apply(s, a)));
}

TEST(VrModel, RequestAtFollowerIsNotDeliverable)
{
    vr::VrModel m;
    auto s = m.apply(m.init(), Action::inject(vr::request(1, 2)));
    EXPECT_THROW(m.apply(s, Action::deliver(vr::request(1, 2))), Error);
}

TEST(VrModel, PrefixLogConsistencyExamples)
{
    vr::VrModel m;
    auto s = m.init();
    s.replicas[0].log = {"a"};
    s.replicas[0].commit = 1;
    s.replicas[1].log = {"b"};
    s.replicas[1].commit = 1;
    auto v = m.invariants(s);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].invariant, "PrefixLogConsistency");

    s.replicas[1].log = {"a", "b"};
    s.replicas[1].commit = 2;
    EXPECT_TRUE(m.invariants(s).empty());
    EXPECT_TRUE(m.invariants(m.init()).empty());
}

TEST(VrModel, QuiescentProgressExamples)
{
    vr::VrModel m(vr::VrBounds::from(vr_bounds(3, 1, 1)));
    auto ok = m.init();
    for (auto& r : ok.replicas) {
        r.log = {"q1"};
        r.commit = 1;
        r.view = 1;
    }
    ok.queries = 1;
    auto stuck = ok;
    stuck.replicas[2].view_change = true;

    auto check = [&](const vr::VrState& s) {
        TransitionGraph g;
        g.states.push_back(m.project(s));
        return check_quiescent_progress(
            g, [&](const SystemState& x) { return m.exhausted(x); },
            [&](const SystemState& x) { return m.progress_complaint(x); });
    };
    auto good = check(ok);
    EXPECT_EQ(good.sinks_checked, 1u);
    EXPECT_TRUE(good.violations.empty());
    auto bad = check(stuck);
    ASSERT_EQ(bad.violations.size(), 1u);
    EXPECT_NE(bad.violations[0].detail.find("ViewChange"), std::string::npos);

    TransitionGraph loop;
    loop.states.push_back(m.project(ok));
    loop.edges.push_back({0, 0, Action::timeout(0)});
    auto vac = check_quiescent_progress(
        loop, [](const SystemState&) { return true; }, [](const SystemState&) { return std::optional<std::string>{}; });
    EXPECT_TRUE(vac.vacuous);
    EXPECT_EQ(vac.sinks_checked, 0u);
}

TEST(VrModel, NormalCaseOnlySinksAreFullyCommittedAndEqual)
{
    auto x = models::explore("vr", vr_bounds(3, 2, 0));
    ASSERT_TRUE(x.result.ok());
    EXPECT_GT(x.progress.sinks_checked, 0u);
    EXPECT_TRUE(x.progress.violations.empty());
    for (std::size_t v : sinks(x.result.graph)) {
        const auto& s = x.result.graph.states[v];
        for (int r = 1; r < 3; ++r) ASSERT_EQ(replica(s, r).at("log"), replica(s, 0).at("log"));
    }
}

TEST(VrModel, DeskScaleExploration)
{
    auto x = models::explore("vr", vr_bounds(3, 1, 1));
    ASSERT_TRUE(x.result.ok());
    auto st = graph_stats(x.result.graph);
    // Frozen after a naive BFS recount agreed.
    EXPECT_EQ(st.vertices, 15734u);
    EXPECT_EQ(st.edges, 37864u);
    EXPECT_EQ(st.diameter, 17u);
    EXPECT_TRUE(x.progress.violations.empty());
    EXPECT_EQ(x.progress.sinks_checked, 919u);
}

TEST(VrModel, CommittedPrefixNeverRewritten)
{
    auto x = models::explore("vr", vr_bounds(3, 1, 1));
    const auto& g = x.result.graph;
    for (const auto& e : g.edges) {
        for (int r = 0; r < 3; ++r) {
            const Value &a = replica(g.states[e.from], r), &b = replica(g.states[e.to], r);
            const auto c = static_cast<std::size_t>(a.at("commitNumber").as_int());
            const auto& la = a.at("log").items();
            const auto& lb = b.at("log").items();
            ASSERT_GE(lb.size(), c);
            for (std::size_t k = 0; k < c; ++k) ASSERT_EQ(la[k], lb[k]);
            ASSERT_GE(b.at("commitNumber").as_int(), a.at("commitNumber").as_int());
        }
    }
}

TEST(VrModel, CommitWithoutQuorumBugIsCaught)
{
    auto b = vr_bounds(3, 2, 1);
    b["bug_commit_without_quorum"] = 1;
    auto x = models::explore("vr", b);
    ASSERT_EQ(x.result.violations.size(), 1u);
    const auto& v = x.result.violations[0];
    EXPECT_EQ(v.invariant, "PrefixLogConsistency");
    // BFS discovery makes the counterexample a shortest path to the state.
    auto d = bfs_distances(x.result.graph.vertex_count(), x.result.graph.edges);
    EXPECT_EQ(v.counterexample.size(), *d[v.state_index - 1]);
    EXPECT_EQ(v.counterexample.size(), 8u);
    std::size_t at = 0;
    for (std::size_t id : v.counterexample) {
        ASSERT_EQ(x.result.graph.edges[id].from, at);
        at = x.result.graph.edges[id].to;
    }
    EXPECT_EQ(at + 1, v.state_index);
}

// --- VR replica ----------------------------------------------------------------

TEST(VrReplica, FreshReplicaIsInit)
{
    for (int r = 0; r < 3; ++r) EXPECT_EQ(vr::Replica(r, 3).to_model(), init_replica(r));
}

TEST(VrReplica, OnePrepareInViewZero)
{
    vr::Replica follower(1, 3);
    auto out = follower.on_event(vr::prepare(0, 1, 0, 0, {"q1"}));
    Value img = follower.to_model();
    EXPECT_EQ(img.at("log").items().size(), 1u);
    EXPECT_EQ(img.at("commitNumber"), Value(0));
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].event, vr::prepare_ok(1, 0, 0, 1));
}

TEST(VrReplica, MutationNames)
{
    EXPECT_EQ(vr::mutation_names().size(), 6u);
    for (const auto& [m, name] : vr::mutation_names()) EXPECT_EQ(vr::mutation_from_string(name), m);
    EXPECT_THROW(vr::mutation_from_string("nope"), Error);
}

TEST(Registry, UnknownModelIsUsageError)
{
    try {
        models::explore("paxos", {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Usage);
    }
    EXPECT_THROW(models::emulator_config("kv", {}, vr::Mutation::SkipCommitIncrement), Error);
}
