#pragma once

// Reference model of Viewstamped Replication with incremental state
// download during view change.
//
// Actions: a client Request injected at any replica (bounded by max_queries),
// a view-change timeout at any replica (bounded by max_views), and delivery
// of a pending message the destination would act on. A message the replica
// would ignore stays pending forever; the one exception is a Prepare from an
// older view, which is deliverable and dropped on receipt. The network never
// loses messages here; a lost message is a message that is never delivered.
//
// Per replica the visible state is status, log, viewNumber, commitNumber,
// downloadReplica, catchupPos and phase2. Vote tallies, last normal view and
// commit hints are bookkeeping that only the model needs to compare states,
// so they travel in the globals.

#include "mbt/action.hpp"
#include "mbt/explorer.hpp"
#include "mbt/graph_io.hpp"
#include "mbt/models/vr_messages.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace mbt::vr {

struct VrBounds {
    int replicas = 3;
    int max_queries = 1;
    int max_views = 1;
    bool commit_without_quorum = false; // seeded model bug

    static VrBounds from(const Bounds& b)
    {
        VrBounds v;
        auto get = [&](const char* name) -> std::optional<std::int64_t> {
            if (auto it = b.find(name); it != b.end()) return it->second;
            return std::nullopt;
        };
        if (auto x = get("replicas")) v.replicas = static_cast<int>(*x);
        if (auto x = get("max_queries")) v.max_queries = static_cast<int>(*x);
        if (auto x = get("max_views")) v.max_views = static_cast<int>(*x);
        if (auto x = get("bug_commit_without_quorum")) v.commit_without_quorum = *x != 0;
        if (v.replicas < 1) fail(ErrorCode::Usage, "vr needs at least one replica");
        if (v.max_queries < 0 || v.max_views < 0) fail(ErrorCode::Usage, "vr bounds must be non-negative");
        return v;
    }

    Bounds to_bounds() const
    {
        Bounds b{{"replicas", replicas}, {"max_queries", max_queries}, {"max_views", max_views}};
        if (commit_without_quorum) b["bug_commit_without_quorum"] = 1;
        return b;
    }
};

struct Vote {
    int from = 0;
    int last_normal = 0;
    int length = 0;
    int commit = 0;

    friend auto operator<=>(const Vote&, const Vote&) = default;
};

struct ReplicaState {
    bool view_change = false;
    std::vector<std::string> log;
    int view = 0;
    int commit = 0;
    int download = 0;
    int catchup = 0;
    bool phase2 = false;

    int last_normal = 0;
    int hint_view = 0; // highest view a Commit was heard for
    int hint = 0;      // highest commit number heard for hint_view
    bool dvc_sent = false;
    std::set<int> svc;
    std::set<Vote> dvc;
    std::set<std::pair<int, int>> acks; // (pos, from)
};

struct VrState {
    std::vector<ReplicaState> replicas;
    int queries = 0;
    std::set<Event> events;
};

class VrModel {
public:
    using State = VrState;

    explicit VrModel(VrBounds bounds = {}) : b_(bounds) {}

    std::string name() const { return "vr"; }
    const VrBounds& bounds() const { return b_; }

    State init() const
    {
        State s;
        s.replicas.resize(static_cast<std::size_t>(b_.replicas));
        for (int r = 0; r < b_.replicas; ++r) s.replicas[static_cast<std::size_t>(r)].download = r;
        return s;
    }

    std::vector<Action> enabled(const State& s) const
    {
        std::vector<Action> out;
        if (s.queries < b_.max_queries)
            for (int r = 0; r < b_.replicas; ++r) out.push_back(Action::inject(request(s.queries + 1, r)));
        for (int r = 0; r < b_.replicas; ++r)
            if (s.replicas[static_cast<std::size_t>(r)].view < b_.max_views) out.push_back(Action::timeout(r));
        for (const auto& e : s.events)
            if (handles(s, e)) out.push_back(Action::deliver(e));
        return out;
    }

    State apply(const State& s, const Action& a) const
    {
        State t = s;
        switch (a.kind) {
        case ActionKind::Inject: {
            const Event& e = a.event.value();
            if (s.queries >= b_.max_queries || e != request(s.queries + 1, e.destination))
                fail(ErrorCode::GuardViolation, "vr: unexpected injection " + to_text(a));
            ++t.queries;
            t.events.insert(e);
            break;
        }
        case ActionKind::Timeout:
            if (a.target < 0 || a.target >= b_.replicas || s.replicas[static_cast<std::size_t>(a.target)].view >= b_.max_views)
                fail(ErrorCode::GuardViolation, "vr: timeout not enabled " + to_text(a));
            enter_view(t, a.target, rep(s, a.target).view + 1);
            break;
        case ActionKind::Deliver: {
            const Event& e = a.event.value();
            if (!s.events.count(e) || !handles(s, e))
                fail(ErrorCode::GuardViolation, "vr: cannot deliver " + to_text(e));
            t.events.erase(e);
            deliver(t, e);
            break;
        }
        default: fail(ErrorCode::GuardViolation, "vr: unsupported action " + to_text(a));
        }
        return t;
    }

    SystemState project(const State& s) const
    {
        SystemState out;
        std::vector<Value> hidden;
        for (const auto& r : s.replicas) {
            out.actors.push_back(replica_image(r.view_change, r.log, r.view, r.commit, r.download, r.catchup, r.phase2));
            std::vector<Value> svc, dvc, acks;
            for (int q : r.svc) svc.emplace_back(q);
            for (const auto& v : r.dvc)
                dvc.push_back(Value::seq({Value(v.from), Value(v.last_normal), Value(v.length), Value(v.commit)}));
            for (const auto& [pos, q] : r.acks) acks.push_back(Value::seq({Value(pos), Value(q)}));
            hidden.push_back(Value::record({{"acks", Value::set(std::move(acks))},
                                            {"dvc", Value::set(std::move(dvc))},
                                            {"dvcSent", Value(r.dvc_sent)},
                                            {"hint", Value(r.hint)},
                                            {"hintView", Value(r.hint_view)},
                                            {"lastNormal", Value(r.last_normal)},
                                            {"svc", Value::set(std::move(svc))}}));
        }
        out.events.assign(s.events.begin(), s.events.end());
        out.globals = Value::record({{"queriesCount", Value(s.queries)}, {"replicas", Value::seq(std::move(hidden))}});
        return out;
    }

    std::vector<NamedViolation> invariants(const State& s) const
    {
        std::vector<NamedViolation> out;
        for (std::size_t i = 0; i < s.replicas.size(); ++i) {
            const auto& a = s.replicas[i];
            if (a.commit < 0 || a.commit > static_cast<int>(a.log.size()))
                out.push_back({"CommitWithinLog", "replica " + std::to_string(i) + " commitNumber "
                                                      + std::to_string(a.commit) + " exceeds log length "
                                                      + std::to_string(a.log.size())});
            if (a.phase2 && !a.view_change)
                out.push_back({"Phase2OnlyInViewChange", "replica " + std::to_string(i) + " is Normal with phase2 set"});
            for (std::size_t j = i + 1; j < s.replicas.size(); ++j) {
                const auto& b = s.replicas[j];
                auto n = static_cast<std::size_t>(std::min({a.commit, b.commit, static_cast<int>(a.log.size()),
                                                            static_cast<int>(b.log.size())}));
                for (std::size_t k = 0; k < n; ++k) {
                    if (a.log[k] != b.log[k]) {
                        out.push_back({"PrefixLogConsistency",
                                       "replicas " + std::to_string(i) + " and " + std::to_string(j)
                                           + " committed different entries at position " + std::to_string(k + 1)
                                           + ": " + a.log[k] + " vs " + b.log[k]});
                        break;
                    }
                }
            }
        }
        return out;
    }

    /// Bounds exhausted: every query injected and every replica in the last view.
    bool exhausted(const SystemState& s) const
    {
        if (s.globals.at("queriesCount").as_int() != b_.max_queries) return false;
        return std::all_of(s.actors.begin(), s.actors.end(),
                           [&](const Value& r) { return r.at("viewNumber").as_int() == b_.max_views; });
    }

    /// Progress at an exhausted sink: everyone Normal with the whole log committed.
    std::optional<std::string> progress_complaint(const SystemState& s) const
    {
        for (std::size_t i = 0; i < s.actors.size(); ++i) {
            const auto& r = s.actors[i];
            if (r.at("status").as_string() != "Normal")
                return "replica " + std::to_string(i) + " is stuck in " + r.at("status").as_string();
            if (r.at("commitNumber").as_int() != static_cast<std::int64_t>(r.at("log").items().size()))
                return "replica " + std::to_string(i) + " has uncommitted entries";
        }
        return std::nullopt;
    }

private:
    static ReplicaState& rep(State& s, int r) { return s.replicas[static_cast<std::size_t>(r)]; }
    static const ReplicaState& rep(const State& s, int r) { return s.replicas[static_cast<std::size_t>(r)]; }
    int master(int view) const { return master_of(view, b_.replicas); }

    void send_others(State& s, int from, const std::function<Event(int)>& make) const
    {
        for (int q = 0; q < b_.replicas; ++q)
            if (q != from) s.events.insert(make(q));
    }

    static void apply_hint(ReplicaState& r)
    {
        if (!r.view_change && r.hint_view == r.view)
            r.commit = std::max(r.commit, std::min(r.hint, static_cast<int>(r.log.size())));
    }

    static void learn_commit(ReplicaState& r, int view, int c)
    {
        if (view > r.hint_view) {
            r.hint_view = view;
            r.hint = c;
        } else if (view == r.hint_view) {
            r.hint = std::max(r.hint, c);
        }
    }

    void enter_view(State& s, int r, int view) const
    {
        auto& x = rep(s, r);
        x.view_change = true;
        x.view = view;
        x.download = kNone;
        x.catchup = 0;
        x.phase2 = false;
        x.dvc_sent = false;
        x.svc.clear();
        x.dvc.clear();
        x.acks.clear();
        send_others(s, r, [&](int q) { return start_view_change(r, q, view); });
        check_svc(s, r);
    }

    void check_svc(State& s, int r) const
    {
        auto& x = rep(s, r);
        if (!x.view_change || x.dvc_sent || static_cast<int>(x.svc.size()) < faults_tolerated(b_.replicas)) return;
        x.dvc_sent = true;
        Vote own{r, x.last_normal, static_cast<int>(x.log.size()), x.commit};
        if (master(x.view) == r)
            add_dvc(s, r, own);
        else
            s.events.insert(do_view_change(r, master(x.view), x.view, own.last_normal, own.length, own.commit));
    }

    void add_dvc(State& s, int m, const Vote& v) const
    {
        auto& x = rep(s, m);
        if (!x.view_change || x.phase2) return;
        x.dvc.insert(v);
        if (static_cast<int>(x.dvc.size()) < quorum(b_.replicas)) return;

        x.phase2 = true;
        const Vote* best = nullptr;
        for (const auto& c : x.dvc)
            if (!best || std::tie(c.last_normal, c.length) > std::tie(best->last_normal, best->length)) best = &c;
        const Vote chosen = *best;
        x.download = chosen.from;
        if (chosen.from == m) return finish(s, m);
        x.log.resize(static_cast<std::size_t>(x.commit));
        x.catchup = x.commit;
        if (x.catchup >= chosen.length) return finish(s, m);
        s.events.insert(catchup_query(m, chosen.from, x.view, x.catchup + 1));
    }

    void finish(State& s, int m) const
    {
        auto& x = rep(s, m);
        int best_commit = x.commit;
        for (const auto& v : x.dvc) best_commit = std::max(best_commit, v.commit);
        x.view_change = false;
        x.last_normal = x.view;
        x.download = m;
        x.catchup = 0;
        x.phase2 = false;
        x.dvc_sent = false;
        x.svc.clear();
        x.dvc.clear();
        x.acks.clear();
        learn_commit(x, x.view, best_commit);
        apply_hint(x);
        const auto log = x.log;
        const int view = x.view, c = x.commit;
        send_others(s, m, [&](int q) { return start_view(m, q, view, log, c); });
        try_commit(s, m);
    }

    void try_commit(State& s, int m) const
    {
        auto& x = rep(s, m);
        int best = x.commit;
        for (int p = x.commit + 1; p <= static_cast<int>(x.log.size()); ++p) {
            std::set<int> voters;
            for (const auto& [pos, q] : x.acks)
                if (pos >= p) voters.insert(q);
            if (static_cast<int>(voters.size()) + 1 >= quorum(b_.replicas)) best = p;
        }
        if (best == x.commit) return;
        commit_to(s, m, best);
    }

    void commit_to(State& s, int m, int c) const
    {
        auto& x = rep(s, m);
        x.commit = c;
        learn_commit(x, x.view, c);
        std::erase_if(x.acks, [&](const auto& a) { return a.first <= c; });
        const int view = x.view;
        send_others(s, m, [&](int q) { return commit(m, q, view, c); });
    }

    /// Delivery guard. Messages a replica would ignore stay pending instead of
    /// being consumed, except Prepare from an older view: receiving and
    /// dropping those is behaviour worth testing.
    bool handles(const State& s, const Event& e) const
    {
        const auto& x = rep(s, e.destination);
        const int n = static_cast<int>(x.log.size());
        if (e.kind == kRequest) return !x.view_change && master(x.view) == e.destination;
        const int v = field(e, "viewNumber");
        if (e.kind == kPrepare) {
            if (v < x.view) return true;
            return !x.view_change && v == x.view && field(e, "base") <= n && n < field(e, "pos");
        }
        if (e.kind == kPrepareOk) {
            const int pos = field(e, "pos");
            return !x.view_change && v == x.view && master(v) == e.destination && pos > x.commit && pos <= n;
        }
        if (e.kind == kCommit)
            return v >= x.view && (v > x.hint_view || (v == x.hint_view && field(e, "commitNumber") > x.hint));
        if (e.kind == kStartViewChange) return v > x.view || (v == x.view && x.view_change && !x.dvc_sent);
        if (e.kind == kDoViewChange)
            return master(v) == e.destination && (v > x.view || (v == x.view && x.view_change && !x.phase2));
        if (e.kind == kStartView) return v > x.view || (v == x.view && x.view_change);
        if (e.kind == kCatchupQuery) return v == x.view && field(e, "pos") >= 1;
        if (e.kind == kCatchupReply)
            return v == x.view && x.view_change && x.phase2 && x.download == e.source && field(e, "pos") == x.catchup + 1;
        return false;
    }

    void deliver(State& s, const Event& e) const
    {
        const int r = e.destination;
        auto& x = rep(s, r);
        const int n = static_cast<int>(x.log.size());

        if (e.kind == kRequest) {
            if (x.view_change || master(x.view) != r) return;
            x.log.push_back(e.payload.at("entry").as_string());
            const int base = x.commit, view = x.view;
            std::vector<std::string> suffix(x.log.begin() + base, x.log.end());
            send_others(s, r, [&](int q) { return prepare(r, q, view, base, suffix); });
            if (b_.commit_without_quorum)
                commit_to(s, r, static_cast<int>(x.log.size()));
            else
                try_commit(s, r);
        } else if (e.kind == kPrepare) {
            const int v = field(e, "viewNumber"), base = field(e, "base"), pos = field(e, "pos");
            if (x.view_change || v != x.view || base > n || n >= pos) return;
            auto entries = log_from(e.payload.at("entries"));
            for (int k = n + 1; k <= pos; ++k) x.log.push_back(entries[static_cast<std::size_t>(k - base - 1)]);
            apply_hint(x);
            s.events.insert(prepare_ok(r, e.source, v, pos));
        } else if (e.kind == kPrepareOk) {
            const int v = field(e, "viewNumber"), pos = field(e, "pos");
            if (x.view_change || v != x.view || master(v) != r || pos <= x.commit || pos > n) return;
            x.acks.emplace(pos, e.source);
            try_commit(s, r);
        } else if (e.kind == kCommit) {
            const int v = field(e, "viewNumber");
            if (v < x.view) return;
            learn_commit(x, v, field(e, "commitNumber"));
            apply_hint(x);
        } else if (e.kind == kStartViewChange) {
            const int v = field(e, "viewNumber");
            if (v > x.view) {
                enter_view(s, r, v);
            } else if (v < x.view || !x.view_change || x.dvc_sent) {
                return;
            }
            if (rep(s, r).dvc_sent) return;
            rep(s, r).svc.insert(e.source);
            check_svc(s, r);
        } else if (e.kind == kDoViewChange) {
            const int v = field(e, "viewNumber");
            if (master(v) != r || v < x.view || (v == x.view && !x.view_change)) return;
            if (v > x.view) enter_view(s, r, v);
            add_dvc(s, r, {e.source, field(e, "lastNormal"), field(e, "logLength"), field(e, "commitNumber")});
        } else if (e.kind == kStartView) {
            const int v = field(e, "viewNumber");
            if (v < x.view || (v == x.view && !x.view_change)) return;
            x.view_change = false;
            x.view = v;
            x.log = log_from(e.payload.at("log"));
            x.last_normal = v;
            x.download = r;
            x.catchup = 0;
            x.phase2 = false;
            x.dvc_sent = false;
            x.svc.clear();
            x.dvc.clear();
            x.acks.clear();
            learn_commit(x, v, field(e, "commitNumber"));
            const int known = std::max(x.commit, x.hint_view == v ? x.hint : field(e, "commitNumber"));
            x.commit = std::min(known, static_cast<int>(x.log.size()));
            if (static_cast<int>(x.log.size()) > x.commit)
                s.events.insert(prepare_ok(r, e.source, v, static_cast<int>(x.log.size())));
        } else if (e.kind == kCatchupQuery) {
            const int v = field(e, "viewNumber"), pos = field(e, "pos");
            if (v != x.view || pos < 1) return;
            std::optional<std::string> entry;
            if (pos <= n) entry = x.log[static_cast<std::size_t>(pos - 1)];
            s.events.insert(catchup_reply(r, e.source, v, pos, entry, n));
        } else if (e.kind == kCatchupReply) {
            const int v = field(e, "viewNumber"), pos = field(e, "pos");
            if (v != x.view || !x.view_change || !x.phase2 || x.download != e.source || pos != x.catchup + 1) return;
            const Value& entry = e.payload.at("entry");
            if (entry.is_nil()) return finish(s, r);
            x.log.push_back(entry.as_string());
            x.catchup = pos;
            if (pos < field(e, "length"))
                s.events.insert(catchup_query(r, e.source, v, pos + 1));
            else
                finish(s, r);
        }
    }

    VrBounds b_;
};

} // namespace mbt::vr
