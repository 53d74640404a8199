#pragma once

// Replica implementation of Viewstamped Replication for the emulator. It is
// written against the message vocabulary only; the reference model lives in
// vr_model.hpp. A Mutation seeds one known bug for mutation testing.

#include "mbt/actor.hpp"
#include "mbt/emulator.hpp"
#include "mbt/error.hpp"
#include "mbt/models/vr_messages.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace mbt::vr {

enum class Mutation {
    None,
    SkipCommitIncrement, // master announces a commit but keeps its old commitNumber
    OutOfOrderAppend,    // follower appends only the newest entry when it has a gap
    AcceptStalePrepare,  // follower takes Prepare from an older view
    NoPhase2Reset,       // phase2 stays set after the view change completes
    DropCommitBroadcast, // Commit never reaches the highest-numbered replica
};

inline const std::vector<std::pair<Mutation, const char*>>& mutation_names()
{
    static const std::vector<std::pair<Mutation, const char*>> names{
        {Mutation::None, "none"},
        {Mutation::SkipCommitIncrement, "skip-commit-increment"},
        {Mutation::OutOfOrderAppend, "out-of-order-append"},
        {Mutation::AcceptStalePrepare, "accept-stale-prepare"},
        {Mutation::NoPhase2Reset, "no-phase2-reset"},
        {Mutation::DropCommitBroadcast, "drop-commit-broadcast"},
    };
    return names;
}

inline const char* to_string(Mutation m)
{
    for (const auto& [k, name] : mutation_names())
        if (k == m) return name;
    return "?";
}

inline Mutation mutation_from_string(const std::string& s)
{
    for (const auto& [k, name] : mutation_names())
        if (s == name) return k;
    fail(ErrorCode::Usage, "unknown mutation '" + s + "'");
}

class Replica final : public Actor {
public:
    Replica(ActorId self, int replicas, Mutation mutation = Mutation::None)
        : self_(self), n_(replicas), mutation_(mutation), download_replica_(self)
    {
    }

    std::vector<OperationRequest> on_event(const Event& e) override
    {
        out_.clear();
        if (e.kind == kTimeoutKind)
            start_view_change_to(view_number_ + 1);
        else if (e.kind == kRequest)
            on_request(e);
        else if (e.kind == kPrepare)
            on_prepare(e);
        else if (e.kind == kPrepareOk)
            on_prepare_ok(e);
        else if (e.kind == kCommit)
            on_commit(e);
        else if (e.kind == kStartViewChange)
            on_start_view_change(e);
        else if (e.kind == kDoViewChange)
            on_do_view_change(e);
        else if (e.kind == kStartView)
            on_start_view(e);
        else if (e.kind == kCatchupQuery)
            on_catchup_query(e);
        else if (e.kind == kCatchupReply)
            on_catchup_reply(e);
        else
            throw std::invalid_argument("unexpected message " + e.kind);
        return std::move(out_);
    }

    Value to_model() const override
    {
        return replica_image(!normal_, log_, view_number_, commit_number_, download_replica_, catchup_pos_, phase2_);
    }

    /// log, viewNumber and commitNumber survive a crash; everything else
    /// restarts from its initial value. The VR model never crashes replicas.
    void reset_volatile() override
    {
        Replica fresh(self_, n_, mutation_);
        fresh.log_ = std::move(log_);
        fresh.view_number_ = view_number_;
        fresh.commit_number_ = commit_number_;
        fresh.last_normal_view_ = view_number_;
        *this = std::move(fresh);
    }

    Value persistent_image() const override
    {
        return Value::record({{"commitNumber", Value(commit_number_)},
                              {"log", log_value(log_)},
                              {"viewNumber", Value(view_number_)}});
    }

private:
    struct DvcInfo {
        int last_normal;
        int length;
        int commit;
    };

    int master() const { return master_of(view_number_, n_); }
    int length() const { return static_cast<int>(log_.size()); }

    void send(Event e) { out_.push_back(OperationRequest::send(std::move(e))); }

    template <class Make>
    void broadcast(Make&& make)
    {
        for (int q = 0; q < n_; ++q)
            if (q != self_) send(make(q));
    }

    void note_commit(int view, int c)
    {
        if (view > known_commit_view_) {
            known_commit_view_ = view;
            known_commit_ = c;
        } else if (view == known_commit_view_ && c > known_commit_) {
            known_commit_ = c;
        }
        if (normal_ && known_commit_view_ == view_number_)
            commit_number_ = std::max(commit_number_, std::min(known_commit_, length()));
    }

    // --- normal operation ------------------------------------------------

    void on_request(const Event& e)
    {
        if (!normal_ || master() != self_) return;
        log_.push_back(e.payload.at("entry").as_string());
        std::vector<std::string> unsettled(log_.begin() + commit_number_, log_.end());
        const int base = commit_number_;
        broadcast([&](int q) { return prepare(self_, q, view_number_, base, unsettled); });
        maybe_commit();
    }

    void on_prepare(const Event& e)
    {
        const int v = field(e, "viewNumber"), base = field(e, "base"), pos = field(e, "pos");
        bool view_ok = v == view_number_ || (mutation_ == Mutation::AcceptStalePrepare && v < view_number_);
        if (!normal_ || !view_ok || base > length() || pos <= length()) return;
        auto entries = log_from(e.payload.at("entries"));
        if (mutation_ == Mutation::OutOfOrderAppend && pos > length() + 1) {
            log_.push_back(entries.back());
        } else {
            while (length() < pos) log_.push_back(entries[static_cast<std::size_t>(length() - base)]);
        }
        note_commit(known_commit_view_, known_commit_);
        send(prepare_ok(self_, e.source, v, pos));
    }

    void on_prepare_ok(const Event& e)
    {
        const int v = field(e, "viewNumber"), pos = field(e, "pos");
        if (!normal_ || v != view_number_ || master() != self_) return;
        if (pos <= commit_number_ || pos > length()) return;
        auto& best = acked_[e.source];
        best = std::max(best, pos);
        maybe_commit();
    }

    void maybe_commit()
    {
        // Highest position acknowledged by a quorum counting the master itself.
        std::vector<int> acked{length()};
        for (const auto& [q, pos] : acked_) acked.push_back(pos);
        std::sort(acked.rbegin(), acked.rend());
        const int k = quorum(n_);
        if (static_cast<int>(acked.size()) < k) return;
        const int reachable = acked[static_cast<std::size_t>(k - 1)];
        if (reachable <= commit_number_) return;
        if (mutation_ != Mutation::SkipCommitIncrement) {
            commit_number_ = reachable;
            note_commit(view_number_, reachable);
        }
        for (auto it = acked_.begin(); it != acked_.end();) it = it->second <= reachable ? acked_.erase(it) : std::next(it);
        for (int q = 0; q < n_; ++q) {
            if (q == self_) continue;
            if (mutation_ == Mutation::DropCommitBroadcast && q == n_ - 1) continue;
            send(commit(self_, q, view_number_, reachable));
        }
    }

    void on_commit(const Event& e)
    {
        const int v = field(e, "viewNumber");
        if (v >= view_number_) note_commit(v, field(e, "commitNumber"));
    }

    // --- view change -------------------------------------------------------

    void start_view_change_to(int view)
    {
        normal_ = false;
        view_number_ = view;
        download_replica_ = kNone;
        catchup_pos_ = 0;
        phase2_ = false;
        sent_do_view_change_ = false;
        svc_from_.clear();
        dvc_.clear();
        acked_.clear();
        broadcast([&](int q) { return start_view_change(self_, q, view); });
        maybe_do_view_change();
    }

    void on_start_view_change(const Event& e)
    {
        const int v = field(e, "viewNumber");
        if (v > view_number_)
            start_view_change_to(v);
        else if (v < view_number_ || normal_ || sent_do_view_change_)
            return;
        if (sent_do_view_change_) return;
        svc_from_.insert(e.source);
        maybe_do_view_change();
    }

    void maybe_do_view_change()
    {
        if (normal_ || sent_do_view_change_) return;
        if (static_cast<int>(svc_from_.size()) < faults_tolerated(n_)) return;
        sent_do_view_change_ = true;
        if (master() == self_)
            record_dvc(self_, {last_normal_view_, length(), commit_number_});
        else
            send(do_view_change(self_, master(), view_number_, last_normal_view_, length(), commit_number_));
    }

    void on_do_view_change(const Event& e)
    {
        const int v = field(e, "viewNumber");
        if (master_of(v, n_) != self_ || v < view_number_) return;
        if (v == view_number_ && normal_) return;
        if (v > view_number_) start_view_change_to(v);
        record_dvc(e.source, {field(e, "lastNormal"), field(e, "logLength"), field(e, "commitNumber")});
    }

    void record_dvc(int from, DvcInfo info)
    {
        if (normal_ || phase2_) return;
        dvc_.emplace(from, info);
        if (static_cast<int>(dvc_.size()) < quorum(n_)) return;

        phase2_ = true;
        int chosen = -1;
        for (const auto& [q, d] : dvc_) {
            if (chosen < 0) {
                chosen = q;
                continue;
            }
            const auto& c = dvc_.at(chosen);
            if (d.last_normal > c.last_normal || (d.last_normal == c.last_normal && d.length > c.length)) chosen = q;
        }
        download_replica_ = chosen;
        if (chosen == self_) return complete_view_change();
        log_.resize(static_cast<std::size_t>(commit_number_));
        catchup_pos_ = commit_number_;
        if (catchup_pos_ >= dvc_.at(chosen).length) return complete_view_change();
        send(catchup_query(self_, chosen, view_number_, catchup_pos_ + 1));
    }

    void on_catchup_query(const Event& e)
    {
        const int v = field(e, "viewNumber"), pos = field(e, "pos");
        if (v != view_number_ || pos < 1) return;
        std::optional<std::string> entry;
        if (pos <= length()) entry = log_[static_cast<std::size_t>(pos - 1)];
        send(catchup_reply(self_, e.source, v, pos, entry, length()));
    }

    void on_catchup_reply(const Event& e)
    {
        const int v = field(e, "viewNumber"), pos = field(e, "pos");
        if (normal_ || !phase2_ || v != view_number_ || e.source != download_replica_ || pos != catchup_pos_ + 1) return;
        const Value& entry = e.payload.at("entry");
        if (entry.is_nil()) return complete_view_change();
        log_.push_back(entry.as_string());
        catchup_pos_ = pos;
        if (pos < field(e, "length"))
            send(catchup_query(self_, download_replica_, v, pos + 1));
        else
            complete_view_change();
    }

    void complete_view_change()
    {
        int agreed = commit_number_;
        for (const auto& [q, d] : dvc_) agreed = std::max(agreed, d.commit);
        normal_ = true;
        last_normal_view_ = view_number_;
        download_replica_ = self_;
        catchup_pos_ = 0;
        if (mutation_ != Mutation::NoPhase2Reset) phase2_ = false;
        sent_do_view_change_ = false;
        svc_from_.clear();
        dvc_.clear();
        acked_.clear();
        note_commit(view_number_, agreed);
        broadcast([&](int q) { return start_view(self_, q, view_number_, log_, commit_number_); });
        maybe_commit();
    }

    void on_start_view(const Event& e)
    {
        const int v = field(e, "viewNumber");
        if (v < view_number_ || (v == view_number_ && normal_)) return;
        normal_ = true;
        view_number_ = v;
        last_normal_view_ = v;
        log_ = log_from(e.payload.at("log"));
        download_replica_ = self_;
        catchup_pos_ = 0;
        phase2_ = false;
        sent_do_view_change_ = false;
        svc_from_.clear();
        dvc_.clear();
        acked_.clear();
        const int announced = field(e, "commitNumber");
        if (known_commit_view_ < v || (known_commit_view_ == v && known_commit_ < announced)) {
            known_commit_view_ = v;
            known_commit_ = announced;
        }
        commit_number_ = std::min(std::max(commit_number_, known_commit_view_ == v ? known_commit_ : announced), length());
        if (length() > commit_number_) send(prepare_ok(self_, e.source, v, length()));
    }

    ActorId self_;
    int n_;
    Mutation mutation_;

    bool normal_ = true;
    std::vector<std::string> log_;
    int view_number_ = 0;
    int commit_number_ = 0;
    int download_replica_;
    int catchup_pos_ = 0;
    bool phase2_ = false;

    int last_normal_view_ = 0;
    int known_commit_view_ = 0;
    int known_commit_ = 0;
    bool sent_do_view_change_ = false;
    std::set<int> svc_from_;
    std::map<int, DvcInfo> dvc_;
    std::map<int, int> acked_; // replica -> highest acknowledged position

    std::vector<OperationRequest> out_;
};

inline EmulatorConfig emulator_config(int replicas, Mutation mutation = Mutation::None)
{
    EmulatorConfig c;
    c.actor_count = replicas;
    c.factory = [mutation](ActorId id, int n) { return std::make_unique<Replica>(id, n, mutation); };
    c.enabled_kinds = {ActionKind::Inject, ActionKind::Deliver, ActionKind::Timeout};
    return c;
}

} // namespace mbt::vr
