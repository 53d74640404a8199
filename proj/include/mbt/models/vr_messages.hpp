#pragma once

// Wire vocabulary of the Viewstamped Replication example. The model and the
// replica implementation both build their messages here, so a message means
// the same thing on both sides; everything else is written twice.

#include "mbt/event.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mbt::vr {

inline constexpr const char* kRequest = "Request";
inline constexpr const char* kPrepare = "Prepare";
inline constexpr const char* kPrepareOk = "PrepareOk";
inline constexpr const char* kCommit = "Commit";
inline constexpr const char* kStartViewChange = "StartViewChange";
inline constexpr const char* kDoViewChange = "DoViewChange";
inline constexpr const char* kStartView = "StartView";
inline constexpr const char* kCatchupQuery = "CatchupQuery";
inline constexpr const char* kCatchupReply = "CatchupReply";

inline constexpr int kNone = -1; // downloadReplica before one is chosen

inline int master_of(int view, int replicas) { return view % replicas; }
inline int faults_tolerated(int replicas) { return (replicas - 1) / 2; }
inline int quorum(int replicas) { return faults_tolerated(replicas) + 1; }

inline std::string entry_name(int query) { return "q" + std::to_string(query); }

inline Value log_value(const std::vector<std::string>& log)
{
    std::vector<Value> items;
    items.reserve(log.size());
    for (const auto& e : log) items.emplace_back(e);
    return Value::seq(std::move(items));
}

inline std::vector<std::string> log_from(const Value& v)
{
    std::vector<std::string> out;
    for (const auto& e : v.items()) out.push_back(e.as_string());
    return out;
}

/// Model image of one replica.
inline Value replica_image(bool view_change, const std::vector<std::string>& log, int view, int commit, int download,
                           int catchup, bool phase2)
{
    return Value::record({{"catchupPos", Value(catchup)},
                          {"commitNumber", Value(commit)},
                          {"downloadReplica", download == kNone ? Value::nil() : Value(download)},
                          {"log", log_value(log)},
                          {"phase2", Value(phase2)},
                          {"status", Value(view_change ? "ViewChange" : "Normal")},
                          {"viewNumber", Value(view)}});
}

inline Event request(int query, ActorId to)
{
    return {kRequest, Value::record({{"entry", Value(entry_name(query))}}), kExternal, to};
}

/// Entries base+1 .. pos of the master's log; base is the master's commit
/// number when sending, so a follower that missed earlier prepares of the
/// same view can still catch up.
inline Event prepare(ActorId from, ActorId to, int view, int base, std::vector<std::string> entries)
{
    int pos = base + static_cast<int>(entries.size());
    return {kPrepare,
            Value::record({{"base", Value(base)},
                           {"entries", log_value(entries)},
                           {"pos", Value(pos)},
                           {"viewNumber", Value(view)}}),
            from, to};
}

inline Event prepare_ok(ActorId from, ActorId to, int view, int pos)
{
    return {kPrepareOk, Value::record({{"pos", Value(pos)}, {"viewNumber", Value(view)}}), from, to};
}

inline Event commit(ActorId from, ActorId to, int view, int commit_number)
{
    return {kCommit, Value::record({{"commitNumber", Value(commit_number)}, {"viewNumber", Value(view)}}), from, to};
}

inline Event start_view_change(ActorId from, ActorId to, int view)
{
    return {kStartViewChange, Value::record({{"viewNumber", Value(view)}}), from, to};
}

inline Event do_view_change(ActorId from, ActorId to, int view, int last_normal, int length, int commit_number)
{
    return {kDoViewChange,
            Value::record({{"commitNumber", Value(commit_number)},
                           {"lastNormal", Value(last_normal)},
                           {"logLength", Value(length)},
                           {"viewNumber", Value(view)}}),
            from, to};
}

inline Event start_view(ActorId from, ActorId to, int view, const std::vector<std::string>& log, int commit_number)
{
    return {kStartView,
            Value::record({{"commitNumber", Value(commit_number)}, {"log", log_value(log)}, {"viewNumber", Value(view)}}),
            from, to};
}

inline Event catchup_query(ActorId from, ActorId to, int view, int pos)
{
    return {kCatchupQuery, Value::record({{"pos", Value(pos)}, {"viewNumber", Value(view)}}), from, to};
}

inline Event catchup_reply(ActorId from, ActorId to, int view, int pos, std::optional<std::string> entry, int length)
{
    return {kCatchupReply,
            Value::record({{"entry", entry ? Value(*entry) : Value::nil()},
                           {"length", Value(length)},
                           {"pos", Value(pos)},
                           {"viewNumber", Value(view)}}),
            from, to};
}

inline int field(const Event& e, const char* name) { return static_cast<int>(e.payload.at(name).as_int()); }

} // namespace mbt::vr
