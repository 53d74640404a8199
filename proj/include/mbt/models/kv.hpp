#pragma once

// Broadcast key-value store: a GET answers the requester with the stored
// value (or nil); a SET stores the pair and sends KeyUpdated(key) to every
// participant. KeyUpdated and ValueResponse are outputs with no handler, so
// the model never delivers them.
//
// Faults are bounded per run: crashes (optionally losing the crashed actor's
// pending requests), restarts, drops and corruptions of client requests.
// Storage lives in memory, so a crash wipes it.

#include "mbt/action.hpp"
#include "mbt/actor.hpp"
#include "mbt/emulator.hpp"
#include "mbt/explorer.hpp"
#include "mbt/graph_io.hpp"

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace mbt::kv {

inline constexpr const char* kGet = "GET_REQUEST";
inline constexpr const char* kSet = "SET_REQUEST";
inline constexpr const char* kKeyUpdated = "KeyUpdated";
inline constexpr const char* kValueResponse = "ValueResponse";
inline constexpr const char* kKey = "k";
inline constexpr const char* kCorruptValue = "corrupt";

inline Event set_request(ActorId to, const std::string& key, const std::string& value)
{
    return {kSet, Value::record({{"key", Value(key)}, {"value", Value(value)}}), kExternal, to};
}

inline Event get_request(ActorId to, const std::string& key, std::int64_t id)
{
    return {kGet, Value::record({{"id", Value(id)}, {"key", Value(key)}}), kExternal, to};
}

inline Value storage_image(const std::map<std::string, std::string>& storage)
{
    std::vector<std::pair<std::string, Value>> fields;
    for (const auto& [k, v] : storage) fields.emplace_back(k, Value(v));
    return Value::record({{"storage", Value::record(std::move(fields))}});
}

// ---------------------------------------------------------------------------
// Implementation

class KvActor final : public Actor {
public:
    KvActor(ActorId self, int participants) : self_(self), participants_(participants) {}

    std::vector<OperationRequest> on_event(const Event& event) override
    {
        if (event.kind == kGet) {
            const auto& key = event.payload.at("key").as_string();
            auto it = storage_.find(key);
            Value value = it == storage_.end() ? Value::nil() : Value(it->second);
            Value response = Value::record({{"id", event.payload.at("id")}, {"value", value}});
            return {OperationRequest::send({kValueResponse, response, self_, event.source})};
        }
        if (event.kind == kSet) {
            const auto& key = event.payload.at("key").as_string();
            storage_[key] = event.payload.at("value").as_string();
            std::vector<OperationRequest> out;
            for (ActorId a = 0; a < participants_; ++a)
                out.push_back(OperationRequest::send({kKeyUpdated, Value::record({{"key", Value(key)}}), self_, a}));
            return out;
        }
        return {};
    }

    Value to_model() const override { return storage_image(storage_); }
    void reset_volatile() override { storage_.clear(); }

private:
    ActorId self_;
    int participants_;
    std::map<std::string, std::string> storage_;
};

inline EmulatorConfig emulator_config(int actors)
{
    EmulatorConfig c;
    c.actor_count = actors;
    c.factory = [](ActorId id, int n) { return std::make_unique<KvActor>(id, n); };
    return c;
}

// ---------------------------------------------------------------------------
// Reference model

struct KvBounds {
    int actors = 1;
    int max_sets = 1;
    int max_gets = 0;
    int max_crashes = 0;
    int max_drops = 0;
    int max_corrupts = 0;

    static KvBounds from(const Bounds& b)
    {
        KvBounds k;
        auto get = [&](const char* name, int& out) {
            if (auto it = b.find(name); it != b.end()) out = static_cast<int>(it->second);
        };
        get("replicas", k.actors);
        get("max_queries", k.max_sets);
        get("max_gets", k.max_gets);
        get("max_crashes", k.max_crashes);
        get("max_drops", k.max_drops);
        get("max_corrupts", k.max_corrupts);
        if (k.actors < 1) fail(ErrorCode::Usage, "kv needs at least one actor");
        if (k.max_sets < 0 || k.max_gets < 0 || k.max_crashes < 0 || k.max_drops < 0 || k.max_corrupts < 0)
            fail(ErrorCode::Usage, "kv bounds must be non-negative");
        return k;
    }

    Bounds to_bounds() const
    {
        return {{"replicas", actors},        {"max_queries", max_sets}, {"max_gets", max_gets},
                {"max_crashes", max_crashes}, {"max_drops", max_drops},  {"max_corrupts", max_corrupts}};
    }
};

struct KvState {
    std::vector<std::map<std::string, std::string>> storage;
    std::set<ActorId> down;
    std::set<Event> events;
    int sets = 0, gets = 0, crashes = 0, drops = 0, corrupts = 0;
};

class KvModel {
public:
    using State = KvState;

    explicit KvModel(KvBounds bounds = {}) : bounds_(bounds) {}

    std::string name() const { return "kv"; }
    const KvBounds& bounds() const { return bounds_; }

    State init() const
    {
        State s;
        s.storage.resize(static_cast<std::size_t>(bounds_.actors));
        return s;
    }

    std::vector<Action> enabled(const State& s) const
    {
        std::vector<Action> out;
        const int n = bounds_.actors;
        if (s.sets < bounds_.max_sets)
            for (ActorId a = 0; a < n; ++a) out.push_back(Action::inject(set_request(a, kKey, "v" + std::to_string(s.sets + 1))));
        if (s.gets < bounds_.max_gets)
            for (ActorId a = 0; a < n; ++a) out.push_back(Action::inject(get_request(a, kKey, s.gets + 1)));
        for (const auto& e : s.events)
            if (is_request(e) && !s.down.count(e.destination)) out.push_back(Action::deliver(e));
        if (s.drops < bounds_.max_drops)
            for (const auto& e : s.events)
                if (is_request(e)) out.push_back(Action::drop(e));
        if (s.corrupts < bounds_.max_corrupts)
            for (const auto& e : s.events)
                if (e.kind == kSet && e.payload.at("value").as_string() != kCorruptValue)
                    out.push_back(Action::corrupt(e, corrupted(e)));
        if (s.crashes < bounds_.max_crashes) {
            for (ActorId a = 0; a < n; ++a) {
                if (s.down.count(a)) continue;
                out.push_back(Action::crash(a));
                auto lost = pending_requests(s, a);
                if (!lost.empty()) out.push_back(Action::crash(a, std::move(lost)));
            }
        }
        for (ActorId a : s.down) out.push_back(Action::restart(a));
        return out;
    }

    State apply(const State& s, const Action& a) const
    {
        State t = s;
        auto need = [&](bool ok) {
            if (!ok) fail(ErrorCode::GuardViolation, "kv: " + to_text(a) + " is not enabled");
        };
        switch (a.kind) {
        case ActionKind::Inject: {
            const Event& e = a.event.value();
            if (e.kind == kSet) {
                need(s.sets < bounds_.max_sets);
                ++t.sets;
            } else {
                need(e.kind == kGet && s.gets < bounds_.max_gets);
                ++t.gets;
            }
            t.events.insert(e);
            break;
        }
        case ActionKind::Deliver: {
            const Event& e = a.event.value();
            need(s.events.count(e) && is_request(e) && !s.down.count(e.destination));
            t.events.erase(e);
            auto& store = t.storage[static_cast<std::size_t>(e.destination)];
            const auto& key = e.payload.at("key").as_string();
            if (e.kind == kGet) {
                auto it = store.find(key);
                Value value = it == store.end() ? Value::nil() : Value(it->second);
                t.events.insert({kValueResponse, Value::record({{"id", e.payload.at("id")}, {"value", value}}),
                                 e.destination, e.source});
            } else {
                store[key] = e.payload.at("value").as_string();
                for (ActorId b = 0; b < bounds_.actors; ++b)
                    t.events.insert({kKeyUpdated, Value::record({{"key", Value(key)}}), e.destination, b});
            }
            break;
        }
        case ActionKind::Drop:
            need(s.drops < bounds_.max_drops && s.events.count(a.event.value()) && is_request(*a.event));
            t.events.erase(*a.event);
            ++t.drops;
            break;
        case ActionKind::Corrupt: {
            need(s.corrupts < bounds_.max_corrupts && s.events.count(a.event.value()) && a.event->kind == kSet);
            t.events.erase(*a.event);
            Event changed = *a.event;
            changed.payload = a.replacement.value();
            t.events.insert(changed);
            ++t.corrupts;
            break;
        }
        case ActionKind::Crash:
            need(s.crashes < bounds_.max_crashes && a.target >= 0 && a.target < bounds_.actors && !s.down.count(a.target));
            for (const auto& e : a.dropped) {
                need(s.events.count(e) && e.destination == a.target && is_request(e));
                t.events.erase(e);
            }
            t.storage[static_cast<std::size_t>(a.target)].clear();
            t.down.insert(a.target);
            ++t.crashes;
            break;
        case ActionKind::Restart:
            need(s.down.count(a.target) > 0);
            t.down.erase(a.target);
            break;
        case ActionKind::Timeout: need(false);
        }
        return t;
    }

    SystemState project(const State& s) const
    {
        SystemState out;
        for (const auto& st : s.storage) out.actors.push_back(storage_image(st));
        out.down.assign(s.down.begin(), s.down.end());
        out.events.assign(s.events.begin(), s.events.end());
        out.globals = Value::record({{"corrupts", Value(s.corrupts)},
                                     {"crashes", Value(s.crashes)},
                                     {"drops", Value(s.drops)},
                                     {"gets", Value(s.gets)},
                                     {"sets", Value(s.sets)}});
        return out;
    }

    /// Every stored value was written by some SET (or is the corruption marker).
    std::vector<NamedViolation> invariants(const State& s) const
    {
        std::vector<NamedViolation> out;
        for (std::size_t a = 0; a < s.storage.size(); ++a) {
            for (const auto& [k, v] : s.storage[a]) {
                bool issued = v == kCorruptValue;
                for (int i = 1; i <= s.sets && !issued; ++i) issued = v == "v" + std::to_string(i);
                if (!issued)
                    out.push_back({"StoredValuesIssued", "actor " + std::to_string(a) + " stores unknown value " + v});
            }
        }
        return out;
    }

private:
    static bool is_request(const Event& e) { return e.kind == kSet || e.kind == kGet; }

    static Value corrupted(const Event& e)
    {
        return Value::record({{"key", e.payload.at("key")}, {"value", Value(kCorruptValue)}});
    }

    static std::vector<Event> pending_requests(const State& s, ActorId a)
    {
        std::vector<Event> out;
        for (const auto& e : s.events)
            if (e.destination == a && is_request(e)) out.push_back(e);
        return out;
    }

    KvBounds bounds_;
};

} // namespace mbt::kv
