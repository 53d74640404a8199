#pragma once

// Single-threaded actor-system emulator. Holds N actors and the store of
// unprocessed events, applies one Action per step, and projects the whole
// system onto the model vocabulary on demand. Replaying the same actions
// from reset always produces the same snapshots.

#include "mbt/action.hpp"
#include "mbt/actor.hpp"
#include "mbt/error.hpp"
#include "mbt/event_store.hpp"
#include "mbt/system_state.hpp"

#include <memory>
#include <set>
#include <string>
#include <vector>

namespace mbt {

struct EmulatorConfig {
    int actor_count = 1;
    Discipline discipline = Discipline::Set;
    ActorFactory factory;
    std::set<ActionKind> enabled_kinds = {ActionKind::Inject, ActionKind::Deliver, ActionKind::Drop,
                                          ActionKind::Corrupt, ActionKind::Crash,  ActionKind::Restart,
                                          ActionKind::Timeout};
};

class Emulator {
public:
    explicit Emulator(EmulatorConfig config) : config_(std::move(config))
    {
        if (config_.actor_count < 1) fail(ErrorCode::Usage, "actor count must be at least 1");
        if (!config_.factory) fail(ErrorCode::Usage, "emulator needs an actor factory");
        reset();
    }

    void reset()
    {
        actors_.clear();
        for (ActorId id = 0; id < config_.actor_count; ++id) actors_.push_back(config_.factory(id, config_.actor_count));
        alive_.assign(static_cast<std::size_t>(config_.actor_count), true);
        store_ = EventStore(config_.discipline);
    }

    int actor_count() const noexcept { return config_.actor_count; }
    const EventStore& store() const noexcept { return store_; }
    bool alive(ActorId id) const { return alive_.at(checked(id)); }
    const Actor& actor(ActorId id) const { return *actors_.at(checked(id)); }

    /// Applies one action. Throws ILLEGAL_ACTION when the action does not fit
    /// the current configuration and ACTOR_FAILURE when an actor throws.
    void step(const Action& action)
    {
        if (!config_.enabled_kinds.count(action.kind))
            fail(ErrorCode::IllegalAction, std::string(to_string(action.kind)) + " actions are disabled");

        switch (action.kind) {
        case ActionKind::Inject: {
            const Event& e = require_event(action);
            if (e.source != kExternal) fail(ErrorCode::IllegalAction, "injected event must have an external source");
            checked(e.destination);
            store_.insert(e);
            break;
        }
        case ActionKind::Deliver: {
            const Event& e = require_event(action);
            std::size_t dst = checked(e.destination);
            if (!alive_[dst]) fail(ErrorCode::IllegalAction, "actor " + std::to_string(dst) + " is crashed");
            store_.withdraw(e);
            dispatch(dst, e);
            break;
        }
        case ActionKind::Drop: store_.withdraw(require_event(action)); break;
        case ActionKind::Corrupt: {
            if (!action.replacement) fail(ErrorCode::IllegalAction, "CORRUPT without replacement payload");
            store_.replace_payload(require_event(action), *action.replacement);
            break;
        }
        case ActionKind::Crash: {
            std::size_t t = checked(action.target);
            if (!alive_[t]) fail(ErrorCode::IllegalAction, "actor " + std::to_string(t) + " already crashed");
            for (const auto& e : action.dropped) store_.erase(e);
            guarded(t, [&] { actors_[t]->reset_volatile(); });
            alive_[t] = false;
            break;
        }
        case ActionKind::Restart: {
            std::size_t t = checked(action.target);
            if (alive_[t]) fail(ErrorCode::IllegalAction, "actor " + std::to_string(t) + " is not crashed");
            alive_[t] = true;
            break;
        }
        case ActionKind::Timeout: {
            std::size_t t = checked(action.target);
            if (!alive_[t]) fail(ErrorCode::IllegalAction, "actor " + std::to_string(t) + " is crashed");
            dispatch(t, Event{kTimeoutKind, Value::nil(), kExternal, action.target});
            break;
        }
        }
    }

    SystemState snapshot() const
    {
        SystemState s;
        s.actors.reserve(actors_.size());
        for (std::size_t i = 0; i < actors_.size(); ++i)
            s.actors.push_back(guarded(i, [&] { return actors_[i]->to_model(); }));
        for (std::size_t i = 0; i < alive_.size(); ++i)
            if (!alive_[i]) s.down.push_back(static_cast<ActorId>(i));
        s.events = store_.projection();
        return s;
    }

private:
    std::size_t checked(ActorId id) const
    {
        if (id < 0 || id >= config_.actor_count) fail(ErrorCode::IllegalAction, "no actor " + std::to_string(id));
        return static_cast<std::size_t>(id);
    }

    static const Event& require_event(const Action& a)
    {
        if (!a.event) fail(ErrorCode::IllegalAction, std::string(to_string(a.kind)) + " without event selector");
        return *a.event;
    }

    template <class F>
    auto guarded(std::size_t actor, F&& f) const -> decltype(f())
    {
        try {
            return f();
        } catch (const Error&) {
            throw;
        } catch (const std::exception& ex) {
            fail(ErrorCode::ActorFailure, "actor " + std::to_string(actor) + ": " + ex.what());
        }
    }

    void dispatch(std::size_t actor, const Event& e)
    {
        auto requests = guarded(actor, [&] { return actors_[actor]->on_event(e); });
        for (auto& r : requests) {
            if (r.event.destination < 0 || r.event.destination >= config_.actor_count) {
                if (r.event.destination != kExternal)
                    fail(ErrorCode::ActorFailure, "actor " + std::to_string(actor) + " addressed unknown actor "
                                                      + std::to_string(r.event.destination));
            }
            store_.insert(std::move(r.event));
        }
    }

    EmulatorConfig config_;
    std::vector<std::unique_ptr<Actor>> actors_;
    std::vector<bool> alive_;
    EventStore store_;
};

} // namespace mbt
