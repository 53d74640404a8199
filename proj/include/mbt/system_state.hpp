#pragma once

#include "mbt/event.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace mbt {

/// Composite system state: one to_model image per actor, the set of crashed
/// actors, and the unprocessed events under set semantics. `globals` holds
/// model-only bookkeeping (bound counters, vote tallies) that an
/// implementation has no image of; it takes part in state identity but is
/// not compared during conformance.
struct SystemState {
    std::vector<Value> actors;
    std::vector<ActorId> down;  // sorted
    std::vector<Event> events;  // sorted, unique
    Value globals;

    friend bool operator==(const SystemState&, const SystemState&) = default;

    void normalize()
    {
        std::sort(down.begin(), down.end());
        down.erase(std::unique(down.begin(), down.end()), down.end());
        std::sort(events.begin(), events.end());
        events.erase(std::unique(events.begin(), events.end()), events.end());
    }

    Value to_value() const
    {
        std::vector<Value> ds(down.begin(), down.end());
        return Value::record({{"actors", Value::seq(actors)},
                              {"down", Value::set(std::move(ds))},
                              {"events", events_to_set(events)},
                              {"globals", globals}});
    }

    static SystemState from_value(const Value& v)
    {
        SystemState s;
        s.actors = v.at("actors").items();
        for (const auto& d : v.at("down").items()) s.down.push_back(static_cast<ActorId>(d.as_int()));
        for (const auto& e : v.at("events").items()) s.events.push_back(Event::from_value(e));
        s.globals = v.at("globals");
        s.normalize();
        return s;
    }

    /// Injective text key; equal states give equal keys in every process.
    std::string canonical_key() const { return to_text(to_value()); }
};

inline std::string to_text(const SystemState& s) { return s.canonical_key(); }

inline SystemState parse_system_state(std::string_view text) { return SystemState::from_value(parse_value(text)); }

} // namespace mbt
