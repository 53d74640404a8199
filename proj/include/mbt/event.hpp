#pragma once

#include "mbt/value.hpp"

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace mbt {

/// Dense actor index in [0, N).
using ActorId = std::int32_t;

/// Source of events that originate outside the system (clients, timers).
inline constexpr ActorId kExternal = -1;

/// Event kind used for TIMEOUT actions; delivered straight to the actor,
/// never stored.
inline constexpr const char* kTimeoutKind = "Timeout";

struct Event {
    std::string kind;
    Value payload;
    ActorId source = kExternal;
    ActorId destination = 0;

    friend auto operator<=>(const Event&, const Event&) = default;
    friend bool operator==(const Event&, const Event&) = default;

    Value to_value() const
    {
        return Value::record({{"dst", Value(destination)},
                              {"kind", Value(kind)},
                              {"payload", payload},
                              {"src", Value(source)}});
    }

    static Event from_value(const Value& v)
    {
        Event e;
        e.kind = v.at("kind").as_string();
        e.payload = v.at("payload");
        e.source = static_cast<ActorId>(v.at("src").as_int());
        e.destination = static_cast<ActorId>(v.at("dst").as_int());
        return e;
    }
};

inline std::string to_text(const Event& e) { return to_text(e.to_value()); }

inline Value events_to_set(const std::vector<Event>& events)
{
    std::vector<Value> vs;
    vs.reserve(events.size());
    for (const auto& e : events) vs.push_back(e.to_value());
    return Value::set(std::move(vs));
}

} // namespace mbt
