#pragma once

#include "mbt/event.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mbt {

enum class ActionKind { Inject, Deliver, Drop, Corrupt, Crash, Restart, Timeout };

inline std::string_view to_string(ActionKind k)
{
    switch (k) {
    case ActionKind::Inject: return "INJECT";
    case ActionKind::Deliver: return "DELIVER";
    case ActionKind::Drop: return "DROP";
    case ActionKind::Corrupt: return "CORRUPT";
    case ActionKind::Crash: return "CRASH";
    case ActionKind::Restart: return "RESTART";
    case ActionKind::Timeout: return "TIMEOUT";
    }
    return "?";
}

inline ActionKind action_kind_from_string(std::string_view s)
{
    for (auto k : {ActionKind::Inject, ActionKind::Deliver, ActionKind::Drop, ActionKind::Corrupt,
                   ActionKind::Crash, ActionKind::Restart, ActionKind::Timeout}) {
        if (to_string(k) == s) return k;
    }
    fail(ErrorCode::MalformedInput, "unknown action kind '" + std::string(s) + "'");
}

/// One labeled transition. Which fields are meaningful depends on the kind:
///   INJECT            event (source EXTERNAL)
///   DELIVER, DROP     event selector
///   CORRUPT           event selector + replacement payload
///   CRASH             target + events dropped along with the crash
///   RESTART, TIMEOUT  target
struct Action {
    ActionKind kind = ActionKind::Deliver;
    ActorId target = kExternal;
    std::optional<Event> event;
    std::optional<Value> replacement;
    std::vector<Event> dropped; // sorted

    static Action inject(Event e)
    {
        Action a;
        a.kind = ActionKind::Inject;
        a.event = std::move(e);
        return a;
    }
    static Action deliver(Event e)
    {
        Action a;
        a.kind = ActionKind::Deliver;
        a.event = std::move(e);
        return a;
    }
    static Action drop(Event e)
    {
        Action a;
        a.kind = ActionKind::Drop;
        a.event = std::move(e);
        return a;
    }
    static Action corrupt(Event e, Value replacement)
    {
        Action a;
        a.kind = ActionKind::Corrupt;
        a.event = std::move(e);
        a.replacement = std::move(replacement);
        return a;
    }
    static Action crash(ActorId target, std::vector<Event> dropped = {})
    {
        Action a;
        a.kind = ActionKind::Crash;
        a.target = target;
        std::sort(dropped.begin(), dropped.end());
        a.dropped = std::move(dropped);
        return a;
    }
    static Action restart(ActorId target)
    {
        Action a;
        a.kind = ActionKind::Restart;
        a.target = target;
        return a;
    }
    static Action timeout(ActorId target)
    {
        Action a;
        a.kind = ActionKind::Timeout;
        a.target = target;
        return a;
    }

    friend bool operator==(const Action&, const Action&) = default;

    Value to_value() const
    {
        std::vector<std::pair<std::string, Value>> f;
        f.emplace_back("kind", Value(std::string(to_string(kind))));
        switch (kind) {
        case ActionKind::Inject:
        case ActionKind::Deliver:
        case ActionKind::Drop: f.emplace_back("event", event.value().to_value()); break;
        case ActionKind::Corrupt:
            f.emplace_back("event", event.value().to_value());
            f.emplace_back("payload", replacement.value());
            break;
        case ActionKind::Crash:
            f.emplace_back("target", Value(target));
            f.emplace_back("drop", events_to_set(dropped));
            break;
        case ActionKind::Restart:
        case ActionKind::Timeout: f.emplace_back("target", Value(target)); break;
        }
        return Value::record(std::move(f));
    }

    static Action from_value(const Value& v)
    {
        Action a;
        a.kind = action_kind_from_string(v.at("kind").as_string());
        switch (a.kind) {
        case ActionKind::Inject:
        case ActionKind::Deliver:
        case ActionKind::Drop: a.event = Event::from_value(v.at("event")); break;
        case ActionKind::Corrupt:
            a.event = Event::from_value(v.at("event"));
            a.replacement = v.at("payload");
            break;
        case ActionKind::Crash:
            a.target = static_cast<ActorId>(v.at("target").as_int());
            for (const auto& e : v.at("drop").items()) a.dropped.push_back(Event::from_value(e));
            break;
        case ActionKind::Restart:
        case ActionKind::Timeout: a.target = static_cast<ActorId>(v.at("target").as_int()); break;
        }
        return a;
    }
};

inline std::string to_text(const Action& a) { return to_text(a.to_value()); }

inline Action parse_action(std::string_view text) { return Action::from_value(parse_value(text)); }

} // namespace mbt
