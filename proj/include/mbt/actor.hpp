#pragma once

#include "mbt/event.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace mbt {

/// Effect requested by an actor. Every request becomes exactly one future
/// event; the kind only documents what the effect stands for.
struct OperationRequest {
    enum class Kind { Send, Persist };

    Kind kind = Kind::Send;
    Event event;

    static OperationRequest send(Event e) { return {Kind::Send, std::move(e)}; }
    static OperationRequest persist(Event e) { return {Kind::Persist, std::move(e)}; }
};

/// Implementation-side actor. on_event may only touch the actor's own state;
/// all side effects go through the returned requests. Throwing from on_event
/// is an implementation failure and aborts the current test.
class Actor {
public:
    virtual ~Actor() = default;

    virtual std::vector<OperationRequest> on_event(const Event& event) = 0;

    /// Projection of the actor's state onto the model vocabulary.
    virtual Value to_model() const = 0;

    /// Crash: forget the volatile part, keep the persistent part.
    virtual void reset_volatile() = 0;

    virtual Value persistent_image() const { return Value::nil(); }
};

/// Builds actor `id` of an `actor_count`-actor system in its initial state.
using ActorFactory = std::function<std::unique_ptr<Actor>(ActorId id, int actor_count)>;

} // namespace mbt
