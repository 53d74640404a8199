#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mbt {

enum class ErrorCode {
    IllegalAction,
    ActorFailure,
    GuardViolation,
    StateCapExceeded,
    InvariantViolated,
    UnreachableVertex,
    Infeasible,
    UnbalancedDegree,
    MalformedPath,
    MalformedInput,
    LogVersionMismatch,
    HashMismatch,
    Usage,
};

inline std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::IllegalAction: return "ILLEGAL_ACTION";
    case ErrorCode::ActorFailure: return "ACTOR_FAILURE";
    case ErrorCode::GuardViolation: return "GUARD_VIOLATION";
    case ErrorCode::StateCapExceeded: return "STATE_CAP_EXCEEDED";
    case ErrorCode::InvariantViolated: return "INVARIANT_VIOLATED";
    case ErrorCode::UnreachableVertex: return "UNREACHABLE_VERTEX";
    case ErrorCode::Infeasible: return "INFEASIBLE";
    case ErrorCode::UnbalancedDegree: return "UNBALANCED_DEGREE";
    case ErrorCode::MalformedPath: return "MALFORMED_PATH";
    case ErrorCode::MalformedInput: return "MALFORMED_INPUT";
    case ErrorCode::LogVersionMismatch: return "LOG_VERSION_MISMATCH";
    case ErrorCode::HashMismatch: return "HASH_MISMATCH";
    case ErrorCode::Usage: return "USAGE";
    }
    return "UNKNOWN";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

} // namespace mbt
