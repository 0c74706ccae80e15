#pragma once

#include <stdexcept>
#include <string>

namespace arlab {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A config or input file violates its declared invariants.
struct InvalidConfig : Error {
    using Error::Error;
};

/// Arguments outside the mathematical domain of an operation.
struct DomainError : Error {
    using Error::Error;
};

/// The chain induced by a policy has more than one closed communicating class.
struct ReducibleChain : Error {
    using Error::Error;
};

/// A linear solve failed or produced an unusable solution.
struct SingularSystem : Error {
    using Error::Error;
};

/// The MDP is not communicating (some state pair is mutually unreachable).
struct NotCommunicating : Error {
    using Error::Error;
};

/// An iterative solver hit its iteration cap without meeting its tolerance.
struct NoConvergence : Error {
    using Error::Error;
};

/// Root finding or another numeric routine could not make progress.
struct NumericalFailure : Error {
    using Error::Error;
};

} // namespace arlab
