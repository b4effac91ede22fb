#pragma once

#include <stdexcept>
#include <string>

namespace hetsim {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input document (bad JSON, missing field, wrong type).
struct ParseError : Error {
    using Error::Error;
};

/// A type invariant or mapping constraint does not hold. The message names
/// the offending field or clause.
struct ValidationError : Error {
    using Error::Error;
};

/// A device or process id does not resolve against the model.
struct ResolutionError : Error {
    using Error::Error;
};

/// No route exists between two devices that need to communicate.
struct RoutingError : Error {
    using Error::Error;
};

/// The simulation cannot make progress; the message lists blocked instances.
struct DeadlockError : Error {
    using Error::Error;
};

/// A cost model produced a value outside its declared domain.
struct ModelDomainError : Error {
    using Error::Error;
};

/// Least-squares fit is singular (degenerate abscissae with differing y).
struct SingularFitError : Error {
    using Error::Error;
};

/// No feasible mapping exists under the given constraints.
struct InfeasibleError : Error {
    using Error::Error;
};

/// A suite cannot be expanded (unbounded or malformed domain).
struct ExpansionError : Error {
    using Error::Error;
};

/// A behavior program received an invalid parameter value.
struct ParameterError : Error {
    using Error::Error;
};

/// An event trace is malformed (negative running demand, decreasing time).
struct TraceError : Error {
    using Error::Error;
};

/// Objective vectors of mixed dimensionality.
struct DimensionError : Error {
    using Error::Error;
};

} // namespace hetsim
