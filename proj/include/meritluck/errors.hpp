#pragma once

#include <stdexcept>
#include <string>

namespace meritluck {

// Base for everything thrown by this library, so callers can catch one type.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An argument is outside its mathematical domain (negative advantage, q > 1, ...).
struct DomainError : Error {
    using Error::Error;
};

// A model or configuration parameter is structurally invalid (bad shares, bad grid, ...).
struct ParameterError : Error {
    using Error::Error;
};

// An operation is not defined for the given object (density of a discrete ratio, ...).
struct UnsupportedError : Error {
    using Error::Error;
};

// Caller broke an interface contract (mismatched features, missing curve, ...).
struct ContractError : Error {
    using Error::Error;
};

// Session design could not realise a target within the sampling budget.
struct DesignError : Error {
    using Error::Error;
};

// An estimator cannot run on the data it was given (rank deficiency, too few clusters, ...).
struct EstimationError : Error {
    using Error::Error;
};

// A file could not be parsed; messages carry the path and 1-based row number.
struct ParseError : Error {
    using Error::Error;
};

// Filesystem access failed.
struct IoError : Error {
    using Error::Error;
};

}  // namespace meritluck
