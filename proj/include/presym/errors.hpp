#pragma once

#include <stdexcept>
#include <string>

namespace presym {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input text; `pos` is a 0-based character offset into the source.
struct ParseError : Error {
    ParseError(const std::string& what, std::size_t pos)
        : Error(what + " (at position " + std::to_string(pos) + ")"), pos(pos) {}
    std::size_t pos;
};

struct UnknownIdentifier : ParseError {
    using ParseError::ParseError;
};

struct DivisionByZero : Error {
    DivisionByZero() : Error("division by identically-zero expression") {}
};

struct CyclicBinding : Error {
    using Error::Error;
};

struct NotAffine : Error {
    using Error::Error;
};

struct ZeroCoefficient : Error {
    using Error::Error;
};

struct SingularSubmatrix : Error {
    using Error::Error;
};

struct UnresolvableSecondClass : Error {
    using Error::Error;
};

struct GenerationBudgetExceeded : Error {
    using Error::Error;
};

struct NonlinearRouth : Error {
    using Error::Error;
};

struct SingularConstraintMatrix : Error {
    using Error::Error;
};

struct DegenerateLagrangian : Error {
    using Error::Error;
};

struct EquivalenceFailure : Error {
    using Error::Error;
};

struct SideConditionViolated : Error {
    using Error::Error;
};

struct InputError : Error {
    using Error::Error;
};

} // namespace presym
