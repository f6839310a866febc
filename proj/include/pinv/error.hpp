#pragma once

#include <stdexcept>
#include <string>

namespace pinv {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller violated an operation's precondition (bad sizes, bad parameters).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A query or inversion fell outside the sampled / guaranteed range.
class OutOfRange : public Error {
public:
    using Error::Error;
};

/// A discrete invariant that the theory guarantees was observed to fail
/// (non-monotone reachable table, negative constant, ...).
class InvariantViolation : public Error {
public:
    InvariantViolation(const std::string& what, std::string witness)
        : Error(what), witness_(std::move(witness)) {}

    const std::string& witness() const noexcept { return witness_; }

private:
    std::string witness_;
};

}  // namespace pinv
