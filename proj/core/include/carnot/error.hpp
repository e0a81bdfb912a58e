#pragma once

#include <stdexcept>
#include <string>

namespace carnot {

// Base for all errors thrown by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input: bad weight sequences, unparsable rationals, files that do
// not match the documented schema.
struct InputError : Error {
    explicit InputError(const std::string& msg) : Error(msg) {}
};

// A documented precondition of an operation does not hold.
struct PreconditionError : Error {
    explicit PreconditionError(const std::string& msg) : Error(msg) {}
};

// An iteration failed to stabilize or a truncation order was exceeded.
struct TruncationError : Error {
    explicit TruncationError(const std::string& msg) : Error(msg) {}
};

} // namespace carnot
