#pragma once

#include <stdexcept>
#include <string>

namespace sisapprox {

// Raised for any input that violates an operation's preconditions:
// malformed files, out-of-range indices, inconsistent shapes.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Raised when a numerical routine fails to meet its own postcondition.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sisapprox
