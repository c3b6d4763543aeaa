#pragma once

#include <stdexcept>
#include <string>

namespace levidm {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A precondition on an input was violated (bad config value, unstable time
// step, unsupported enum member, ...). Maps to CLI exit code 2.
struct InvalidInput : Error {
    explicit InvalidInput(const std::string& msg) : Error(msg) {}
};

// A numerical routine failed to meet its contract (quadrature did not
// converge, integrator cross-check disagreed, non-finite value produced).
// Maps to CLI exit code 4.
struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

// A statistical fit could not be carried out (singular normal equations).
// Maps to CLI exit code 4.
struct EstimationError : Error {
    explicit EstimationError(const std::string& msg) : Error(msg) {}
};

// Filesystem trouble. Maps to CLI exit code 3.
struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};

} // namespace levidm
