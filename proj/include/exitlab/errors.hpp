#pragma once

#include <stdexcept>
#include <string>

namespace exitlab {

// Base class for everything thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid argument to an operation (negative variance, dimension mismatch, ...).
struct DomainError : Error {
    using Error::Error;
};

// A run-level configuration problem; message names the offending field.
struct ConfigError : Error {
    using Error::Error;
};

// Non-finite state or exhausted random stream.
struct NumericError : Error {
    using Error::Error;
};

// simulate_until_exit exceeded max_time without exiting.
struct TimeoutError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace exitlab
