#pragma once

#include <stdexcept>
#include <string>

namespace gsv {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid configuration values (bad sizes, non-positive tolerances, ...).
struct ConfigError : Error {
    using Error::Error;
};

/// Bad arguments to an operation (dimension mismatch, out-of-range ids, ...).
struct ArgumentError : Error {
    using Error::Error;
};

/// A resource cap would be exceeded (e.g. product graph too large).
struct CapacityError : Error {
    using Error::Error;
};

/// Malformed or inconsistent input data.
struct IngestError : Error {
    using Error::Error;
};

/// Numerical integration failure. Carries the time at which it occurred.
struct IntegrationError : Error {
    IntegrationError(const std::string& msg, double time)
        : Error(msg + " (t=" + std::to_string(time) + ")"), t(time) {}
    double t;
};

} // namespace gsv
