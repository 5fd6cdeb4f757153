#pragma once

#include <stdexcept>
#include <string>

namespace noisespec {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Mismatched dimensions between inputs.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature failed to reach the requested tolerance.
class QuadratureError : public Error {
public:
    QuadratureError(const std::string& what, double achieved)
        : Error(what), achieved_error_(achieved) {}
    double achieved_error() const noexcept { return achieved_error_; }

private:
    double achieved_error_;
};

/// Time propagation produced non-finite or runaway values.
class SimulationError : public Error {
public:
    using Error::Error;
};

/// Inputs that belong to a different task than the one requested.
class TaskMismatchError : public Error {
public:
    using Error::Error;
};

/// Invalid command-line or configuration input (CLI exit code 2).
class UsageError : public Error {
public:
    using Error::Error;
};

} // namespace noisespec
