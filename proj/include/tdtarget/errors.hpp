#pragma once

#include <stdexcept>
#include <string>

namespace tdtarget {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on user-supplied data does not hold.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// An iterative method stopped before reaching its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// A dense solve or eigen-decomposition is numerically unusable.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// A learner iterate left the finite / bounded region.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, long long iteration)
        : Error(what), iteration_(iteration) {}
    long long iteration() const noexcept { return iteration_; }

private:
    long long iteration_;
};

} // namespace tdtarget
