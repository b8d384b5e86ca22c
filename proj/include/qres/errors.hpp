#pragma once

#include <stdexcept>
#include <string>

namespace qres {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Arguments that violate a documented precondition (zero norm, bad sizes, ...).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Tensor shapes or indices that do not fit together.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Problem size above a configured cap (exact diagonalization, brute force).
class ResourceLimit : public Error {
public:
    using Error::Error;
};

/// An iterative solver stopped before reaching its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double best_residual)
        : Error(what), best_residual_(best_residual) {}

    double best_residual() const noexcept { return best_residual_; }

private:
    double best_residual_;
};

/// Cross interpolation was asked to use a pivot it cannot work with.
class PivotError : public Error {
public:
    using Error::Error;
};

} // namespace qres
