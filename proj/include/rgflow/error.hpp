#pragma once

#include <stdexcept>
#include <string>

namespace rgflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// File content does not follow the field container format.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Grid shape outside the supported set (square, power of two, n >= 8).
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A tensor field violates positivity or positive definiteness.
/// Carries the first offending cell in row-major scan order.
class InvariantError : public Error {
public:
    InvariantError(const std::string& what, int i, int j)
        : Error(what), i_(i), j_(j) {}

    int i() const noexcept { return i_; }
    int j() const noexcept { return j_; }

private:
    int i_;
    int j_;
};

/// Invalid parameters or configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Linear algebra failure (singular factorization, residual too large).
class SolverError : public Error {
public:
    using Error::Error;
};

/// Model generation could not produce a percolating channel.
class GenerationError : public Error {
public:
    GenerationError(const std::string& what, unsigned long long seed, int attempts)
        : Error(what), seed_(seed), attempts_(attempts) {}

    unsigned long long seed() const noexcept { return seed_; }
    int attempts() const noexcept { return attempts_; }

private:
    unsigned long long seed_;
    int attempts_;
};

} // namespace rgflow
