#pragma once

#include <stdexcept>
#include <string>

namespace gausslt {

// Error categories map one-to-one onto CLI exit codes (see cli.hpp).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user-facing configuration (unknown keys, out-of-range parameters).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A mathematical precondition failed. `value` carries the offending quantity
/// (a discriminant, a time argument, ...) when there is one.
class PreconditionError : public Error {
public:
    explicit PreconditionError(const std::string& what, double value = 0.0)
        : Error(what), value_(value) {}
    double value() const noexcept { return value_; }

private:
    double value_;
};

/// Successive quadrature refinements disagreed by more than the tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double coarse, double fine)
        : Error(what), coarse_(coarse), fine_(fine) {}
    double coarse() const noexcept { return coarse_; }
    double fine() const noexcept { return fine_; }

private:
    double coarse_;
    double fine_;
};

/// Internal consistency check tripped; indicates a bug rather than bad input.
class InternalError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline void require(bool ok, const std::string& what, double value = 0.0) {
    if (!ok) throw PreconditionError(what, value);
}

}  // namespace detail
}  // namespace gausslt
