#ifndef STEPGNR_ERRORS_HPP
#define STEPGNR_ERRORS_HPP

#include <stdexcept>

namespace stepgnr {

/// Input that violates a documented bound (bad spec, profile, config value).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Iterative scheme (decimation, quadrature) ran out of iterations.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Singular solve or a result outside its physical range (negative T, LDOS).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace stepgnr

#endif
