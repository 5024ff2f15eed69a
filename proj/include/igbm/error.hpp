#pragma once

#include <stdexcept>
#include <string>

namespace igbm {

// Root of all library errors. Each subclass maps onto one CLI exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class BracketError : public NumericalError {
public:
    BracketError(const std::string& what, double lo, double hi, double f_lo, double f_hi)
        : NumericalError(what), lo(lo), hi(hi), f_lo(f_lo), f_hi(f_hi) {}
    double lo, hi, f_lo, f_hi;
};

// Raised by iterative solvers; carries the last residual and, when the
// iteration looked oscillatory, a suggested smaller damping.
class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, double residual, int iterations,
                     double suggested_damping = 0.0)
        : NumericalError(what), residual(residual), iterations(iterations),
          suggested_damping(suggested_damping) {}
    double residual;
    int iterations;
    double suggested_damping;
};

class StatisticsError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace igbm
