#pragma once

#include <stdexcept>
#include <string>

namespace eitmech {

// Bad inputs, bad configs, violated invariants. CLI exit code 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Solver breakdowns: singular systems, step underflow, drifting invariants. CLI exit code 2.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace eitmech
