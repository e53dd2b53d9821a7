#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace flatgs {

// Invalid mathematical input: exponent ordering, negative fields, mismatched
// dimensions, zero denominators.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed or out-of-range configuration (grid too small, dt <= 0, bad keys).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// An operation was called outside its documented preconditions
// (non-flat state passed to a flat-only check, unordered comparison data...).
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Numerical failure. `diagnostics` carries whatever the solver knew when it
// gave up (best iterate value, offending step, residual history tail).
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, std::vector<double> diagnostics = {})
        : std::runtime_error(what), diagnostics_(std::move(diagnostics)) {}

    const std::vector<double>& diagnostics() const noexcept { return diagnostics_; }

private:
    std::vector<double> diagnostics_;
};

}  // namespace flatgs
