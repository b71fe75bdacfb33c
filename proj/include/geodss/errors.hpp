#pragma once

#include <stdexcept>
#include <string>

namespace geodss {

/// Invalid argument or configuration value.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Query outside the lateral extent of a model or grid.
class DomainError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Covariance could not be factorized while sampling realizations.
class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Linear-algebra failure inside the filter.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A trajectory decision breaks a drilling constraint. `constraint()` names
/// which one ("dogleg", "max_inclination", "non_climbing", "grid_bounds").
class ConstraintViolation : public std::runtime_error {
public:
    ConstraintViolation(std::string constraint, const std::string& what)
        : std::runtime_error(what), constraint_(std::move(constraint)) {}

    const std::string& constraint() const noexcept { return constraint_; }

private:
    std::string constraint_;
};

/// Operation not allowed in the session's current status.
class SessionStateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inconsistent internal state (e.g. reading an unsolved policy entry).
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace geodss
