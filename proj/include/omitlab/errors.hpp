#pragma once

#include <stdexcept>
#include <string>

namespace omitlab {

// Invalid input: a parameter outside its physical or structural domain.
// `field()` names the offending input so the CLI can report it verbatim.
class DomainError : public std::invalid_argument {
public:
    DomainError(std::string field, const std::string& message)
        : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// A numerical procedure (root solve, step adaptation, ...) failed to converge.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Response function evaluated at (or numerically at) a pole.
class SingularityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace omitlab
