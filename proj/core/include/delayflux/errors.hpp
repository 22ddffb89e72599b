#pragma once

#include <stdexcept>
#include <string>

namespace delayflux {

/// Thrown when an input violates a documented precondition (parameter
/// ranges, initial-data compatibility, malformed files).
class DomainError : public std::invalid_argument {
public:
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown when a computation fails after valid inputs were accepted:
/// non-finite fields, history underrun, broken ordering invariants.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace delayflux
