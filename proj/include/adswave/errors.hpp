#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace adswave {

/// Raised when a parameter set breaks one or more model invariants.
/// Every violated constraint is listed, not just the first.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(std::vector<std::string> violations);

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

/// A numerical procedure stopped before reaching its tolerance.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_(achieved) {}

    /// Best error estimate reached before giving up.
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

/// Evaluation point outside the backward light cone.
class ConeError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

}  // namespace adswave
