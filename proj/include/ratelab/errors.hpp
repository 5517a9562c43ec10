#ifndef RATELAB_ERRORS_HPP
#define RATELAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ratelab {

// Data/solver errors. Contract violations (bad preconditions) throw
// std::invalid_argument instead.

// No return to the section within max_return iterates.
struct ReturnOverflow : std::runtime_error {
    explicit ReturnOverflow(const std::string& what) : std::runtime_error(what) {}
};

// Transfer-operator series stopped decreasing before reaching tolerance.
struct NoDecay : std::runtime_error {
    explicit NoDecay(const std::string& what) : std::runtime_error(what) {}
};

// Matrix not positive semidefinite beyond the repair tolerance.
struct NotPSD : std::runtime_error {
    explicit NotPSD(const std::string& what) : std::runtime_error(what) {}
};

// Empirical measures with different atom counts.
struct SizeMismatch : std::runtime_error {
    explicit SizeMismatch(const std::string& what) : std::runtime_error(what) {}
};

// A metric inequality that must hold for exact solvers was violated.
struct InequalityViolation : std::runtime_error {
    explicit InequalityViolation(const std::string& what) : std::runtime_error(what) {}
};

// Parameters outside the range covered by the rate theory.
struct OutOfRegime : std::runtime_error {
    explicit OutOfRegime(const std::string& what) : std::runtime_error(what) {}
};

// Log-log fit fed a non-positive value.
struct NonPositiveValue : std::runtime_error {
    explicit NonPositiveValue(const std::string& what) : std::runtime_error(what) {}
};

// Bad experiment configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ratelab

#endif
