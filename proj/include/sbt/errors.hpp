#ifndef SBT_ERRORS_HPP
#define SBT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sbt {

// Bad user input: malformed config, unknown preset, invalid parameter.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Geometry violates a construction invariant (self-intersection, epsilon too
// large for the tube radius, non-arclength parameterization, ...).
struct GeometryError : std::runtime_error {
    explicit GeometryError(const std::string& msg) : std::runtime_error(msg) {}
};

// Evaluation requested outside the mathematical domain of an operation
// (point inside the slender body, kernel at the singularity, |phi| >= eta).
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Internal numerical failure (non-convergence of an iteration, NaN surfaced).
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace sbt

#endif
