#ifndef FRACPREDICT_ERRORS_HPP
#define FRACPREDICT_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fracpredict {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid argument value (negative time, sigma <= 0, ...).
struct DomainError : Error {
    using Error::Error;
};

/// Matrix/vector dimension mismatch.
struct ShapeError : Error {
    using Error::Error;
};

/// Cholesky pivot failure; `pivot` is the first failing diagonal index.
struct NotPositiveDefiniteError : Error {
    std::size_t pivot;
    explicit NotPositiveDefiniteError(std::size_t p)
        : Error("matrix not positive definite at pivot " + std::to_string(p)), pivot(p) {}
};

/// Gaussian conditioning failed (singular observation block).
struct ConditioningError : Error {
    using Error::Error;
};

/// Path generation failed (embedding and fallback both rejected).
struct SimulationError : Error {
    using Error::Error;
};

/// Operation requested outside its supported parameter regime (e.g. H <= 1/2).
struct UnsupportedRegimeError : Error {
    using Error::Error;
};

/// Closed-form fCIR predictor saw a zero observation; caller must use the
/// orthant Monte-Carlo path instead.
struct OrthantCaseRequired : Error {
    using Error::Error;
};

/// Rejection sampler acceptance rate fell below the feasibility floor.
struct InfeasibleOrthantError : Error {
    using Error::Error;
};

/// Training loss became non-finite; `batch` is the offending batch index.
struct DivergenceError : Error {
    std::size_t batch;
    explicit DivergenceError(std::size_t b)
        : Error("non-finite training loss at batch " + std::to_string(b)), batch(b) {}
};

/// Bad experiment / CLI configuration.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace fracpredict

#endif
