#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace flowprobe {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition of a public operation was not met (dimension mismatch,
/// non-finite input, out-of-range parameter).
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// An integrator produced a non-finite state.
class NumericalBlowup : public Error {
public:
    NumericalBlowup(std::string solver, std::size_t step);

    const std::string& solver() const noexcept { return solver_; }
    std::size_t step() const noexcept { return step_; }

private:
    std::string solver_;
    std::size_t step_;
};

/// Adaptive step control needed a step below the configured minimum.
class StiffnessError : public Error {
public:
    StiffnessError(double t, double step);

    double time() const noexcept { return t_; }

private:
    double t_;
};

/// No closed-form endpoint exists for the requested field kind.
class UnsupportedOracle : public Error {
public:
    using Error::Error;
};

/// A byte document could not be decoded. `offset` is where decoding stopped.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset);

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// A document decoded but its contents are inconsistent.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite loss or weight.
class TrainingFailure : public Error {
public:
    explicit TrainingFailure(std::size_t step);

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// An experiment config is malformed or names something that cannot be loaded.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace flowprobe
