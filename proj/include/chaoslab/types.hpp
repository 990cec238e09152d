#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace chaoslab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using VecMap = Eigen::Map<Vec>;
using ConstVecMap = Eigen::Map<const Vec>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedDimension : public Error {
public:
    using Error::Error;
};

class SingularCovariance : public Error {
public:
    using Error::Error;
};

/// A derivative slot required by an operation is missing on the model.
class CapabilityError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Iterative solver hit its iteration cap. Carries the last duality gap.
class IterationLimit : public Error {
public:
    IterationLimit(const std::string& what, double last_gap, std::size_t iterations)
        : Error(what), last_gap_(last_gap), iterations_(iterations) {}
    double last_gap() const { return last_gap_; }
    std::size_t iterations() const { return iterations_; }

private:
    double last_gap_;
    std::size_t iterations_;
};

/// Particle state became non-finite or left the box |x| <= 1e8.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, std::size_t step) : Error(what), step_(step) {}
    std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

}  // namespace chaoslab
