// errors.hpp: Exception hierarchy shared by all jumpsigma modules

#pragma once

#include <stdexcept>
#include <string>

namespace jumpsigma {

/// Bad input: malformed operators, inconsistent models, invalid configuration.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A matrix that should be a density matrix is not (negative eigenvalue etc).
class InvalidStateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Base for failures that arise while numerically evolving a valid input.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IntegrationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class StepSizeError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ImpossibleJumpError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NoStationaryStateError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace jumpsigma
