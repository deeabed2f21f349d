#pragma once

#include <stdexcept>
#include <string>

namespace pisac {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Configuration-level failures: the requested setup cannot be realized.
class ConfigError : public Error { using Error::Error; };
class DegenerateGeometry : public Error { using Error::Error; };
class Infeasible : public Error { using Error::Error; };
class InsufficientTrials : public Error { using Error::Error; };

// Numerical failures.
class NumericalFailure : public Error { using Error::Error; };
class DimensionMismatch : public Error { using Error::Error; };
class SingularGram : public NumericalFailure { using NumericalFailure::NumericalFailure; };
class NonConvergence : public NumericalFailure { using NumericalFailure::NumericalFailure; };
class IllConditioned : public NumericalFailure { using NumericalFailure::NumericalFailure; };
class MaxIterations : public NumericalFailure { using NumericalFailure::NumericalFailure; };
class RandomizationFailure : public NumericalFailure { using NumericalFailure::NumericalFailure; };

}  // namespace pisac
