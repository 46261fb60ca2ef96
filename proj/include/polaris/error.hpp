#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace polaris {

// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Shape mismatch between operands.
class DimensionError : public Error {
  public:
    using Error::Error;
};

// Invalid values or configuration (nonpositive variance, bad alpha, ...).
class DomainError : public Error {
  public:
    using Error::Error;
};

// Malformed input file; message names the offending row/column when known.
class ParseError : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

// Too few rows/samples for the requested statistic.
class InsufficientDataError : public Error {
  public:
    using Error::Error;
};

// A subset selection produced zero dimensions.
class EmptySubsetError : public Error {
  public:
    using Error::Error;
};

class IndexError : public Error {
  public:
    using Error::Error;
};

// Numerical failures (map to CLI exit code 3).
class NumericalError : public Error {
  public:
    using Error::Error;
};

class SingularCovarianceError : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

class TrainingDivergedError : public NumericalError {
  public:
    TrainingDivergedError(const std::string& msg, std::uint64_t step)
        : NumericalError(msg), step_(step) {}
    std::uint64_t step() const { return step_; }

  private:
    std::uint64_t step_;
};

}  // namespace polaris
