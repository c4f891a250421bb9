#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace maxent {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotHermitianError : public Error {
 public:
  explicit NotHermitianError(double max_asymmetry)
      : Error("matrix is not Hermitian: max |A_ab - conj(A_ba)| = " +
              std::to_string(max_asymmetry)),
        max_asymmetry_(max_asymmetry) {}
  double max_asymmetry() const noexcept { return max_asymmetry_; }

 private:
  double max_asymmetry_;
};

class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(long iterations)
      : Error("eigensolver did not converge after " +
              std::to_string(iterations) + " iterations"),
        iterations_(iterations) {}
  long iterations() const noexcept { return iterations_; }

 private:
  long iterations_;
};

/// A spectral function was evaluated outside its domain.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, double offending_value)
      : Error(what + " (offending value " + std::to_string(offending_value) +
              ")"),
        value_(offending_value) {}
  double offending_value() const noexcept { return value_; }

 private:
  double value_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class OverflowError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class NormalizationError : public Error {
 public:
  using Error::Error;
};

/// A solver step could not be evaluated; `index` names the offending term.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, std::size_t index)
      : Error(what + " (term " + std::to_string(index) + ")"), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class SingularityError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace maxent
