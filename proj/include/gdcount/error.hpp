#pragma once

#include <stdexcept>
#include <string>

namespace gdcount {

/// Argument outside the domain of a function (non-positive moments, u outside (0,1), ...).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Vector/matrix sizes that do not agree.
class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

/// Failures of the numerics themselves rather than of the caller's input.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

class NotPositiveDefinite : public NumericalError {
 public:
  explicit NotPositiveDefinite(const std::string& what) : NumericalError(what) {}
};

class ZeroMass : public NumericalError {
 public:
  explicit ZeroMass(const std::string& what) : NumericalError(what) {}
};

}  // namespace gdcount
