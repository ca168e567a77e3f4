#pragma once

#include <stdexcept>
#include <string>

namespace sparsesphere {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A caller violated a precondition (length mismatch, empty input, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A design file could not be read or failed validation.
class LoadError : public Error {
 public:
  using Error::Error;
};

/// Designs cannot be assembled into a nested ladder.
class LadderError : public Error {
 public:
  using Error::Error;
};

/// A size, count or integer product exceeds a configured capacity.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Inserting an index would break the down-set property.
class AdmissibilityError : public Error {
 public:
  using Error::Error;
};

}  // namespace sparsesphere
