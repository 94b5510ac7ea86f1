#pragma once

#include <stdexcept>
#include <string>

namespace nphf {

/// Bad input: invalid dimensions, illegal moves, malformed files. CLI exit code 1.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDimension : public DomainError {
 public:
  using DomainError::DomainError;
};

class InvalidDomain : public DomainError {
 public:
  using DomainError::DomainError;
};

class InvalidState : public DomainError {
 public:
  using DomainError::DomainError;
};

class IllegalAction : public DomainError {
 public:
  using DomainError::DomainError;
};

class ShapeError : public DomainError {
 public:
  using DomainError::DomainError;
};

class CorruptModel : public DomainError {
 public:
  using DomainError::DomainError;
};

class InsufficientData : public DomainError {
 public:
  using DomainError::DomainError;
};

class UndefinedVariance : public DomainError {
 public:
  using DomainError::DomainError;
};

class DeadEnd : public DomainError {
 public:
  using DomainError::DomainError;
};

class TrainingDivergence : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Resource limits: state-space caps, node budgets. CLI exit code 2.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nphf
