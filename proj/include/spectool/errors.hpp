#pragma once

#include <stdexcept>
#include <string>

namespace spectool {

/// Bad or inconsistent input (maps to CLI exit code 2).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine could not produce a trustworthy answer (exit code 3).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConstantColumn : public InputError {
 public:
  explicit ConstantColumn(std::string column)
      : InputError("column '" + column + "' has zero variance"), column_(std::move(column)) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

class InvalidBounds : public InputError {
 public:
  using InputError::InputError;
};

class SingularGram : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IllConditioned : public NumericalError {
 public:
  IllConditioned(double condition, const std::string& detail)
      : NumericalError(detail), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

class DegenerateDesign : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class RankDeficient : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Too many bootstrap or simulation replicates failed.
class ReplicateFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace spectool
