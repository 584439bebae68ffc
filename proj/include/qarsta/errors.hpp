#pragma once

#include <stdexcept>
#include <string>

namespace qarsta {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument (dimension, range, count) was violated.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A direction matrix fell below the numerical rank tolerance.
class RankDeficiencyError : public Error {
 public:
  using Error::Error;
};

/// Random direction generation ran out of resampling attempts.
class GenerationError : public Error {
 public:
  using Error::Error;
};

/// Non-finite input or output where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A point lies outside the affine space a model is defined on.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The evaluation cache refused a new evaluation because the budget is spent.
class BudgetExhausted : public Error {
 public:
  BudgetExhausted() : Error("evaluation budget exhausted") {}
};

/// Profiles were requested but no solver solved any problem.
class EmptyProfileError : public Error {
 public:
  using Error::Error;
};

}  // namespace qarsta
