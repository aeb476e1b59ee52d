#pragma once

#include <stdexcept>
#include <string>

namespace renorm {

/// Coarse failure classes; they map one-to-one onto CLI exit codes.
enum class ErrorClass {
  input,      // malformed or invalid user data (exit 2)
  numerical,  // collision, domain violation, non-convergence (exit 3)
  cap,        // an internal resource cap was hit (exit 4)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), cls_(cls) {}
  ErrorClass error_class() const noexcept { return cls_; }

 private:
  ErrorClass cls_;
};

class CollisionError : public Error {
 public:
  explicit CollisionError(const std::string& what) : Error(ErrorClass::numerical, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorClass::numerical, what) {}
};

class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what) : Error(ErrorClass::numerical, what) {}
};

class EstimateError : public Error {
 public:
  explicit EstimateError(const std::string& what) : Error(ErrorClass::numerical, what) {}
};

class MaxStepsError : public Error {
 public:
  explicit MaxStepsError(const std::string& what) : Error(ErrorClass::cap, what) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(ErrorClass::input, what) {}
};

class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& what) : Error(ErrorClass::input, what) {}
};

inline int exit_code_for(ErrorClass cls) {
  switch (cls) {
    case ErrorClass::input: return 2;
    case ErrorClass::numerical: return 3;
    case ErrorClass::cap: return 4;
  }
  return 1;
}

}  // namespace renorm
