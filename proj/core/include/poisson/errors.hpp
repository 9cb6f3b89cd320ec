#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace poisson {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression or model text. `position` is a 0-based offset.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class UnknownVariable : public Error {
 public:
  explicit UnknownVariable(const std::string& name) : Error("unknown variable '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class ChartMismatch : public Error {
 public:
  ChartMismatch() : Error("expressions live on different charts") {}
  using Error::Error;
};

/// An operation would leave the polynomial x exp(polynomial) class.
class ClassError : public Error {
 public:
  using Error::Error;
};

/// A named precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  PreconditionError(std::string name, const std::string& detail)
      : Error(name + ": " + detail), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

/// A numerical procedure failed (singular system, non-convergence, blow-up).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace poisson
