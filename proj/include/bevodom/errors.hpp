#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bevodom {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor or grid shapes that do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Inputs that make an operation undefined (too few samples, zero-norm vectors).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Matrices that are not rigid transforms within tolerance.
class InvalidPoseError : public Error {
 public:
  using Error::Error;
};

/// Point configurations whose least-squares optimum is not unique.
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

/// Invalid camera model (singular intrinsics, non-rigid extrinsics).
class InvalidCameraError : public Error {
 public:
  using Error::Error;
};

/// Binary payload that violates its container format.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Text input rejected by a parser. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Trajectory too short for the requested metric.
class InsufficientLengthError : public Error {
 public:
  using Error::Error;
};

/// Sampling from pair lists that are both empty.
class NoPairsError : public Error {
 public:
  using Error::Error;
};

}  // namespace bevodom
