// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace polyband {

/// Base class of all errors thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A structurally invalid argument: wrong size, bad count, inconsistent shapes.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A value outside the mathematical domain of an operation (non-finite input,
/// confidence outside (0,1), ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Geometry collapsed below the resolvable scale (zero-area contour,
/// zero-spread point set, ...).
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

/// Malformed external data: files, annotations, serialized objects.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed to produce a finite result.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A randomized generator exhausted its rejection budget.
class GenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace polyband
