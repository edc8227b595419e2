#pragma once

#include <stdexcept>
#include <string>

namespace capa {

/// Base for every error the library raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Field point coincides with a source point.
class DegenerateDistance : public Error {
 public:
  using Error::Error;
};

/// Bad configuration values (G = 0, negative power, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed scenario or config text; message carries "file:line: field".
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Group centers cannot be placed under the distance constraints.
class InfeasibleGeometry : public Error {
 public:
  using Error::Error;
};

/// Rate floors cannot be met under the power budget.
class InfeasibleProblem : public Error {
 public:
  using Error::Error;
};

/// A linear system needed by an optimizer is too close to singular.
class NumericalConditioning : public Error {
 public:
  using Error::Error;
};

}  // namespace capa
