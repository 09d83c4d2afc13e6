#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lipext {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes disagree, or a size cap was exceeded.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// A documented precondition does not hold (negative radius, non-simplex
/// weights, non-Lipschitz input data, ...).
class PreconditionError : public Error {
public:
  using Error::Error;
};

/// A distance matrix that does not come from points in Euclidean space.
class NonEuclideanError : public Error {
public:
  using Error::Error;
};

/// Inner projection loop on a half-space intersection did not settle.
class PossiblyEmptyBody : public Error {
public:
  using Error::Error;
};

/// Closed-form root of a circle placement fell outside its bracket.
class GeometryInconsistency : public Error {
public:
  using Error::Error;
};

/// Problem/report document does not match the schema. Every violation found
/// is listed with its path.
class SchemaError : public Error {
public:
  explicit SchemaError(std::vector<std::string> issues)
      : Error(join(issues)), issues_(std::move(issues)) {}

  const std::vector<std::string>& issues() const { return issues_; }

private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string out = "schema violation";
    for (const auto& i : issues)
      out += "\n  " + i;
    return out;
  }
  std::vector<std::string> issues_;
};

} // namespace lipext
