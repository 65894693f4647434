#pragma once

#include <stdexcept>
#include <string>

namespace lsjm {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};
struct DuplicateNodeLabel : Error {
  using Error::Error;
};
struct NonBinaryEntry : Error {
  using Error::Error;
};
struct NonzeroDiagonal : Error {
  using Error::Error;
};
struct UnknownNode : Error {
  using Error::Error;
};
struct SingularMatrix : Error {
  using Error::Error;
};
struct NonPositiveDefinite : Error {
  using Error::Error;
};
struct DegenerateSvd : Error {
  using Error::Error;
};
struct NoObservedLinks : Error {
  using Error::Error;
};
struct DegenerateLabels : Error {
  using Error::Error;
};
struct InvalidPlan : Error {
  using Error::Error;
};
struct MalformedLine : Error {
  MalformedLine(int lineno, const std::string& what)
      : Error("line " + std::to_string(lineno) + ": " + what), lineno(lineno) {}
  int lineno;
};
struct SelfLoop : Error {
  explicit SelfLoop(int lineno)
      : Error("line " + std::to_string(lineno) + ": self loop not allowed"), lineno(lineno) {}
  int lineno;
};
struct IoFailure : Error {
  using Error::Error;
};
struct InvalidConfig : Error {
  using Error::Error;
};

}  // namespace lsjm
