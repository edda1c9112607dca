#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace impdens {

enum class ErrorCode {
  InvalidArgument,
  DegenerateInterval,
  EmptyQuotes,
  GridMismatch,
  DimensionMismatch,
  RankOutOfRange,
  SingularKernel,
  NumericalFailure,
  NoConvergence,
  InfeasibleConstraints,
  PriceOutOfBounds,
  OutOfSupport,
  NoConvergedEntries,
  ParseError,
  UnknownFamily,
  EmptyFile,
  Io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Throws InvalidArgument unless every argument is finite.
void require_finite(std::string_view what, double value);

}  // namespace impdens
