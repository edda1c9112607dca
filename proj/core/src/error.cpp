#include "impdens/error.hpp"

#include <cmath>

namespace impdens {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateInterval: return "DegenerateInterval";
    case ErrorCode::EmptyQuotes: return "EmptyQuotes";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RankOutOfRange: return "RankOutOfRange";
    case ErrorCode::SingularKernel: return "SingularKernel";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::InfeasibleConstraints: return "InfeasibleConstraints";
    case ErrorCode::PriceOutOfBounds: return "PriceOutOfBounds";
    case ErrorCode::OutOfSupport: return "OutOfSupport";
    case ErrorCode::NoConvergedEntries: return "NoConvergedEntries";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownFamily: return "UnknownFamily";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void require_finite(std::string_view what, double value) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be finite");
  }
}

}  // namespace impdens
