#include "lobpcg/error.hpp"

namespace lobpcg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonSymmetric: return "NonSymmetric";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::AsymmetricValues: return "AsymmetricValues";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::ZeroRank: return "ZeroRank";
    case ErrorCode::InsufficientRank: return "InsufficientRank";
    case ErrorCode::LossOfOrthogonality: return "LossOfOrthogonality";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::DenseCapExceeded: return "DenseCapExceeded";
    case ErrorCode::BadHeader: return "BadHeader";
    case ErrorCode::UnsupportedField: return "UnsupportedField";
    case ErrorCode::NonSymmetricData: return "NonSymmetricData";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::size_t line)
    : std::runtime_error(std::string(to_string(code)) + ": " + message +
                         (line > 0 ? " (line " + std::to_string(line) + ")" : "")),
      code_(code),
      line_(line) {}

}  // namespace lobpcg
