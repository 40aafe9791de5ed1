#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lobpcg {

enum class ErrorCode {
  NonSymmetric,
  NoConvergence,
  NotPositiveDefinite,
  DimensionMismatch,
  IndexOutOfRange,
  AsymmetricValues,
  SelfLoop,
  NegativeWeight,
  ZeroVector,
  ZeroRank,
  InsufficientRank,
  LossOfOrthogonality,
  InvalidConfig,
  DenseCapExceeded,
  BadHeader,
  UnsupportedField,
  NonSymmetricData,
  ParseError,
  DisconnectedGraph,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable code. Parse errors also carry the
/// 1-based line number (0 when not applicable).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::size_t line = 0);

  ErrorCode code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::size_t line_;
};

}  // namespace lobpcg
