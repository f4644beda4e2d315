#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace shapelift {

enum class ErrorCode {
  InvalidArgument,
  DegenerateConfiguration,
  AntipodalPoint,
  EmptySample,
  SingularCovariance,
  DimensionMismatch,
  UnreachableDistance,
  TooFewPoints,
  DegenerateChord,
  MalformedData,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Library-wide exception; `code()` identifies the failure class so callers
/// (notably the CLI) can map it onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace shapelift
