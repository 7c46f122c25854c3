#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace ftcp {

enum class ErrorCode {
  kDegeneratePolygon,
  kOutOfDomain,
  kOrderTooHigh,
  kUnderdeterminedFit,
  kSingularNormalEquations,
  kVanishingTangent,
  kNormalParallelToTangent,
  kGimbalLock,
  kNonpositiveDisplacement,
  kOutOfTimeRange,
  kDomainMismatch,
  kInvalidArgument,
  kInvalidConfig,
  kIoError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a code so callers (and the CLI)
// can map it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 protected:
  struct Verbatim {};
  Error(Verbatim, ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

 private:
  ErrorCode code_;
};

// Wraps an Error with the pipeline stage it came from.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(Verbatim{}, cause.code(), stage + ": " + cause.what()),
        stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace ftcp
