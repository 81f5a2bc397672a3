#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ifpref {

enum class ErrorCode {
  kUnknownConstraint,
  kInvalidSpec,
  kNoValidCombination,
  kEmptyConstraintSet,
  kEmptyInput,
  kBackendUnavailable,
  kRateLimited,
  kMalformedResponse,
  kBackendError,
  kMissingFinalToken,
  kEmptyAction,
  kNoChildren,
  kTerminalNode,
  kRenderTooLong,
  kConfigError,
  kIoError,
  kSchemaVersionMismatch,
  kEmptyDataset,
  kPrecondition,
};

std::string_view error_code_name(ErrorCode code);

// All library failures surface as this exception; `code()` is stable and
// machine-readable, `what()` is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class RateLimitedError : public Error {
 public:
  RateLimitedError(const std::string& message, double retry_after_seconds)
      : Error(ErrorCode::kRateLimited, message), retry_after_(retry_after_seconds) {}

  double retry_after_seconds() const noexcept { return retry_after_; }

 private:
  double retry_after_;
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownConstraint: return "UnknownConstraint";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kNoValidCombination: return "NoValidCombination";
    case ErrorCode::kEmptyConstraintSet: return "EmptyConstraintSet";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kRateLimited: return "RateLimited";
    case ErrorCode::kMalformedResponse: return "MalformedResponse";
    case ErrorCode::kBackendError: return "BackendError";
    case ErrorCode::kMissingFinalToken: return "MissingFinalToken";
    case ErrorCode::kEmptyAction: return "EmptyAction";
    case ErrorCode::kNoChildren: return "NoChildren";
    case ErrorCode::kTerminalNode: return "TerminalNode";
    case ErrorCode::kRenderTooLong: return "RenderTooLong";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kSchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kPrecondition: return "PreconditionFailed";
  }
  return "Unknown";
}

}  // namespace ifpref
