#ifndef DRQ_ERROR_HPP
#define DRQ_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace drq {

enum class ErrorCode {
  kMalformedInput,
  kSchemaViolation,
  kUnknownObject,
  kHorizonOutOfRange,
  kTrackGap,
  kEmptyScene,
  kTemplateInputMismatch,
  kEmptyInput,
  kMalformedToken,
  kProviderUnavailable,
  kDimensionMismatch,
  kEmptyChain,
  kLengthMismatch,
  kKindMismatch,
  kCorpusTooSmall,
  kSingleScene,
  kInvalidArgument,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedInput: return "MalformedInput";
    case ErrorCode::kSchemaViolation: return "SchemaViolation";
    case ErrorCode::kUnknownObject: return "UnknownObject";
    case ErrorCode::kHorizonOutOfRange: return "HorizonOutOfRange";
    case ErrorCode::kTrackGap: return "TrackGap";
    case ErrorCode::kEmptyScene: return "EmptyScene";
    case ErrorCode::kTemplateInputMismatch: return "TemplateInputMismatch";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kMalformedToken: return "MalformedToken";
    case ErrorCode::kProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyChain: return "EmptyChain";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kKindMismatch: return "KindMismatch";
    case ErrorCode::kCorpusTooSmall: return "CorpusTooSmall";
    case ErrorCode::kSingleScene: return "SingleScene";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

// Every failure in the toolkit surfaces as an Error carrying a code, so
// callers (tests, the CLI) can branch on the kind rather than the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace drq

#endif  // DRQ_ERROR_HPP
