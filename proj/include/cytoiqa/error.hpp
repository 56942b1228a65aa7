#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cytoiqa {

enum class ErrorCode {
  kInvalidArgument,
  kOutOfBounds,
  kInvalidSize,
  kEmptyGrid,
  kInconsistentSpec,
  kEmptyInput,
  kArity,
  kTooSmall,
  kModelLoad,
  kShapeMismatch,
  kPairing,
  kStrategyInapplicable,
  kInvalidConfiguration,
  kDegenerateManifest,
  kEmptyEvaluation,
  kLengthMismatch,
  kUnsupportedFormat,
  kIo,
  kParse,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cytoiqa
