#include "cytoiqa/error.hpp"

namespace cytoiqa {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kOutOfBounds: return "out of bounds";
    case ErrorCode::kInvalidSize: return "invalid size";
    case ErrorCode::kEmptyGrid: return "empty grid";
    case ErrorCode::kInconsistentSpec: return "inconsistent fragment spec";
    case ErrorCode::kEmptyInput: return "empty input";
    case ErrorCode::kArity: return "arity";
    case ErrorCode::kTooSmall: return "image too small";
    case ErrorCode::kModelLoad: return "model load";
    case ErrorCode::kShapeMismatch: return "shape mismatch";
    case ErrorCode::kPairing: return "pairing";
    case ErrorCode::kStrategyInapplicable: return "strategy inapplicable";
    case ErrorCode::kInvalidConfiguration: return "invalid configuration";
    case ErrorCode::kDegenerateManifest: return "degenerate manifest";
    case ErrorCode::kEmptyEvaluation: return "empty evaluation";
    case ErrorCode::kLengthMismatch: return "length mismatch";
    case ErrorCode::kUnsupportedFormat: return "unsupported format";
    case ErrorCode::kIo: return "i/o";
    case ErrorCode::kParse: return "parse";
  }
  return "unknown";
}

}  // namespace cytoiqa
