#include "cpsec/error.hpp"

namespace cpsec {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "PARSE_ERROR";
    case ErrorCode::kValidation: return "VALIDATION_ERROR";
    case ErrorCode::kConflict: return "CONFLICT";
    case ErrorCode::kNotFound: return "NOT_FOUND";
    case ErrorCode::kEmptyCorpus: return "EMPTY_CORPUS";
    case ErrorCode::kConfig: return "CONFIG";
    case ErrorCode::kInternal: return "INTERNAL";
    case ErrorCode::kNonFilter: return "NON_FILTER";
    case ErrorCode::kStaleComparison: return "STALE_COMPARISON";
    case ErrorCode::kInvalidDocument: return "INVALID_DOCUMENT";
    case ErrorCode::kBadRequest: return "BAD_REQUEST";
    case ErrorCode::kNoCorpus: return "NO_CORPUS";
  }
  return "UNKNOWN";
}

}  // namespace cpsec
