#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cpsec {

enum class ErrorCode {
  kParse,
  kValidation,
  kConflict,
  kNotFound,
  kEmptyCorpus,
  kConfig,
  kInternal,
  kNonFilter,
  kStaleComparison,
  kInvalidDocument,
  kBadRequest,
  kNoCorpus,
};

/// Stable machine-readable name, e.g. "STALE_COMPARISON".
std::string_view to_string(ErrorCode code);

struct SourcePosition {
  std::size_t line = 0;
  std::size_t column = 0;
};

/// The single exception type thrown by the library. `detail` holds one entry
/// per offending item (violation, dangling edge, bad line...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::vector<std::string> detail = {},
        std::optional<SourcePosition> position = std::nullopt)
      : std::runtime_error(message),
        code_(code),
        detail_(std::move(detail)),
        position_(position) {}

  ErrorCode code() const noexcept { return code_; }
  const std::vector<std::string>& detail() const noexcept { return detail_; }
  const std::optional<SourcePosition>& position() const noexcept {
    return position_;
  }

 private:
  ErrorCode code_;
  std::vector<std::string> detail_;
  std::optional<SourcePosition> position_;
};

/// Non-fatal diagnostic collected while parsing or filtering.
struct Warning {
  std::string code;
  std::string message;

  bool operator==(const Warning&) const = default;
};

}  // namespace cpsec
