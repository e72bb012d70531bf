#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cpsec/error.hpp"

namespace cpsec::xml {

// Minimal element tree. Namespace prefixes are stripped from element and
// attribute names; character data of mixed content is concatenated.
struct Element {
  std::string name;
  std::map<std::string, std::string> attributes;
  std::vector<std::unique_ptr<Element>> children;
  std::string text;
  SourcePosition position;

  const Element* child(std::string_view child_name) const;
  std::vector<const Element*> children_named(std::string_view child_name) const;
  const std::string* attribute(std::string_view key) const;
  /// Text of this element and all descendants, whitespace-collapsed.
  std::string deep_text() const;
};

/// Throws Error(kParse) with the expat line/column on malformed input.
std::unique_ptr<Element> parse(std::string_view document);

std::string escape(std::string_view text);

/// Collapses runs of whitespace to one space and trims both ends.
std::string collapse_whitespace(std::string_view text);

}  // namespace cpsec::xml
