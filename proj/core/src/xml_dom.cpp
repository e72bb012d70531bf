#include "xml_dom.hpp"

#include <expat.h>

#include <cctype>

namespace cpsec::xml {
namespace {

std::string local_name(const char* qualified) {
  std::string_view name(qualified);
  if (auto colon = name.rfind(':'); colon != std::string_view::npos) {
    name.remove_prefix(colon + 1);
  }
  return std::string(name);
}

struct Builder {
  XML_Parser parser = nullptr;
  std::unique_ptr<Element> root;
  std::vector<Element*> stack;
};

void on_start(void* user, const XML_Char* name, const XML_Char** attrs) {
  auto* b = static_cast<Builder*>(user);
  auto element = std::make_unique<Element>();
  element->name = local_name(name);
  element->position = {
      static_cast<std::size_t>(XML_GetCurrentLineNumber(b->parser)),
      static_cast<std::size_t>(XML_GetCurrentColumnNumber(b->parser)) + 1};
  for (int i = 0; attrs[i] != nullptr; i += 2) {
    // Keep `xmlns:foo` declarations out of the attribute map.
    std::string_view raw(attrs[i]);
    if (raw == "xmlns" || raw.starts_with("xmlns:")) continue;
    element->attributes[local_name(attrs[i])] = attrs[i + 1];
  }
  Element* raw_ptr = element.get();
  if (b->stack.empty()) {
    b->root = std::move(element);
  } else {
    b->stack.back()->children.push_back(std::move(element));
  }
  b->stack.push_back(raw_ptr);
}

void on_end(void* user, const XML_Char*) {
  static_cast<Builder*>(user)->stack.pop_back();
}

void on_text(void* user, const XML_Char* s, int len) {
  auto* b = static_cast<Builder*>(user);
  if (!b->stack.empty()) b->stack.back()->text.append(s, len);
}

void append_deep(const Element& e, std::string& out) {
  out += e.text;
  for (const auto& c : e.children) {
    out += ' ';
    append_deep(*c, out);
  }
}

}  // namespace

const Element* Element::child(std::string_view child_name) const {
  for (const auto& c : children) {
    if (c->name == child_name) return c.get();
  }
  return nullptr;
}

std::vector<const Element*> Element::children_named(
    std::string_view child_name) const {
  std::vector<const Element*> out;
  for (const auto& c : children) {
    if (c->name == child_name) out.push_back(c.get());
  }
  return out;
}

const std::string* Element::attribute(std::string_view key) const {
  auto it = attributes.find(std::string(key));
  return it == attributes.end() ? nullptr : &it->second;
}

std::string Element::deep_text() const {
  std::string raw;
  append_deep(*this, raw);
  return collapse_whitespace(raw);
}

std::unique_ptr<Element> parse(std::string_view document) {
  Builder builder;
  std::unique_ptr<XML_ParserStruct, decltype(&XML_ParserFree)> parser(
      XML_ParserCreate("UTF-8"), &XML_ParserFree);
  if (!parser) throw Error(ErrorCode::kInternal, "cannot allocate XML parser");
  builder.parser = parser.get();
  XML_SetUserData(parser.get(), &builder);
  XML_SetElementHandler(parser.get(), on_start, on_end);
  XML_SetCharacterDataHandler(parser.get(), on_text);

  if (XML_Parse(parser.get(), document.data(),
                static_cast<int>(document.size()), XML_TRUE) == XML_STATUS_ERROR) {
    SourcePosition pos{
        static_cast<std::size_t>(XML_GetCurrentLineNumber(parser.get())),
        static_cast<std::size_t>(XML_GetCurrentColumnNumber(parser.get())) + 1};
    throw Error(ErrorCode::kParse,
                "malformed XML at line " + std::to_string(pos.line) +
                    ", column " + std::to_string(pos.column) + ": " +
                    XML_ErrorString(XML_GetErrorCode(parser.get())),
                {}, pos);
  }
  if (!builder.root) {
    throw Error(ErrorCode::kParse, "document has no root element", {},
                SourcePosition{1, 1});
  }
  return std::move(builder.root);
}

std::string escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      case '\r': out += "&#13;"; break;
      case '\t': out += "&#9;"; break;
      case '\n': out += "&#10;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(c);
  }
  return out;
}

}  // namespace cpsec::xml
