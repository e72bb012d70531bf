#include "cpsec/graphml.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "xml_dom.hpp"

namespace cpsec {
namespace {

constexpr std::string_view kAttrPrefix = "attr:";
constexpr std::string_view kMetaPrefix = "meta:";
constexpr std::string_view kNameKey = "name";

std::string position_suffix(const xml::Element& e) {
  return " (line " + std::to_string(e.position.line) + ", column " +
         std::to_string(e.position.column) + ")";
}

class ModelReader {
 public:
  ParsedModel read(const xml::Element& root) {
    if (root.name != "graphml") {
      throw Error(ErrorCode::kParse,
                  "root element must be <graphml>, found <" + root.name + ">",
                  {}, root.position);
    }
    for (const auto* key : root.children_named("key")) {
      if (const auto* id = key->attribute("id")) declared_.insert(*id);
    }
    auto graphs = root.children_named("graph");
    if (graphs.size() != 1) {
      throw Error(ErrorCode::kParse,
                  "expected exactly one <graph>, found " +
                      std::to_string(graphs.size()),
                  {}, root.position);
    }
    read_graph(*graphs.front());

    if (!undeclared_.empty()) {
      throw Error(ErrorCode::kParse, "data keys used without a <key> declaration",
                  {undeclared_.begin(), undeclared_.end()});
    }
    if (auto violations = validate_model(out_.model); !violations.empty()) {
      std::vector<std::string> lines;
      for (const auto& v : violations) {
        lines.push_back(std::string(to_string(v.code)) + " " + v.subject + ": " +
                        v.message);
      }
      throw Error(ErrorCode::kValidation,
                  "model violates " + std::to_string(violations.size()) +
                      " invariant(s)",
                  std::move(lines));
    }
    return std::move(out_);
  }

 private:
  void read_graph(const xml::Element& graph) {
    if (const auto* dir = graph.attribute("edgedefault");
        dir && *dir != "directed") {
      throw Error(ErrorCode::kParse, "edgedefault must be \"directed\"", {},
                  graph.position);
    }
    if (const auto* id = graph.attribute("id")) out_.model.id = *id;

    for (const auto& child : graph.children) {
      if (child->name == "data") {
        read_graph_data(*child);
      } else if (child->name == "node") {
        read_node(*child);
      } else if (child->name == "edge") {
        read_edge(*child);
      } else {
        warn("IGNORED_ELEMENT",
             "ignored <" + child->name + ">" + position_suffix(*child));
      }
    }
  }

  // Returns the declared key, or nullptr when the element has none.
  const std::string* data_key(const xml::Element& data) {
    const auto* key = data.attribute("key");
    if (!key) {
      warn("IGNORED_KEY", "<data> without key" + position_suffix(data));
      return nullptr;
    }
    if (!declared_.contains(*key)) undeclared_.insert(*key);
    return key;
  }

  void read_graph_data(const xml::Element& data) {
    const auto* key = data_key(data);
    if (!key) return;
    if (key->starts_with(kMetaPrefix)) {
      out_.model.metadata[key->substr(kMetaPrefix.size())] = data.text;
    } else {
      warn("IGNORED_KEY", "graph data key '" + *key + "' ignored");
    }
  }

  void read_attributes(const xml::Element& owner, const std::string& owner_id,
                       std::vector<Attribute>& attrs, std::string* name) {
    bool have_name = false;
    for (const auto* data : owner.children_named("data")) {
      const auto* key = data_key(*data);
      if (!key) continue;
      if (name && *key == kNameKey) {
        if (have_name) {
          warn("DUPLICATE_NAME", "second name on '" + owner_id + "' ignored");
          continue;
        }
        *name = data->text;
        have_name = true;
      } else if (key->starts_with(kAttrPrefix)) {
        attrs.push_back({key->substr(kAttrPrefix.size()), data->text});
      } else {
        warn("IGNORED_KEY",
             "data key '" + *key + "' on '" + owner_id + "' ignored");
      }
    }
  }

  void read_node(const xml::Element& node) {
    Component c;
    if (const auto* id = node.attribute("id")) c.id = *id;
    read_attributes(node, c.id, c.attributes, &c.name);
    out_.model.components.push_back(std::move(c));
  }

  void read_edge(const xml::Element& edge) {
    Connection e;
    if (const auto* id = edge.attribute("id")) e.id = *id;
    if (const auto* s = edge.attribute("source")) e.source = *s;
    if (const auto* t = edge.attribute("target")) e.target = *t;
    read_attributes(edge, e.id, e.attributes, nullptr);
    out_.model.connections.push_back(std::move(e));
  }

  void warn(std::string code, std::string message) {
    out_.warnings.push_back({std::move(code), std::move(message)});
  }

  ParsedModel out_;
  std::set<std::string> declared_;
  std::set<std::string> undeclared_;
};

std::vector<Attribute> sorted(std::vector<Attribute> attrs) {
  std::sort(attrs.begin(), attrs.end(), [](const auto& a, const auto& b) {
    return std::tie(a.key, a.value) < std::tie(b.key, b.value);
  });
  return attrs;
}

void write_data(std::ostream& os, std::string_view indent,
                std::string_view key, std::string_view value) {
  os << indent << "<data key=\"" << xml::escape(key) << "\">"
     << xml::escape(value) << "</data>\n";
}

}  // namespace

ParsedModel parse_model(std::string_view document) {
  auto root = xml::parse(document);
  return ModelReader{}.read(*root);
}

std::string serialize_model(const SystemModel& model) {
  std::set<std::string> attr_keys;
  for (const auto& c : model.components) {
    for (const auto& a : c.attributes) attr_keys.insert(a.key);
  }
  for (const auto& e : model.connections) {
    for (const auto& a : e.attributes) attr_keys.insert(a.key);
  }

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
     << "  <key id=\"name\" for=\"node\" attr.name=\"name\" "
        "attr.type=\"string\"/>\n";
  for (const auto& k : attr_keys) {
    os << "  <key id=\"attr:" << xml::escape(k)
       << "\" for=\"all\" attr.name=\"" << xml::escape(k)
       << "\" attr.type=\"string\"/>\n";
  }
  for (const auto& [k, v] : model.metadata) {
    os << "  <key id=\"meta:" << xml::escape(k)
       << "\" for=\"graph\" attr.name=\"" << xml::escape(k)
       << "\" attr.type=\"string\"/>\n";
  }

  os << "  <graph id=\"" << xml::escape(model.id) << "\" edgedefault=\"directed\"";
  if (model.metadata.empty() && model.components.empty() &&
      model.connections.empty()) {
    os << "/>\n</graphml>\n";
    return os.str();
  }
  os << ">\n";
  for (const auto& [k, v] : model.metadata) {
    write_data(os, "    ", std::string(kMetaPrefix) + k, v);
  }

  auto components = model.components;
  std::stable_sort(components.begin(), components.end(),
                   [](const auto& a, const auto& b) { return a.id < b.id; });
  for (const auto& c : components) {
    os << "    <node id=\"" << xml::escape(c.id) << "\">\n";
    write_data(os, "      ", kNameKey, c.name);
    for (const auto& a : sorted(c.attributes)) {
      write_data(os, "      ", std::string(kAttrPrefix) + a.key, a.value);
    }
    os << "    </node>\n";
  }

  auto connections = model.connections;
  std::stable_sort(connections.begin(), connections.end(),
                   [](const auto& a, const auto& b) { return a.id < b.id; });
  for (const auto& e : connections) {
    os << "    <edge id=\"" << xml::escape(e.id) << "\" source=\""
       << xml::escape(e.source) << "\" target=\"" << xml::escape(e.target)
       << "\"";
    if (e.attributes.empty()) {
      os << "/>\n";
      continue;
    }
    os << ">\n";
    for (const auto& a : sorted(e.attributes)) {
      write_data(os, "      ", std::string(kAttrPrefix) + a.key, a.value);
    }
    os << "    </edge>\n";
  }
  os << "  </graph>\n</graphml>\n";
  return os.str();
}

}  // namespace cpsec
