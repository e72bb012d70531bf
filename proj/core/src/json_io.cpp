#include "cpsec/json_io.hpp"

namespace cpsec::json_io {
namespace {

[[noreturn]] void bad(const std::string& what) {
  throw Error(ErrorCode::kBadRequest, what);
}

const json& field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) bad(std::string("missing field '") + name + "'");
  return *it;
}

std::string string_field(const json& j, const char* name) {
  const auto& v = field(j, name);
  if (!v.is_string()) bad(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

std::set<DocumentKind> kinds_from(const json& j) {
  if (!j.is_array()) bad("'kinds' must be an array");
  std::set<DocumentKind> out;
  for (const auto& k : j) {
    auto kind = k.is_string() ? parse_kind(k.get<std::string>()) : std::nullopt;
    if (!kind) throw Error(ErrorCode::kConfig, "unknown kind " + k.dump());
    out.insert(*kind);
  }
  return out;
}

std::size_t non_negative_int(const json& j, const char* name) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw Error(ErrorCode::kConfig,
                std::string("'") + name + "' must be a non-negative integer");
  }
  return j.get<std::size_t>();
}

OwnerScope scope_from(const std::string& s) {
  if (s == "component") return OwnerScope::kComponent;
  if (s == "connection") return OwnerScope::kConnection;
  bad("unknown scope '" + s + "'");
}

std::vector<Attribute> attributes_from(const json& j) {
  std::vector<Attribute> out;
  if (j.is_null()) return out;
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (!v.is_string()) bad("attribute values must be strings");
      out.push_back({k, v.get<std::string>()});
    }
  } else if (j.is_array()) {
    for (const auto& a : j) out.push_back({string_field(a, "key"), string_field(a, "value")});
  } else {
    bad("'attributes' must be an object or an array");
  }
  return out;
}

json attributes_to_json(const std::vector<Attribute>& attrs) {
  json out = json::array();
  for (const auto& a : attrs) out.push_back({{"key", a.key}, {"value", a.value}});
  return out;
}

OwnerRef owner_from(const json& j) {
  if (j.contains("component")) {
    return {OwnerScope::kComponent, string_field(j, "component")};
  }
  if (j.contains("connection")) {
    return {OwnerScope::kConnection, string_field(j, "connection")};
  }
  bad("attribute mutation needs 'component' or 'connection'");
}

json attribute_ref_fields(const AttributeRef& ref) {
  return {{"scope", to_string(ref.owner.scope)},
          {"owner", ref.owner.id},
          {"key", ref.key}};
}

json attribute_set_diff(const AttributeSetDiff& d) {
  json added = json::object();
  for (const auto& a : d.added) added[a.key] = a.value;
  json changed = json::object();
  for (const auto& c : d.changed) {
    changed[c.key] = {{"before", c.before}, {"after", c.after}};
  }
  json out = {{"added", added}, {"removed", d.removed}, {"changed", changed}};
  if (d.new_name) out["name"] = *d.new_name;
  return out;
}

}  // namespace

json to_json(const AssociationConfig& config) {
  json kinds = json::array();
  for (auto k : config.kinds) kinds.push_back(to_string(k));
  return {{"top_k", config.top_k},
          {"threshold", config.threshold},
          {"crossref_depth", config.crossref_depth},
          {"kinds", kinds}};
}

AssociationConfig config_from_json(const json& j) {
  AssociationConfig config;
  if (j.is_null()) return config;
  if (!j.is_object()) bad("config must be a JSON object");
  if (auto it = j.find("top_k"); it != j.end()) {
    config.top_k = non_negative_int(*it, "top_k");
  }
  if (auto it = j.find("threshold"); it != j.end()) {
    if (!it->is_number()) throw Error(ErrorCode::kConfig, "'threshold' must be a number");
    config.threshold = it->get<double>();
  }
  if (auto it = j.find("crossref_depth"); it != j.end()) {
    config.crossref_depth = non_negative_int(*it, "crossref_depth");
  }
  if (auto it = j.find("kinds"); it != j.end()) config.kinds = kinds_from(*it);
  validate_config(config);
  return config;
}

json to_json(const Match& m) {
  return {{"id", m.doc_id},
          {"score", m.score},
          {"matched_terms", m.matched_terms},
          {"via", m.via ? json(*m.via) : json(nullptr)}};
}

json to_json(const AttackSurface& surface) {
  json attrs = json::array();
  for (const auto& [ref, matches] : surface.per_attribute) {
    json entry = attribute_ref_fields(ref);
    json list = json::array();
    for (const auto& m : matches) list.push_back(to_json(m));
    entry["matches"] = std::move(list);
    attrs.push_back(std::move(entry));
  }
  return {{"model_id", surface.model_id},
          {"corpus_stamp", surface.corpus_stamp},
          {"config", to_json(surface.config)},
          {"attributes", attrs}};
}

AttackSurface surface_from_json(const json& j) {
  if (!j.is_object()) bad("surface must be a JSON object");
  AttackSurface s;
  s.model_id = string_field(j, "model_id");
  s.corpus_stamp = string_field(j, "corpus_stamp");
  s.config = config_from_json(field(j, "config"));
  const auto& attrs = field(j, "attributes");
  if (!attrs.is_array()) bad("'attributes' must be an array");
  for (const auto& a : attrs) {
    AttributeRef ref{{scope_from(string_field(a, "scope")), string_field(a, "owner")},
                     string_field(a, "key")};
    std::vector<Match> list;
    const auto& matches = field(a, "matches");
    if (!matches.is_array()) bad("'matches' must be an array");
    for (const auto& m : matches) {
      Match match;
      match.doc_id = string_field(m, "id");
      const auto& score = field(m, "score");
      if (!score.is_number()) bad("'score' must be a number");
      match.score = score.get<double>();
      if (auto t = m.find("matched_terms"); t != m.end()) {
        if (!t->is_array()) bad("'matched_terms' must be an array");
        for (const auto& term : *t) {
          if (!term.is_string()) bad("matched terms must be strings");
          match.matched_terms.insert(term.get<std::string>());
        }
      }
      if (auto v = m.find("via"); v != m.end() && !v->is_null()) {
        if (!v->is_string()) bad("'via' must be a string or null");
        match.via = v->get<std::string>();
      }
      list.push_back(std::move(match));
    }
    if (!s.per_attribute.emplace(ref, std::move(list)).second) {
      bad("attribute " + to_string(ref) + " listed twice");
    }
  }
  return s;
}

json to_json(const ExposureReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    json row = attribute_ref_fields(r.attribute);
    row["attack_patterns"] = r.counts.attack_patterns;
    row["weaknesses"] = r.counts.weaknesses;
    row["vulnerabilities"] = r.counts.vulnerabilities;
    row["total"] = r.counts.total();
    rows.push_back(std::move(row));
  }
  return {{"model_id", report.model_id},
          {"config", to_json(report.config)},
          {"rows", rows}};
}

json to_json(const SurfaceDiff& diff) {
  json attrs = json::array();
  for (const auto& [ref, d] : diff.per_attribute) {
    json entry = attribute_ref_fields(ref);
    entry["added"] = d.added;
    entry["removed"] = d.removed;
    attrs.push_back(std::move(entry));
  }
  json owners = json::array();
  for (const auto& [owner, delta] : diff.per_component_delta) {
    owners.push_back(
        {{"scope", to_string(owner.scope)}, {"owner", owner.id}, {"delta", delta}});
  }
  return {{"empty", diff.empty()},
          {"net_delta", diff.net_delta},
          {"per_component", owners},
          {"attributes", attrs}};
}

json to_json(const std::map<SeverityBand, std::vector<SeverityEntry>>& view) {
  json out = json::object();
  for (const auto& [band, entries] : view) {
    json list = json::array();
    for (const auto& e : entries) {
      json item = attribute_ref_fields(e.attribute);
      item["id"] = e.doc_id;
      list.push_back(std::move(item));
    }
    out[std::string(to_string(band))] = std::move(list);
  }
  return out;
}

json to_json(const SystemModel& model) {
  json components = json::array();
  for (const auto& c : model.components) {
    components.push_back({{"id", c.id},
                          {"name", c.name},
                          {"attributes", attributes_to_json(c.attributes)}});
  }
  json connections = json::array();
  for (const auto& e : model.connections) {
    connections.push_back({{"id", e.id},
                           {"source", e.source},
                           {"target", e.target},
                           {"attributes", attributes_to_json(e.attributes)}});
  }
  return {{"id", model.id},
          {"metadata", model.metadata},
          {"components", components},
          {"connections", connections}};
}

json to_json(const ModelDiff& diff) {
  json added_components = json::array();
  for (const auto& c : diff.added_components) added_components.push_back(c.id);
  json added_connections = json::array();
  for (const auto& e : diff.added_connections) added_connections.push_back(e.id);
  json changed_components = json::object();
  for (const auto& [id, d] : diff.changed_components) {
    changed_components[id] = attribute_set_diff(d);
  }
  json changed_connections = json::object();
  for (const auto& [id, d] : diff.changed_connections) {
    changed_connections[id] = attribute_set_diff(d);
  }
  json metadata = json::object();
  for (const auto& [k, v] : diff.changed_metadata) {
    metadata[k] = v ? json(*v) : json(nullptr);
  }
  return {{"empty", diff.empty()},
          {"added_components", added_components},
          {"removed_components", diff.removed_components},
          {"changed_components", changed_components},
          {"added_connections", added_connections},
          {"removed_connections", diff.removed_connections},
          {"changed_connections", changed_connections},
          {"changed_metadata", metadata}};
}

json to_json(const Violation& v) {
  return {{"code", to_string(v.code)}, {"subject", v.subject}, {"message", v.message}};
}

json to_json(const Warning& w) {
  return {{"code", w.code}, {"message", w.message}};
}

Mutation mutation_from_json(const json& j) {
  if (!j.is_object()) bad("mutation must be a JSON object");
  auto op = string_field(j, "op");
  if (op == "add_component") {
    return mutation::AddComponent{Component{
        string_field(j, "id"), string_field(j, "name"),
        attributes_from(j.value("attributes", json(nullptr)))}};
  }
  if (op == "remove_component") {
    return mutation::RemoveComponent{string_field(j, "id")};
  }
  if (op == "add_connection") {
    return mutation::AddConnection{Connection{
        string_field(j, "id"), string_field(j, "source"),
        string_field(j, "target"),
        attributes_from(j.value("attributes", json(nullptr)))}};
  }
  if (op == "remove_connection") {
    return mutation::RemoveConnection{string_field(j, "id")};
  }
  if (op == "set_attribute") {
    return mutation::SetAttribute{
        owner_from(j), {string_field(j, "key"), string_field(j, "value")}};
  }
  if (op == "remove_attribute") {
    return mutation::RemoveAttribute{owner_from(j), string_field(j, "key")};
  }
  bad("unknown mutation op '" + op + "'");
}

std::vector<Mutation> mutations_from_json(const json& j) {
  const json* list = &j;
  if (j.is_object()) list = &field(j, "mutations");
  if (!list->is_array()) bad("mutations must be an array");
  std::vector<Mutation> out;
  for (const auto& m : *list) out.push_back(mutation_from_json(m));
  return out;
}

FilterSpec filter_from_json(const json& j) {
  if (!j.is_object()) bad("filter must be a JSON object");
  FilterSpec spec;
  if (auto it = j.find("kinds"); it != j.end()) spec.include_kinds = kinds_from(*it);
  if (auto it = j.find("keyword"); it != j.end()) {
    if (!it->is_string()) bad("'keyword' must be a string");
    spec.keyword = it->get<std::string>();
  }
  if (auto it = j.find("min_severity"); it != j.end()) {
    auto band = it->is_string() ? parse_band(it->get<std::string>()) : std::nullopt;
    if (!band) throw Error(ErrorCode::kConfig, "unknown severity band " + it->dump());
    spec.min_severity = band;
  }
  if (auto it = j.find("components"); it != j.end()) {
    if (!it->is_array()) bad("'components' must be an array");
    std::set<std::string> ids;
    for (const auto& c : *it) {
      if (!c.is_string()) bad("component ids must be strings");
      ids.insert(c.get<std::string>());
    }
    spec.component_ids = std::move(ids);
  }
  return spec;
}

}  // namespace cpsec::json_io
