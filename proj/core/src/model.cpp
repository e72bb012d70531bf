#include "cpsec/model.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace cpsec {
namespace {

template <typename Range>
const Attribute* find_in(const Range& attributes, std::string_view key) {
  for (const auto& a : attributes) {
    if (a.key == key) return &a;
  }
  return nullptr;
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

std::vector<Attribute> sorted_attributes(std::vector<Attribute> attrs) {
  std::sort(attrs.begin(), attrs.end(), [](const auto& a, const auto& b) {
    return std::tie(a.key, a.value) < std::tie(b.key, b.value);
  });
  return attrs;
}

template <typename T>
std::vector<const T*> sorted_by_id(const std::vector<T>& items) {
  std::vector<const T*> out;
  out.reserve(items.size());
  for (const auto& i : items) out.push_back(&i);
  std::stable_sort(out.begin(), out.end(),
                   [](const T* a, const T* b) { return a->id < b->id; });
  return out;
}

void check_attributes(const std::vector<Attribute>& attrs,
                      const std::string& owner, std::vector<Violation>& out) {
  std::set<std::string> seen;
  std::set<std::string> reported;
  for (const auto& a : attrs) {
    if (a.key.empty()) {
      out.push_back({ViolationCode::kEmptyAttributeKey, owner,
                     "attribute with empty key on '" + owner + "'"});
      continue;
    }
    if (blank(a.value)) {
      out.push_back({ViolationCode::kEmptyAttributeValue, owner,
                     "attribute '" + a.key + "' on '" + owner +
                         "' has an empty value"});
    }
    if (!seen.insert(a.key).second && reported.insert(a.key).second) {
      out.push_back({ViolationCode::kDuplicateAttributeKey, owner,
                     "attribute key '" + a.key + "' repeated on '" + owner +
                         "'"});
    }
  }
}

template <typename T>
void check_ids(const std::vector<T>& items, std::string_view what,
               std::vector<Violation>& out) {
  std::set<std::string> seen;
  std::set<std::string> reported;
  for (const auto& i : items) {
    if (i.id.empty()) {
      out.push_back({ViolationCode::kEmptyId, "",
                     std::string(what) + " with empty id"});
      continue;
    }
    if (!seen.insert(i.id).second && reported.insert(i.id).second) {
      out.push_back({ViolationCode::kDuplicateId, i.id,
                     std::string(what) + " id '" + i.id + "' is not unique"});
    }
  }
}

std::vector<Attribute>* attributes_of(SystemModel& model, const OwnerRef& owner) {
  if (owner.scope == OwnerScope::kComponent) {
    for (auto& c : model.components) {
      if (c.id == owner.id) return &c.attributes;
    }
  } else {
    for (auto& c : model.connections) {
      if (c.id == owner.id) return &c.attributes;
    }
  }
  return nullptr;
}

std::string owner_label(const OwnerRef& owner) {
  return std::string(to_string(owner.scope)) + " '" + owner.id + "'";
}

std::vector<std::string> violation_lines(const std::vector<Violation>& v) {
  std::vector<std::string> lines;
  for (const auto& x : v) {
    lines.push_back(std::string(to_string(x.code)) + " " + x.subject + ": " +
                    x.message);
  }
  return lines;
}

struct MutationVisitor {
  SystemModel& model;

  void operator()(const mutation::AddComponent& m) {
    if (model.find_component(m.component.id)) {
      throw Error(ErrorCode::kConflict,
                  "component '" + m.component.id + "' already exists",
                  {m.component.id});
    }
    model.components.push_back(m.component);
  }

  void operator()(const mutation::RemoveComponent& m) {
    auto it = std::find_if(model.components.begin(), model.components.end(),
                           [&](const Component& c) { return c.id == m.id; });
    if (it == model.components.end()) {
      throw Error(ErrorCode::kNotFound, "no component '" + m.id + "'", {m.id});
    }
    auto touching = model.connections_touching(m.id);
    if (!touching.empty()) {
      throw Error(ErrorCode::kConflict,
                  "component '" + m.id + "' still has connections", touching);
    }
    model.components.erase(it);
  }

  void operator()(const mutation::AddConnection& m) {
    if (model.find_connection(m.connection.id)) {
      throw Error(ErrorCode::kConflict,
                  "connection '" + m.connection.id + "' already exists",
                  {m.connection.id});
    }
    model.connections.push_back(m.connection);
  }

  void operator()(const mutation::RemoveConnection& m) {
    auto it = std::find_if(model.connections.begin(), model.connections.end(),
                           [&](const Connection& c) { return c.id == m.id; });
    if (it == model.connections.end()) {
      throw Error(ErrorCode::kNotFound, "no connection '" + m.id + "'", {m.id});
    }
    model.connections.erase(it);
  }

  void operator()(const mutation::SetAttribute& m) {
    auto* attrs = attributes_of(model, m.owner);
    if (!attrs) {
      throw Error(ErrorCode::kNotFound, "no " + owner_label(m.owner),
                  {m.owner.id});
    }
    auto it = std::find_if(attrs->begin(), attrs->end(), [&](const Attribute& a) {
      return a.key == m.attribute.key;
    });
    if (it != attrs->end()) {
      it->value = m.attribute.value;
    } else {
      attrs->push_back(m.attribute);
    }
  }

  void operator()(const mutation::RemoveAttribute& m) {
    auto* attrs = attributes_of(model, m.owner);
    if (!attrs) {
      throw Error(ErrorCode::kNotFound, "no " + owner_label(m.owner),
                  {m.owner.id});
    }
    auto it = std::find_if(attrs->begin(), attrs->end(),
                           [&](const Attribute& a) { return a.key == m.key; });
    if (it == attrs->end()) {
      throw Error(ErrorCode::kNotFound,
                  "no attribute '" + m.key + "' on " + owner_label(m.owner),
                  {m.owner.id});
    }
    attrs->erase(it);
  }
};

AttributeSetDiff diff_attributes(const std::vector<Attribute>& before,
                                 const std::vector<Attribute>& after) {
  AttributeSetDiff d;
  for (const auto& a : sorted_attributes(after)) {
    const auto* old = find_in(before, a.key);
    if (!old) {
      d.added.push_back(a);
    } else if (old->value != a.value) {
      d.changed.push_back({a.key, old->value, a.value});
    }
  }
  for (const auto& b : sorted_attributes(before)) {
    if (!find_in(after, b.key)) d.removed.push_back(b.key);
  }
  return d;
}

void apply_attribute_diff(std::vector<Attribute>& attrs,
                          const AttributeSetDiff& d) {
  std::erase_if(attrs, [&](const Attribute& a) {
    return std::find(d.removed.begin(), d.removed.end(), a.key) !=
           d.removed.end();
  });
  for (const auto& c : d.changed) {
    for (auto& a : attrs) {
      if (a.key == c.key) a.value = c.after;
    }
  }
  attrs.insert(attrs.end(), d.added.begin(), d.added.end());
}

}  // namespace

const Attribute* Component::find_attribute(std::string_view key) const {
  return find_in(attributes, key);
}

const Attribute* Connection::find_attribute(std::string_view key) const {
  return find_in(attributes, key);
}

const Component* SystemModel::find_component(std::string_view cid) const {
  for (const auto& c : components) {
    if (c.id == cid) return &c;
  }
  return nullptr;
}

const Connection* SystemModel::find_connection(std::string_view cid) const {
  for (const auto& c : connections) {
    if (c.id == cid) return &c;
  }
  return nullptr;
}

std::vector<std::string> SystemModel::connections_touching(
    std::string_view component_id) const {
  std::vector<std::string> ids;
  for (const auto& c : connections) {
    if (c.source == component_id || c.target == component_id) {
      ids.push_back(c.id);
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

bool structurally_equal(const SystemModel& a, const SystemModel& b) {
  if (a.id != b.id || a.metadata != b.metadata ||
      a.components.size() != b.components.size() ||
      a.connections.size() != b.connections.size()) {
    return false;
  }
  auto ca = sorted_by_id(a.components);
  auto cb = sorted_by_id(b.components);
  for (std::size_t i = 0; i < ca.size(); ++i) {
    if (ca[i]->id != cb[i]->id || ca[i]->name != cb[i]->name ||
        sorted_attributes(ca[i]->attributes) !=
            sorted_attributes(cb[i]->attributes)) {
      return false;
    }
  }
  auto ea = sorted_by_id(a.connections);
  auto eb = sorted_by_id(b.connections);
  for (std::size_t i = 0; i < ea.size(); ++i) {
    if (ea[i]->id != eb[i]->id || ea[i]->source != eb[i]->source ||
        ea[i]->target != eb[i]->target ||
        sorted_attributes(ea[i]->attributes) !=
            sorted_attributes(eb[i]->attributes)) {
      return false;
    }
  }
  return true;
}

std::string_view to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::kEmptyId: return "EMPTY_ID";
    case ViolationCode::kDuplicateId: return "DUPLICATE_ID";
    case ViolationCode::kEmptyName: return "EMPTY_NAME";
    case ViolationCode::kEmptyEndpoint: return "EMPTY_ENDPOINT";
    case ViolationCode::kDanglingEndpoint: return "DANGLING_ENDPOINT";
    case ViolationCode::kEmptyAttributeKey: return "EMPTY_ATTRIBUTE_KEY";
    case ViolationCode::kEmptyAttributeValue: return "EMPTY_ATTRIBUTE_VALUE";
    case ViolationCode::kDuplicateAttributeKey: return "DUPLICATE_ATTRIBUTE_KEY";
  }
  return "UNKNOWN";
}

std::string_view to_string(OwnerScope scope) {
  return scope == OwnerScope::kComponent ? "component" : "connection";
}

std::vector<Violation> validate_model(const SystemModel& model) {
  std::vector<Violation> out;
  check_ids(model.components, "component", out);
  check_ids(model.connections, "connection", out);

  std::set<std::string> component_ids;
  for (const auto& c : model.components) {
    component_ids.insert(c.id);
    if (blank(c.name)) {
      out.push_back({ViolationCode::kEmptyName, c.id,
                     "component '" + c.id + "' has no name"});
    }
    check_attributes(c.attributes, c.id, out);
  }
  for (const auto& e : model.connections) {
    for (const auto* end : {&e.source, &e.target}) {
      const char* role = end == &e.source ? "source" : "target";
      if (end->empty()) {
        out.push_back({ViolationCode::kEmptyEndpoint, e.id,
                       "connection '" + e.id + "' has an empty " + role});
      } else if (!component_ids.contains(*end)) {
        out.push_back({ViolationCode::kDanglingEndpoint, e.id,
                       "connection '" + e.id + "' " + role +
                           " references unknown component '" + *end + "'"});
      }
    }
    check_attributes(e.attributes, e.id, out);
  }
  return out;
}

SystemModel apply_mutation(const SystemModel& model, const Mutation& m) {
  SystemModel next = model;
  std::visit(MutationVisitor{next}, m);
  if (auto violations = validate_model(next); !violations.empty()) {
    throw Error(ErrorCode::kConflict, "mutation would invalidate the model",
                violation_lines(violations));
  }
  return next;
}

SystemModel apply_mutations(const SystemModel& model,
                            const std::vector<Mutation>& batch) {
  SystemModel next = model;
  for (const auto& m : batch) next = apply_mutation(next, m);
  return next;
}

bool ModelDiff::empty() const {
  return added_components.empty() && removed_components.empty() &&
         changed_components.empty() && added_connections.empty() &&
         removed_connections.empty() && changed_connections.empty() &&
         changed_metadata.empty() && !new_model_id;
}

ModelDiff diff_models(const SystemModel& before, const SystemModel& after) {
  ModelDiff d;
  if (before.id != after.id) d.new_model_id = after.id;

  for (const auto& [k, v] : after.metadata) {
    auto it = before.metadata.find(k);
    if (it == before.metadata.end() || it->second != v) d.changed_metadata[k] = v;
  }
  for (const auto& [k, v] : before.metadata) {
    if (!after.metadata.contains(k)) d.changed_metadata[k] = std::nullopt;
  }

  for (const auto* c : sorted_by_id(after.components)) {
    const auto* old = before.find_component(c->id);
    if (!old) {
      d.added_components.push_back(*c);
      continue;
    }
    auto attrs = diff_attributes(old->attributes, c->attributes);
    if (old->name != c->name) attrs.new_name = c->name;
    if (!attrs.empty()) d.changed_components.emplace(c->id, std::move(attrs));
  }
  for (const auto* c : sorted_by_id(before.components)) {
    if (!after.find_component(c->id)) d.removed_components.push_back(c->id);
  }

  for (const auto* e : sorted_by_id(after.connections)) {
    const auto* old = before.find_connection(e->id);
    if (old && (old->source != e->source || old->target != e->target)) {
      d.removed_connections.push_back(e->id);
      old = nullptr;
    }
    if (!old) {
      d.added_connections.push_back(*e);
      continue;
    }
    auto attrs = diff_attributes(old->attributes, e->attributes);
    if (!attrs.empty()) d.changed_connections.emplace(e->id, std::move(attrs));
  }
  for (const auto* e : sorted_by_id(before.connections)) {
    if (!after.find_connection(e->id)) d.removed_connections.push_back(e->id);
  }
  std::sort(d.removed_connections.begin(), d.removed_connections.end());
  return d;
}

SystemModel apply_diff(const SystemModel& base, const ModelDiff& diff) {
  SystemModel out = base;
  if (diff.new_model_id) out.id = *diff.new_model_id;
  for (const auto& [k, v] : diff.changed_metadata) {
    if (v) {
      out.metadata[k] = *v;
    } else {
      out.metadata.erase(k);
    }
  }

  auto listed = [](const std::vector<std::string>& ids, const std::string& id) {
    return std::find(ids.begin(), ids.end(), id) != ids.end();
  };
  std::erase_if(out.connections, [&](const Connection& e) {
    return listed(diff.removed_connections, e.id);
  });
  std::erase_if(out.components, [&](const Component& c) {
    return listed(diff.removed_components, c.id);
  });
  for (auto& c : out.components) {
    if (auto it = diff.changed_components.find(c.id);
        it != diff.changed_components.end()) {
      apply_attribute_diff(c.attributes, it->second);
      if (it->second.new_name) c.name = *it->second.new_name;
    }
  }
  for (auto& e : out.connections) {
    if (auto it = diff.changed_connections.find(e.id);
        it != diff.changed_connections.end()) {
      apply_attribute_diff(e.attributes, it->second);
    }
  }
  out.components.insert(out.components.end(), diff.added_components.begin(),
                        diff.added_components.end());
  out.connections.insert(out.connections.end(), diff.added_connections.begin(),
                         diff.added_connections.end());
  return out;
}

}  // namespace cpsec
