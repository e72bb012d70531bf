#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cpsec/error.hpp"

namespace cpsec {

/// A free-text descriptor attached to a component or connection; the unit of
/// attack-vector association.
struct Attribute {
  std::string key;
  std::string value;

  bool operator==(const Attribute&) const = default;
};

struct Component {
  std::string id;
  std::string name;
  std::vector<Attribute> attributes;

  const Attribute* find_attribute(std::string_view key) const;
};

struct Connection {
  std::string id;
  std::string source;
  std::string target;
  std::vector<Attribute> attributes;

  const Attribute* find_attribute(std::string_view key) const;
};

/// Directed attributed graph of components and connections.
///
/// Components and connections are stored as sequences so that a model that
/// violates its invariants (duplicate ids, dangling endpoints) can still be
/// represented and reported by validate_model(). Values are never mutated in
/// place by the library; apply_mutation() returns a new model.
struct SystemModel {
  std::string id;
  std::vector<Component> components;
  std::vector<Connection> connections;
  std::map<std::string, std::string> metadata;

  const Component* find_component(std::string_view component_id) const;
  const Connection* find_connection(std::string_view connection_id) const;
  /// Connection ids whose source or target is `component_id`, sorted.
  std::vector<std::string> connections_touching(
      std::string_view component_id) const;
};

/// Structural equality: same id, metadata, component and connection sets by
/// id, and the same attribute multiset on each. Attribute order is ignored.
bool structurally_equal(const SystemModel& a, const SystemModel& b);

// ---------------------------------------------------------------------------
// Validation

enum class ViolationCode {
  kEmptyId,
  kDuplicateId,
  kEmptyName,
  kEmptyEndpoint,
  kDanglingEndpoint,
  kEmptyAttributeKey,
  kEmptyAttributeValue,
  kDuplicateAttributeKey,
};

std::string_view to_string(ViolationCode code);

struct Violation {
  ViolationCode code;
  /// Id of the offending component or connection.
  std::string subject;
  std::string message;

  bool operator==(const Violation&) const = default;
};

std::vector<Violation> validate_model(const SystemModel& model);

// ---------------------------------------------------------------------------
// Mutation

enum class OwnerScope { kComponent, kConnection };

std::string_view to_string(OwnerScope scope);

/// Names the component or connection an attribute belongs to.
struct OwnerRef {
  OwnerScope scope = OwnerScope::kComponent;
  std::string id;

  auto operator<=>(const OwnerRef&) const = default;
};

namespace mutation {
struct AddComponent { Component component; };
struct RemoveComponent { std::string id; };
struct AddConnection { Connection connection; };
struct RemoveConnection { std::string id; };
struct SetAttribute { OwnerRef owner; Attribute attribute; };
struct RemoveAttribute { OwnerRef owner; std::string key; };
}  // namespace mutation

using Mutation =
    std::variant<mutation::AddComponent, mutation::RemoveComponent,
                 mutation::AddConnection, mutation::RemoveConnection,
                 mutation::SetAttribute, mutation::RemoveAttribute>;

/// Returns a new model with `m` applied. Throws Error(kConflict) when the
/// result would violate an invariant (the detail lists offending ids) and
/// Error(kNotFound) when the mutation names an unknown component,
/// connection, or attribute. The input is never modified.
SystemModel apply_mutation(const SystemModel& model, const Mutation& m);

/// All-or-nothing application of a batch.
SystemModel apply_mutations(const SystemModel& model,
                            const std::vector<Mutation>& batch);

// ---------------------------------------------------------------------------
// Diff

struct AttributeChange {
  std::string key;
  std::string before;
  std::string after;

  bool operator==(const AttributeChange&) const = default;
};

struct AttributeSetDiff {
  std::vector<Attribute> added;
  std::vector<std::string> removed;
  std::vector<AttributeChange> changed;
  /// Set when the component was renamed.
  std::optional<std::string> new_name;

  bool empty() const {
    return added.empty() && removed.empty() && changed.empty() && !new_name;
  }
  bool operator==(const AttributeSetDiff&) const = default;
};

/// Structural change between two model versions, computed by id.
/// Added components and connections carry their full content so the diff can
/// be replayed with apply_diff(). A connection whose endpoints change is
/// reported as removed and re-added.
struct ModelDiff {
  std::vector<Component> added_components;
  std::vector<std::string> removed_components;
  std::map<std::string, AttributeSetDiff> changed_components;
  std::vector<Connection> added_connections;
  std::vector<std::string> removed_connections;
  std::map<std::string, AttributeSetDiff> changed_connections;
  /// key -> new value, or nullopt when the key was dropped.
  std::map<std::string, std::optional<std::string>> changed_metadata;
  std::optional<std::string> new_model_id;

  bool empty() const;
};

ModelDiff diff_models(const SystemModel& before, const SystemModel& after);

/// Replays `diff` on `base`. apply_diff(a, diff_models(a, b)) is
/// structurally equal to b.
SystemModel apply_diff(const SystemModel& base, const ModelDiff& diff);

}  // namespace cpsec
