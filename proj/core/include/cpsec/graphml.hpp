#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cpsec/error.hpp"
#include "cpsec/model.hpp"

namespace cpsec {

// GraphML subset exchanged with model exporters:
//
//   <graphml>
//     <key id="name" for="node" attr.name="name" attr.type="string"/>
//     <key id="attr:os" for="all" attr.name="os" attr.type="string"/>
//     <graph id="scada" edgedefault="directed">
//       <data key="meta:version">1</data>
//       <node id="ws"><data key="name">Programming WS</data>
//                     <data key="attr:os">Windows XP</data></node>
//       <edge id="e1" source="ws" target="fw"/>
//     </graph>
//   </graphml>
//
// Data keys outside `name`, `attr:*`, and graph-level `meta:*` are ignored
// with a warning. Every key used must be declared.

struct ParsedModel {
  SystemModel model;
  std::vector<Warning> warnings;
};

/// Throws Error(kParse) for malformed XML (with line/column) or documents
/// outside the subset, and Error(kValidation) when the model violates an
/// invariant; the detail lists one line per violation, naming the id.
ParsedModel parse_model(std::string_view document);

/// Deterministic: components, connections, attributes, and keys are emitted
/// in sorted order.
std::string serialize_model(const SystemModel& model);

}  // namespace cpsec
