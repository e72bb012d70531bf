#include <algorithm>
#include <cctype>
#include <functional>
#include <set>

#include <nlohmann/json.hpp>

#include "cpsec/corpus.hpp"
#include "xml_dom.hpp"

namespace cpsec {
namespace {

using nlohmann::json;

constexpr std::size_t kMaxDerivedTitle = 120;

void collect_named(const xml::Element& e, std::string_view name,
                   std::vector<const xml::Element*>& out) {
  for (const auto& c : e.children) {
    if (c->name == name) {
      out.push_back(c.get());
    } else {
      collect_named(*c, name, out);
    }
  }
}

/// Strips an optional "CAPEC-"/"CWE-" prefix; returns "" for non-numeric ids.
std::string numeric_id(std::string_view raw, std::string_view prefix) {
  std::string s = xml::collapse_whitespace(raw);
  if (std::string_view(s).starts_with(prefix)) s.erase(0, prefix.size());
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isdigit(c);
      })) {
    return "";
  }
  return s;
}

std::string join_sections(const xml::Element& entry,
                          std::initializer_list<std::string_view> sections) {
  std::string out;
  for (auto name : sections) {
    if (const auto* s = entry.child(name)) {
      auto text = s->deep_text();
      if (text.empty()) continue;
      if (!out.empty()) out += ' ';
      out += text;
    }
  }
  return out;
}

std::optional<SeverityLabel> native_severity(const xml::Element& entry,
                                             const std::string& id,
                                             std::vector<Warning>& warnings) {
  const auto* sev = entry.child("Typical_Severity");
  if (!sev) return std::nullopt;
  auto text = xml::collapse_whitespace(sev->text);
  SeverityBand band;
  if (text == "Very Low" || text == "Low") {
    band = SeverityBand::kLow;
  } else if (text == "Medium") {
    band = SeverityBand::kMedium;
  } else if (text == "High") {
    band = SeverityBand::kHigh;
  } else if (text == "Very High") {
    band = SeverityBand::kCritical;
  } else {
    warnings.push_back({"UNKNOWN_SEVERITY",
                        id + ": unrecognized severity '" + text + "' dropped"});
    return std::nullopt;
  }
  return SeverityLabel{SeverityScheme::kCorpusNative, band, std::nullopt};
}

struct CatalogSpec {
  std::string_view entry_element;
  DocumentKind kind;
  std::initializer_list<std::string_view> extra_sections;
  std::function<void(const xml::Element&, AttackVectorDocument&,
                     std::vector<Warning>&)>
      collect_refs;
};

Parsed<std::vector<AttackVectorDocument>> parse_catalog(
    std::string_view document, const CatalogSpec& spec) {
  auto root = xml::parse(document);
  Parsed<std::vector<AttackVectorDocument>> out;
  std::set<std::string> seen;
  const std::string prefix(id_prefix(spec.kind));

  std::vector<const xml::Element*> entries;
  if (root->name == spec.entry_element) {
    entries.push_back(root.get());
  } else {
    collect_named(*root, spec.entry_element, entries);
  }

  for (const auto* entry : entries) {
    auto where = " (line " + std::to_string(entry->position.line) + ")";
    const auto* raw_id = entry->attribute("ID");
    std::string num = raw_id ? numeric_id(*raw_id, prefix) : "";
    if (num.empty()) {
      out.warnings.push_back(
          {"MISSING_ID", std::string(spec.entry_element) +
                             " without a usable ID skipped" + where});
      continue;
    }
    AttackVectorDocument doc;
    doc.id = prefix + num;
    doc.kind = spec.kind;
    if (const auto* status = entry->attribute("Status");
        status && *status == "Deprecated") {
      out.warnings.push_back({"DEPRECATED", doc.id + " is deprecated; skipped"});
      continue;
    }
    const auto* name = entry->attribute("Name");
    doc.title = name ? xml::collapse_whitespace(*name) : "";
    if (doc.title.empty()) {
      out.warnings.push_back({"MISSING_NAME", doc.id + " has no Name; skipped"});
      continue;
    }
    if (const auto* d = entry->child("Description")) doc.description = d->deep_text();
    if (doc.description.empty()) {
      out.warnings.push_back(
          {"MISSING_DESCRIPTION", doc.id + " has no Description; skipped"});
      continue;
    }
    if (!seen.insert(doc.id).second) {
      out.warnings.push_back(
          {"DUPLICATE_ID", "duplicate " + doc.id + " skipped" + where});
      continue;
    }
    if (auto extra = join_sections(*entry, spec.extra_sections); !extra.empty()) {
      doc.extra_text = std::move(extra);
    }
    doc.severity = native_severity(*entry, doc.id, out.warnings);
    spec.collect_refs(*entry, doc, out.warnings);
    doc.cross_refs.erase(doc.id);
    out.value.push_back(std::move(doc));
  }
  return out;
}

void add_numeric_refs(const xml::Element& entry, std::string_view container,
                      std::string_view element, std::string_view attribute,
                      std::string_view prefix, AttackVectorDocument& doc,
                      std::vector<Warning>& warnings) {
  const auto* list = entry.child(container);
  if (!list) return;
  for (const auto* ref : list->children_named(element)) {
    const auto* raw = ref->attribute(attribute);
    auto num = raw ? numeric_id(*raw, prefix) : "";
    if (num.empty()) {
      warnings.push_back({"BAD_REFERENCE", doc.id + ": unusable " +
                                               std::string(element) + " ignored"});
      continue;
    }
    doc.cross_refs.insert(std::string(prefix) + num);
  }
}

// ---------------------------------------------------------------------------
// NVD JSON

const json* path(const json& root, std::initializer_list<std::string_view> keys) {
  const json* node = &root;
  for (auto k : keys) {
    if (!node->is_object()) return nullptr;
    auto it = node->find(k);
    if (it == node->end()) return nullptr;
    node = &*it;
  }
  return node;
}

std::string english_text(const json* list) {
  if (!list || !list->is_array()) return "";
  std::string fallback;
  for (const auto& d : *list) {
    const auto* value = path(d, {"value"});
    if (!value || !value->is_string()) continue;
    const auto* lang = path(d, {"lang"});
    if (lang && lang->is_string() && lang->get<std::string>() == "en") {
      return value->get<std::string>();
    }
    if (fallback.empty()) fallback = value->get<std::string>();
  }
  return fallback;
}

std::optional<double> number_at(const json* node) {
  if (node && node->is_number()) return node->get<double>();
  return std::nullopt;
}

std::optional<double> first_metric_score(const json& metrics,
                                         std::string_view key) {
  const auto* list = path(metrics, {key});
  if (!list || !list->is_array() || list->empty()) return std::nullopt;
  return number_at(path((*list)[0], {"cvssData", "baseScore"}));
}

void add_cwe_value(const json& value, AttackVectorDocument& doc) {
  std::string s;
  if (value.is_number_integer()) {
    s = std::to_string(value.get<long long>());
  } else if (value.is_string()) {
    s = value.get<std::string>();
  } else {
    return;
  }
  auto num = numeric_id(s, "CWE-");
  if (!num.empty()) doc.cross_refs.insert("CWE-" + num);
}

void add_problem_types(const json* list, AttackVectorDocument& doc) {
  if (!list || !list->is_array()) return;
  for (const auto& pt : *list) {
    const auto* descs = path(pt, {"description"});
    if (!descs || !descs->is_array()) continue;
    for (const auto& d : *descs) {
      if (const auto* v = path(d, {"value"})) add_cwe_value(*v, doc);
    }
  }
}

std::string derived_title(const std::string& description) {
  auto cut = description.find(". ");
  std::string title = description.substr(0, cut);
  if (title.size() > kMaxDerivedTitle) {
    auto space = title.rfind(' ', kMaxDerivedTitle);
    title.resize(space == std::string::npos || space == 0 ? kMaxDerivedTitle
                                                          : space);
  }
  while (!title.empty() && (title.back() == '.' || title.back() == ' ')) {
    title.pop_back();
  }
  return title;
}

struct RawVulnerability {
  std::string id;
  std::string title;
  std::string description;
  std::optional<double> v3;
  std::optional<double> v2;
  bool rejected = false;
};

void finish_vulnerability(RawVulnerability raw, AttackVectorDocument doc,
                          Parsed<std::vector<AttackVectorDocument>>& out,
                          std::set<std::string>& seen) {
  raw.description = xml::collapse_whitespace(raw.description);
  if (raw.id.empty() || !raw.id.starts_with("CVE-") || raw.id.size() <= 4) {
    out.warnings.push_back({"MISSING_ID", "entry without a CVE id skipped"});
    return;
  }
  if (raw.rejected || raw.description.empty() ||
      raw.description.starts_with("** REJECT **")) {
    out.warnings.push_back(
        {"REJECTED", raw.id + " is rejected or has no description; skipped"});
    return;
  }
  if (!seen.insert(raw.id).second) {
    out.warnings.push_back({"DUPLICATE_ID", "duplicate " + raw.id + " skipped"});
    return;
  }
  doc.id = raw.id;
  doc.kind = DocumentKind::kVulnerability;
  doc.description = raw.description;
  doc.title = raw.title.empty() ? derived_title(raw.description)
                                : xml::collapse_whitespace(raw.title);
  try {
    if (raw.v3) {
      doc.severity = cvss_label(SeverityScheme::kCvssV3, *raw.v3);
    } else if (raw.v2) {
      doc.severity = cvss_label(SeverityScheme::kCvssV2, *raw.v2);
    }
  } catch (const Error& e) {
    out.warnings.push_back({"BAD_SCORE", raw.id + ": " + e.what()});
  }
  doc.cross_refs.erase(doc.id);
  out.value.push_back(std::move(doc));
}

void parse_feed_item(const json& item,
                     Parsed<std::vector<AttackVectorDocument>>& out,
                     std::set<std::string>& seen) {
  RawVulnerability raw;
  AttackVectorDocument doc;
  if (const auto* id = path(item, {"cve", "CVE_data_meta", "ID"});
      id && id->is_string()) {
    raw.id = id->get<std::string>();
  }
  raw.description = english_text(path(item, {"cve", "description", "description_data"}));
  raw.v3 = number_at(path(item, {"impact", "baseMetricV3", "cvssV3", "baseScore"}));
  raw.v2 = number_at(path(item, {"impact", "baseMetricV2", "cvssV2", "baseScore"}));
  add_problem_types(path(item, {"cve", "problemtype", "problemtype_data"}), doc);
  finish_vulnerability(std::move(raw), std::move(doc), out, seen);
}

void parse_api_item(const json& item,
                    Parsed<std::vector<AttackVectorDocument>>& out,
                    std::set<std::string>& seen) {
  const json* cve = path(item, {"cve"});
  if (!cve) cve = &item;
  RawVulnerability raw;
  AttackVectorDocument doc;
  if (const auto* id = path(*cve, {"id"}); id && id->is_string()) {
    raw.id = id->get<std::string>();
  }
  if (const auto* status = path(*cve, {"vulnStatus"});
      status && status->is_string() && status->get<std::string>() == "Rejected") {
    raw.rejected = true;
  }
  raw.description = english_text(path(*cve, {"descriptions"}));
  if (const auto* metrics = path(*cve, {"metrics"})) {
    raw.v3 = first_metric_score(*metrics, "cvssMetricV31");
    if (!raw.v3) raw.v3 = first_metric_score(*metrics, "cvssMetricV30");
    raw.v2 = first_metric_score(*metrics, "cvssMetricV2");
  }
  add_problem_types(path(*cve, {"weaknesses"}), doc);
  finish_vulnerability(std::move(raw), std::move(doc), out, seen);
}

void parse_flat_item(const json& item,
                     Parsed<std::vector<AttackVectorDocument>>& out,
                     std::set<std::string>& seen) {
  if (!item.is_object()) {
    out.warnings.push_back({"BAD_ENTRY", "non-object entry skipped"});
    return;
  }
  RawVulnerability raw;
  AttackVectorDocument doc;
  auto str = [&](const char* key) {
    auto it = item.find(key);
    return it != item.end() && it->is_string() ? it->get<std::string>()
                                               : std::string();
  };
  raw.id = str("id");
  raw.title = str("title");
  raw.description = str("description");
  raw.rejected = str("status") == "Rejected";
  raw.v3 = number_at(path(item, {"cvssV3"}));
  raw.v2 = number_at(path(item, {"cvssV2"}));
  if (auto it = item.find("cwe"); it != item.end()) {
    if (it->is_array()) {
      for (const auto& v : *it) add_cwe_value(v, doc);
    } else {
      add_cwe_value(*it, doc);
    }
  }
  finish_vulnerability(std::move(raw), std::move(doc), out, seen);
}

SourcePosition position_of_byte(std::string_view text, std::size_t byte) {
  SourcePosition pos{1, 1};
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++pos.line;
      pos.column = 1;
    } else {
      ++pos.column;
    }
  }
  return pos;
}

}  // namespace

Parsed<std::vector<AttackVectorDocument>> parse_attack_patterns(
    std::string_view document) {
  return parse_catalog(
      document,
      {"Attack_Pattern",
       DocumentKind::kAttackPattern,
       {"Extended_Description", "Prerequisites", "Consequences", "Mitigations"},
       [](const xml::Element& entry, AttackVectorDocument& doc,
          std::vector<Warning>& warnings) {
         add_numeric_refs(entry, "Related_Weaknesses", "Related_Weakness",
                          "CWE_ID", "CWE-", doc, warnings);
       }});
}

Parsed<std::vector<AttackVectorDocument>> parse_weaknesses(
    std::string_view document) {
  return parse_catalog(
      document,
      {"Weakness",
       DocumentKind::kWeakness,
       {"Extended_Description", "Common_Consequences", "Potential_Mitigations"},
       [](const xml::Element& entry, AttackVectorDocument& doc,
          std::vector<Warning>& warnings) {
         add_numeric_refs(entry, "Related_Attack_Patterns",
                          "Related_Attack_Pattern", "CAPEC_ID", "CAPEC-", doc,
                          warnings);
         const auto* examples = entry.child("Observed_Examples");
         if (!examples) return;
         for (const auto* ex : examples->children_named("Observed_Example")) {
           const auto* ref = ex->child("Reference");
           auto id = ref ? xml::collapse_whitespace(ref->text) : "";
           if (id.starts_with("CVE-") && id.size() > 4) {
             doc.cross_refs.insert(id);
           } else {
             warnings.push_back(
                 {"BAD_REFERENCE", doc.id + ": observed example without a "
                                            "CVE reference ignored"});
           }
         }
       }});
}

Parsed<std::vector<AttackVectorDocument>> parse_vulnerabilities(
    std::string_view document) {
  json root;
  try {
    root = json::parse(document);
  } catch (const json::parse_error& e) {
    auto pos = position_of_byte(document, e.byte > 0 ? e.byte - 1 : 0);
    throw Error(ErrorCode::kParse,
                "malformed JSON at line " + std::to_string(pos.line) +
                    ", column " + std::to_string(pos.column),
                {e.what()}, pos);
  }
  Parsed<std::vector<AttackVectorDocument>> out;
  std::set<std::string> seen;
  if (root.is_array()) {
    for (const auto& item : root) parse_flat_item(item, out, seen);
  } else if (const auto* items = path(root, {"CVE_Items"}); items && items->is_array()) {
    for (const auto& item : *items) parse_feed_item(item, out, seen);
  } else if (const auto* vulns = path(root, {"vulnerabilities"});
             vulns && vulns->is_array()) {
    for (const auto& item : *vulns) parse_api_item(item, out, seen);
  } else {
    throw Error(ErrorCode::kParse,
                "unrecognized vulnerability feed: expected an array, "
                "CVE_Items, or vulnerabilities");
  }
  return out;
}

}  // namespace cpsec
