#include "cpsec/corpus.hpp"

#include <cmath>
#include <deque>

#include <nlohmann/json.hpp>

#include "digest.hpp"

namespace cpsec {
namespace {

using nlohmann::json;

json severity_to_json(const std::optional<SeverityLabel>& s) {
  if (!s) return nullptr;
  json raw = s->raw_score ? json(*s->raw_score) : json(nullptr);
  return {{"scheme", to_string(s->scheme)},
          {"band", to_string(s->band)},
          {"raw", raw}};
}

[[noreturn]] void bad_line(std::size_t line, const std::string& why) {
  throw Error(ErrorCode::kParse,
              "snapshot line " + std::to_string(line) + ": " + why,
              {"line " + std::to_string(line) + ": " + why},
              SourcePosition{line, 1});
}

std::string required_string(const json& obj, const char* field,
                            std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end() || !it->is_string()) {
    bad_line(line, std::string("field '") + field + "' must be a string");
  }
  return it->get<std::string>();
}

AttackVectorDocument document_from_json(const json& obj, std::size_t line) {
  if (!obj.is_object()) bad_line(line, "expected a JSON object");
  AttackVectorDocument doc;
  doc.id = required_string(obj, "id", line);
  auto kind = parse_kind(required_string(obj, "kind", line));
  if (!kind) bad_line(line, "unknown kind");
  doc.kind = *kind;
  doc.title = required_string(obj, "title", line);
  doc.description = required_string(obj, "description", line);

  if (auto it = obj.find("extra_text"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) bad_line(line, "field 'extra_text' must be a string");
    doc.extra_text = it->get<std::string>();
  }
  if (auto it = obj.find("severity"); it != obj.end() && !it->is_null()) {
    if (!it->is_object()) bad_line(line, "field 'severity' must be an object");
    SeverityLabel label;
    auto scheme = parse_scheme(required_string(*it, "scheme", line));
    auto band = parse_band(required_string(*it, "band", line));
    if (!scheme || !band) bad_line(line, "unknown severity scheme or band");
    label.scheme = *scheme;
    label.band = *band;
    if (auto raw = it->find("raw"); raw != it->end() && !raw->is_null()) {
      if (!raw->is_number()) bad_line(line, "severity.raw must be a number");
      label.raw_score = raw->get<double>();
    }
    doc.severity = label;
  }
  auto refs = obj.find("cross_refs");
  if (refs == obj.end() || !refs->is_array()) {
    bad_line(line, "field 'cross_refs' must be an array");
  }
  for (const auto& r : *refs) {
    if (!r.is_string()) bad_line(line, "cross_refs entries must be strings");
    doc.cross_refs.insert(r.get<std::string>());
  }
  if (auto problems = document_problems(doc); !problems.empty()) {
    bad_line(line, problems.front());
  }
  return doc;
}

}  // namespace

std::string_view to_string(DocumentKind kind) {
  switch (kind) {
    case DocumentKind::kAttackPattern: return "AttackPattern";
    case DocumentKind::kWeakness: return "Weakness";
    case DocumentKind::kVulnerability: return "Vulnerability";
  }
  return "";
}

std::optional<DocumentKind> parse_kind(std::string_view name) {
  for (auto k : {DocumentKind::kAttackPattern, DocumentKind::kWeakness,
                 DocumentKind::kVulnerability}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view id_prefix(DocumentKind kind) {
  switch (kind) {
    case DocumentKind::kAttackPattern: return "CAPEC-";
    case DocumentKind::kWeakness: return "CWE-";
    case DocumentKind::kVulnerability: return "CVE-";
  }
  return "";
}

std::optional<DocumentKind> kind_of_id(std::string_view doc_id) {
  for (auto k : {DocumentKind::kAttackPattern, DocumentKind::kWeakness,
                 DocumentKind::kVulnerability}) {
    auto prefix = id_prefix(k);
    if (doc_id.size() > prefix.size() && doc_id.starts_with(prefix)) return k;
  }
  return std::nullopt;
}

std::string_view to_string(SeverityScheme scheme) {
  switch (scheme) {
    case SeverityScheme::kCvssV2: return "CVSSv2";
    case SeverityScheme::kCvssV3: return "CVSSv3";
    case SeverityScheme::kCorpusNative: return "CorpusNative";
  }
  return "";
}

std::string_view to_string(SeverityBand band) {
  switch (band) {
    case SeverityBand::kNone: return "None";
    case SeverityBand::kLow: return "Low";
    case SeverityBand::kMedium: return "Medium";
    case SeverityBand::kHigh: return "High";
    case SeverityBand::kCritical: return "Critical";
  }
  return "";
}

std::optional<SeverityScheme> parse_scheme(std::string_view name) {
  for (auto s : {SeverityScheme::kCvssV2, SeverityScheme::kCvssV3,
                 SeverityScheme::kCorpusNative}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::optional<SeverityBand> parse_band(std::string_view name) {
  for (auto b : {SeverityBand::kNone, SeverityBand::kLow, SeverityBand::kMedium,
                 SeverityBand::kHigh, SeverityBand::kCritical}) {
    if (to_string(b) == name) return b;
  }
  return std::nullopt;
}

SeverityLabel cvss_label(SeverityScheme scheme, double score) {
  if (!std::isfinite(score) || score < 0.0 || score > 10.0) {
    throw Error(ErrorCode::kInvalidDocument,
                "CVSS score out of range [0, 10]: " + std::to_string(score));
  }
  SeverityLabel label{scheme, SeverityBand::kNone, score};
  if (scheme == SeverityScheme::kCvssV2) {
    label.band = score >= 7.0   ? SeverityBand::kHigh
                 : score >= 4.0 ? SeverityBand::kMedium
                                : SeverityBand::kLow;
  } else {
    label.band = score >= 9.0   ? SeverityBand::kCritical
                 : score >= 7.0 ? SeverityBand::kHigh
                 : score >= 4.0 ? SeverityBand::kMedium
                 : score > 0.0  ? SeverityBand::kLow
                                : SeverityBand::kNone;
  }
  return label;
}

std::vector<std::string> document_problems(const AttackVectorDocument& doc) {
  std::vector<std::string> out;
  if (kind_of_id(doc.id) != doc.kind) {
    out.push_back("id '" + doc.id + "' does not carry the " +
                  std::string(id_prefix(doc.kind)) + " prefix of kind " +
                  std::string(to_string(doc.kind)));
  }
  if (doc.title.find_first_not_of(" \t\r\n") == std::string::npos) {
    out.push_back("'" + doc.id + "' has an empty title");
  }
  if (doc.description.find_first_not_of(" \t\r\n") == std::string::npos) {
    out.push_back("'" + doc.id + "' has an empty description");
  }
  if (doc.cross_refs.contains(doc.id)) {
    out.push_back("'" + doc.id + "' references itself");
  }
  if (doc.severity && doc.severity->raw_score &&
      doc.severity->scheme != SeverityScheme::kCorpusNative) {
    double raw = *doc.severity->raw_score;
    if (!std::isfinite(raw) || raw < 0.0 || raw > 10.0) {
      out.push_back("'" + doc.id + "' severity score outside [0, 10]");
    } else if (cvss_label(doc.severity->scheme, raw).band !=
               doc.severity->band) {
      out.push_back("'" + doc.id + "' severity band disagrees with its score");
    }
  }
  return out;
}

const AttackVectorDocument* Corpus::find(std::string_view doc_id) const {
  auto it = documents_.find(std::string(doc_id));
  return it == documents_.end() ? nullptr : &it->second;
}

Corpus build_corpus(std::vector<AttackVectorDocument> docs) {
  if (docs.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "corpus has no documents");
  }
  Corpus corpus;
  for (auto& doc : docs) {
    if (auto problems = document_problems(doc); !problems.empty()) {
      throw Error(ErrorCode::kInvalidDocument,
                  "invalid document '" + doc.id + "'", problems);
    }
    if (corpus.documents_.contains(doc.id)) {
      corpus.warnings_.push_back(
          {"DUPLICATE_ID", "duplicate document '" + doc.id + "' skipped"});
      continue;
    }
    std::string id = doc.id;
    corpus.documents_.emplace(std::move(id), std::move(doc));
  }
  std::string canonical;
  for (const auto& [id, doc] : corpus.documents_) {
    for (const auto& ref : doc.cross_refs) {
      if (!corpus.documents_.contains(ref)) corpus.dangling_refs_.emplace(id, ref);
    }
    canonical += document_to_json_line(doc);
    canonical += '\n';
  }
  corpus.build_stamp_ = "sha256:" + detail::sha256_hex(canonical).substr(0, 16);
  return corpus;
}

std::map<std::string, std::size_t> crossref_distances(
    const Corpus& corpus, const std::set<std::string>& seed, std::size_t depth) {
  std::map<std::string, std::size_t> dist;
  std::deque<std::string> frontier;
  for (const auto& id : seed) {
    if (!corpus.find(id)) {
      throw Error(ErrorCode::kNotFound, "unknown document '" + id + "'", {id});
    }
    dist.emplace(id, 0);
    frontier.push_back(id);
  }
  while (!frontier.empty()) {
    std::string current = std::move(frontier.front());
    frontier.pop_front();
    std::size_t hops = dist.at(current);
    if (hops == depth) continue;
    for (const auto& ref : corpus.find(current)->cross_refs) {
      if (!corpus.find(ref) || dist.contains(ref)) continue;
      dist.emplace(ref, hops + 1);
      frontier.push_back(ref);
    }
  }
  return dist;
}

std::set<std::string> expand_crossrefs(const Corpus& corpus,
                                       const std::set<std::string>& seed,
                                       std::size_t depth) {
  std::set<std::string> out;
  for (const auto& [id, hops] : crossref_distances(corpus, seed, depth)) {
    out.insert(id);
  }
  return out;
}

std::string document_to_json_line(const AttackVectorDocument& doc) {
  json obj = {
      {"id", doc.id},
      {"kind", to_string(doc.kind)},
      {"title", doc.title},
      {"description", doc.description},
      {"extra_text", doc.extra_text ? json(*doc.extra_text) : json(nullptr)},
      {"severity", severity_to_json(doc.severity)},
      {"cross_refs", doc.cross_refs},
  };
  return obj.dump();
}

std::string write_snapshot(const Corpus& corpus) {
  std::string out;
  for (const auto& [id, doc] : corpus.documents()) {
    out += document_to_json_line(doc);
    out += '\n';
  }
  return out;
}

Corpus read_snapshot(std::string_view text) {
  std::vector<AttackVectorDocument> docs;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      bad_line(line_no, std::string("invalid JSON: ") + e.what());
    }
    docs.push_back(document_from_json(obj, line_no));
  }
  if (docs.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "snapshot contains no documents");
  }
  return build_corpus(std::move(docs));
}

}  // namespace cpsec
