#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cpsec/error.hpp"

namespace cpsec {

enum class DocumentKind { kAttackPattern, kWeakness, kVulnerability };

std::string_view to_string(DocumentKind kind);
std::optional<DocumentKind> parse_kind(std::string_view name);
/// "CAPEC-", "CWE-" or "CVE-".
std::string_view id_prefix(DocumentKind kind);
/// Kind implied by the id prefix, if any.
std::optional<DocumentKind> kind_of_id(std::string_view doc_id);

enum class SeverityScheme { kCvssV2, kCvssV3, kCorpusNative };
enum class SeverityBand { kNone, kLow, kMedium, kHigh, kCritical };

std::string_view to_string(SeverityScheme scheme);
std::string_view to_string(SeverityBand band);
std::optional<SeverityScheme> parse_scheme(std::string_view name);
std::optional<SeverityBand> parse_band(std::string_view name);

/// A severity label. Carried for display and grouping only; it is never
/// combined into a risk number.
struct SeverityLabel {
  SeverityScheme scheme = SeverityScheme::kCorpusNative;
  SeverityBand band = SeverityBand::kNone;
  std::optional<double> raw_score;

  bool operator==(const SeverityLabel&) const = default;
};

/// Standard CVSS banding. v3: 0.0 None, 0.1-3.9 Low, 4.0-6.9 Medium,
/// 7.0-8.9 High, 9.0-10.0 Critical. v2: 0.0-3.9 Low, 4.0-6.9 Medium,
/// 7.0-10.0 High. Throws Error(kInvalidDocument) outside [0, 10].
SeverityLabel cvss_label(SeverityScheme scheme, double score);

struct AttackVectorDocument {
  std::string id;
  DocumentKind kind = DocumentKind::kAttackPattern;
  std::string title;
  std::string description;
  std::optional<std::string> extra_text;
  std::optional<SeverityLabel> severity;
  std::set<std::string> cross_refs;

  bool operator==(const AttackVectorDocument&) const = default;
};

/// Problems with a single document's invariants; empty when valid.
std::vector<std::string> document_problems(const AttackVectorDocument& doc);

template <typename T>
struct Parsed {
  T value;
  std::vector<Warning> warnings;
};

// Catalog parsers. Malformed input throws Error(kParse); entries that cannot
// be normalized are skipped and reported as warnings.

/// CAPEC-style catalog: <Attack_Pattern ID Name> with Description,
/// Prerequisites, Mitigations, Consequences, Related_Weaknesses/CWE_ID and
/// optional Typical_Severity.
Parsed<std::vector<AttackVectorDocument>> parse_attack_patterns(
    std::string_view document);

/// CWE-style catalog: <Weakness ID Name> with Description,
/// Extended_Description, Common_Consequences, Potential_Mitigations,
/// Observed_Examples/Reference and Related_Attack_Patterns/CAPEC_ID.
/// Duplicate ids keep the first occurrence.
Parsed<std::vector<AttackVectorDocument>> parse_weaknesses(
    std::string_view document);

/// NVD-style JSON. Accepts a 1.1 feed ({"CVE_Items": [...]}), a 2.0 API
/// response ({"vulnerabilities": [...]}), or a flat array of
/// {id, description, cvssV3?, cvssV2?, cwe?} objects.
Parsed<std::vector<AttackVectorDocument>> parse_vulnerabilities(
    std::string_view document);

/// Validated, immutable document set.
class Corpus {
 public:
  const std::map<std::string, AttackVectorDocument>& documents() const {
    return documents_;
  }
  /// (from-id, to-id) pairs whose target is not in the corpus.
  const std::set<std::pair<std::string, std::string>>& dangling_refs() const {
    return dangling_refs_;
  }
  /// Content hash of the normalized documents.
  const std::string& build_stamp() const { return build_stamp_; }
  const std::vector<Warning>& warnings() const { return warnings_; }

  const AttackVectorDocument* find(std::string_view doc_id) const;
  std::size_t size() const { return documents_.size(); }

 private:
  friend Corpus build_corpus(std::vector<AttackVectorDocument> docs);

  std::map<std::string, AttackVectorDocument> documents_;
  std::set<std::pair<std::string, std::string>> dangling_refs_;
  std::string build_stamp_;
  std::vector<Warning> warnings_;
};

/// Duplicate ids keep the first and record a warning. Throws
/// Error(kEmptyCorpus) on empty input and Error(kInvalidDocument) when a
/// document breaks its invariants.
Corpus build_corpus(std::vector<AttackVectorDocument> docs);

/// Hop distance from the nearest seed for every document reachable within
/// `depth` cross-reference hops. Dangling targets are skipped. Throws
/// Error(kNotFound) for unknown seeds.
std::map<std::string, std::size_t> crossref_distances(
    const Corpus& corpus, const std::set<std::string>& seed, std::size_t depth);

/// Breadth-first closure over cross-refs, seed included.
std::set<std::string> expand_crossrefs(const Corpus& corpus,
                                       const std::set<std::string>& seed,
                                       std::size_t depth);

// Snapshot: one JSON object per line with fields
// id, kind, title, description, extra_text, severity{scheme,band,raw},
// cross_refs.

std::string document_to_json_line(const AttackVectorDocument& doc);
/// Documents in id order, one per line, trailing newline.
std::string write_snapshot(const Corpus& corpus);
/// Throws Error(kParse) naming the 1-based line number of the first bad line,
/// Error(kEmptyCorpus) when the snapshot holds no documents.
Corpus read_snapshot(std::string_view text);

}  // namespace cpsec
