#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cpsec/corpus.hpp"
#include "cpsec/retrieval.hpp"

namespace cpsec {

// Nothing in this module folds matches into a single risk number. Counts,
// groupings, and set differences only.

/// Conjunctive filter over an attack surface. An all-empty spec is not a
/// filter and is rejected.
struct FilterSpec {
  std::optional<std::set<DocumentKind>> include_kinds;
  /// Every token of the keyword must appear in the matched document's title
  /// or description.
  std::optional<std::string> keyword;
  /// Documents without a severity label count as band None.
  std::optional<SeverityBand> min_severity;
  /// Keeps only attributes whose owner id is listed.
  std::optional<std::set<std::string>> component_ids;

  bool is_identity() const {
    return !include_kinds && !keyword && !min_severity && !component_ids;
  }
  bool operator==(const FilterSpec&) const = default;
};

/// Spec equivalent to applying `a` then `b`.
FilterSpec conjunction(const FilterSpec& a, const FilterSpec& b);

struct FilterResult {
  AttackSurface surface;
  std::vector<Warning> warnings;
};

/// Each ranked list of the result is a subsequence of its input list.
/// Throws Error(kNonFilter) for an identity spec. A keyword that tokenizes to
/// nothing is ignored with an IDENTITY warning.
FilterResult filter_surface(const AttackSurface& surface, const FilterSpec& spec,
                            const Corpus& corpus);

struct KindCounts {
  std::size_t attack_patterns = 0;
  std::size_t weaknesses = 0;
  std::size_t vulnerabilities = 0;

  std::size_t total() const {
    return attack_patterns + weaknesses + vulnerabilities;
  }
  bool operator==(const KindCounts&) const = default;
};

struct ExposureRow {
  AttributeRef attribute;
  KindCounts counts;

  bool operator==(const ExposureRow&) const = default;
};

/// Per-attribute match counts by kind, one row per attribute in the surface
/// (zero-match attributes included), sorted by owner then attribute key.
struct ExposureReport {
  std::string model_id;
  AssociationConfig config;
  std::vector<ExposureRow> rows;

  bool operator==(const ExposureReport&) const = default;
};

ExposureReport exposure_report(const AttackSurface& surface);

inline constexpr std::string_view kExposureCsvHeader =
    "component,attribute,attack_patterns,weaknesses,vulnerabilities,total";

/// RFC 4180 quoting, LF line ends. Connection attributes appear with "connection:" prefixed to
/// the owner id.
std::string to_csv(const ExposureReport& report);

struct AttributeDelta {
  std::vector<std::string> added;
  std::vector<std::string> removed;

  bool operator==(const AttributeDelta&) const = default;
};

struct SurfaceDiff {
  /// Only attributes whose match set changed.
  std::map<AttributeRef, AttributeDelta> per_attribute;
  /// after-count minus before-count for every owner present in either surface.
  std::map<OwnerRef, long long> per_component_delta;
  long long net_delta = 0;

  bool empty() const { return per_attribute.empty(); }
  bool operator==(const SurfaceDiff&) const = default;
};

/// Throws Error(kStaleComparison) when the surfaces come from different
/// corpus snapshots.
SurfaceDiff compare_surfaces(const AttackSurface& before,
                             const AttackSurface& after);

struct SeverityEntry {
  AttributeRef attribute;
  std::string doc_id;

  auto operator<=>(const SeverityEntry&) const = default;
};

/// Groups matches by their document's severity band. Unlabelled documents
/// land under None. Bands with no entries are absent.
std::map<SeverityBand, std::vector<SeverityEntry>> severity_view(
    const AttackSurface& surface, const Corpus& corpus);

}  // namespace cpsec
