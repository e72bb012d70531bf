#include "cpsec/analysis.hpp"

#include <algorithm>
#include <sstream>

namespace cpsec {
namespace {

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string owner_label(const OwnerRef& owner) {
  return owner.scope == OwnerScope::kComponent ? owner.id
                                               : "connection:" + owner.id;
}

bool keyword_matches(const AttackVectorDocument& doc,
                     const std::vector<std::string>& tokens) {
  auto title = tokenize(doc.title);
  auto desc = tokenize(doc.description);
  return std::all_of(tokens.begin(), tokens.end(), [&](const std::string& t) {
    return std::find(title.begin(), title.end(), t) != title.end() ||
           std::find(desc.begin(), desc.end(), t) != desc.end();
  });
}

SeverityBand band_of(const AttackVectorDocument* doc) {
  return doc && doc->severity ? doc->severity->band : SeverityBand::kNone;
}

}  // namespace

FilterSpec conjunction(const FilterSpec& a, const FilterSpec& b) {
  FilterSpec out;
  if (a.include_kinds && b.include_kinds) {
    std::set<DocumentKind> both;
    std::set_intersection(a.include_kinds->begin(), a.include_kinds->end(),
                          b.include_kinds->begin(), b.include_kinds->end(),
                          std::inserter(both, both.end()));
    out.include_kinds = std::move(both);
  } else {
    out.include_kinds = a.include_kinds ? a.include_kinds : b.include_kinds;
  }
  if (a.keyword && b.keyword) {
    out.keyword = *a.keyword + " " + *b.keyword;
  } else {
    out.keyword = a.keyword ? a.keyword : b.keyword;
  }
  if (a.min_severity && b.min_severity) {
    out.min_severity = std::max(*a.min_severity, *b.min_severity);
  } else {
    out.min_severity = a.min_severity ? a.min_severity : b.min_severity;
  }
  if (a.component_ids && b.component_ids) {
    std::set<std::string> both;
    std::set_intersection(a.component_ids->begin(), a.component_ids->end(),
                          b.component_ids->begin(), b.component_ids->end(),
                          std::inserter(both, both.end()));
    out.component_ids = std::move(both);
  } else {
    out.component_ids = a.component_ids ? a.component_ids : b.component_ids;
  }
  return out;
}

FilterResult filter_surface(const AttackSurface& surface, const FilterSpec& spec,
                            const Corpus& corpus) {
  if (spec.is_identity()) {
    throw Error(ErrorCode::kNonFilter, "filter spec sets no field");
  }
  FilterResult result{surface, {}};
  std::vector<std::string> keyword_tokens;
  if (spec.keyword) {
    keyword_tokens = tokenize(*spec.keyword);
    if (keyword_tokens.empty()) {
      result.warnings.push_back(
          {"IDENTITY", "keyword '" + *spec.keyword +
                           "' has no searchable terms; ignored"});
    }
  }

  auto& lists = result.surface.per_attribute;
  for (auto it = lists.begin(); it != lists.end();) {
    if (spec.component_ids && !spec.component_ids->contains(it->first.owner.id)) {
      it = lists.erase(it);
      continue;
    }
    std::erase_if(it->second, [&](const Match& m) {
      const auto* doc = corpus.find(m.doc_id);
      if (spec.include_kinds) {
        auto kind = doc ? std::optional(doc->kind) : kind_of_id(m.doc_id);
        if (!kind || !spec.include_kinds->contains(*kind)) return true;
      }
      if (!keyword_tokens.empty() && (!doc || !keyword_matches(*doc, keyword_tokens))) {
        return true;
      }
      if (spec.min_severity && band_of(doc) < *spec.min_severity) return true;
      return false;
    });
    ++it;
  }
  return result;
}

ExposureReport exposure_report(const AttackSurface& surface) {
  ExposureReport report;
  report.model_id = surface.model_id;
  report.config = surface.config;
  for (const auto& [ref, matches] : surface.per_attribute) {
    ExposureRow row{ref, {}};
    for (const auto& m : matches) {
      switch (kind_of_id(m.doc_id).value_or(DocumentKind::kVulnerability)) {
        case DocumentKind::kAttackPattern: ++row.counts.attack_patterns; break;
        case DocumentKind::kWeakness: ++row.counts.weaknesses; break;
        case DocumentKind::kVulnerability: ++row.counts.vulnerabilities; break;
      }
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string to_csv(const ExposureReport& report) {
  std::ostringstream os;
  os << kExposureCsvHeader << "\n";
  for (const auto& r : report.rows) {
    os << csv_field(owner_label(r.attribute.owner)) << ','
       << csv_field(r.attribute.key) << ',' << r.counts.attack_patterns << ','
       << r.counts.weaknesses << ',' << r.counts.vulnerabilities << ','
       << r.counts.total() << "\n";
  }
  return os.str();
}

SurfaceDiff compare_surfaces(const AttackSurface& before,
                             const AttackSurface& after) {
  if (before.corpus_stamp != after.corpus_stamp) {
    throw Error(ErrorCode::kStaleComparison,
                "surfaces were computed against different corpus snapshots",
                {before.corpus_stamp, after.corpus_stamp});
  }
  SurfaceDiff diff;
  std::set<AttributeRef> refs;
  for (const auto& [ref, list] : before.per_attribute) refs.insert(ref);
  for (const auto& [ref, list] : after.per_attribute) refs.insert(ref);

  static const std::vector<Match> kNone;
  auto ids = [](const std::map<AttributeRef, std::vector<Match>>& m,
                const AttributeRef& ref) {
    auto it = m.find(ref);
    std::set<std::string> out;
    for (const auto& x : it == m.end() ? kNone : it->second) out.insert(x.doc_id);
    return out;
  };

  for (const auto& ref : refs) {
    auto b = ids(before.per_attribute, ref);
    auto a = ids(after.per_attribute, ref);
    AttributeDelta delta;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(delta.added));
    std::set_difference(b.begin(), b.end(), a.begin(), a.end(),
                        std::back_inserter(delta.removed));
    long long change = static_cast<long long>(a.size()) -
                       static_cast<long long>(b.size());
    diff.per_component_delta[ref.owner] += change;
    diff.net_delta += change;
    if (!delta.added.empty() || !delta.removed.empty()) {
      diff.per_attribute.emplace(ref, std::move(delta));
    }
  }
  return diff;
}

std::map<SeverityBand, std::vector<SeverityEntry>> severity_view(
    const AttackSurface& surface, const Corpus& corpus) {
  std::map<SeverityBand, std::vector<SeverityEntry>> out;
  for (const auto& [ref, matches] : surface.per_attribute) {
    for (const auto& m : matches) {
      out[band_of(corpus.find(m.doc_id))].push_back({ref, m.doc_id});
    }
  }
  return out;
}

}  // namespace cpsec
