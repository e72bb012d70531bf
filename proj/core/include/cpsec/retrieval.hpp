#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cpsec/corpus.hpp"
#include "cpsec/model.hpp"

namespace cpsec {

// ---------------------------------------------------------------------------
// Tokenization

/// Lowercases ASCII, splits on anything that is not an ASCII letter or digit,
/// drops tokens shorter than two bytes and built-in stopwords. Numeric tokens
/// are kept. No stemming.
std::vector<std::string> tokenize(std::string_view text);

/// The fixed built-in English stopword list (see docs/stopwords.md).
const std::set<std::string, std::less<>>& stopwords();

// ---------------------------------------------------------------------------
// Index

enum class Field { kTitle, kDescription, kExtraText };

struct FieldWeights {
  double title = 3.0;
  double description = 2.0;
  double extra_text = 1.0;

  double operator[](Field f) const;
  bool operator==(const FieldWeights&) const = default;
};

struct Posting {
  std::uint32_t doc = 0;  ///< ordinal into RetrievalIndex::doc_ids()
  std::uint32_t title_tf = 0;
  std::uint32_t description_tf = 0;
  std::uint32_t extra_tf = 0;
};

/// Inverted index with per-field term frequencies. Immutable after
/// build_index(); safe for concurrent queries.
class RetrievalIndex {
 public:
  const std::map<std::string, std::vector<Posting>, std::less<>>& postings()
      const {
    return postings_;
  }
  std::size_t doc_count() const { return doc_ids_.size(); }
  /// Document ids in ordinal order (ascending id).
  const std::vector<std::string>& doc_ids() const { return doc_ids_; }
  /// Field-weighted token count per document ordinal.
  const std::vector<double>& doc_lengths() const { return doc_lengths_; }
  const std::vector<DocumentKind>& doc_kinds() const { return doc_kinds_; }
  const FieldWeights& field_weights() const { return weights_; }
  const std::string& corpus_stamp() const { return corpus_stamp_; }

  std::size_t document_frequency(std::string_view term) const;
  /// ln((N + 1) / (df + 1)) + 1
  double idf(std::string_view term) const;
  double weighted_tf(const Posting& p) const;
  /// Euclidean norm of the document's weighted TF-IDF vector.
  double doc_norm(std::uint32_t doc) const { return doc_norms_[doc]; }

 private:
  friend RetrievalIndex build_index(const Corpus& corpus,
                                    const FieldWeights& weights);

  std::map<std::string, std::vector<Posting>, std::less<>> postings_;
  std::vector<std::string> doc_ids_;
  std::vector<double> doc_lengths_;
  std::vector<DocumentKind> doc_kinds_;
  std::vector<double> doc_norms_;
  FieldWeights weights_;
  std::string corpus_stamp_;
};

/// Throws Error(kConfig) for non-positive weights and Error(kEmptyCorpus)
/// for an empty corpus.
RetrievalIndex build_index(const Corpus& corpus,
                           const FieldWeights& weights = {});

// ---------------------------------------------------------------------------
// Scoring

struct ScoredDocument {
  std::uint32_t doc = 0;
  double score = 0.0;
  std::set<std::string> matched_terms;
};

/// Ranking function over an index. Only documents sharing at least one term
/// with the query are returned; order is unspecified.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::vector<ScoredDocument> score(
      const RetrievalIndex& index,
      const std::vector<std::string>& query_terms) const = 0;
};

/// Cosine between the query's TF-IDF vector and each document's
/// field-weighted TF-IDF vector. Query terms absent from the index have no
/// dimension and do not contribute to the query norm.
class TfIdfCosineScorer final : public Scorer {
 public:
  std::vector<ScoredDocument> score(
      const RetrievalIndex& index,
      const std::vector<std::string>& query_terms) const override;
};

// ---------------------------------------------------------------------------
// Association

inline constexpr double kCrossRefDecay = 0.5;

struct AssociationConfig {
  std::size_t top_k = 25;
  double threshold = 0.05;
  std::size_t crossref_depth = 2;
  std::set<DocumentKind> kinds = {DocumentKind::kAttackPattern,
                                  DocumentKind::kWeakness,
                                  DocumentKind::kVulnerability};

  bool operator==(const AssociationConfig&) const = default;
};

/// Throws Error(kConfig) when top_k is zero or the threshold is negative or
/// not finite.
void validate_config(const AssociationConfig& config);

struct Match {
  std::string doc_id;
  double score = 0.0;
  std::set<std::string> matched_terms;
  /// Empty for direct matches; the originating doc id for cross-ref matches.
  std::optional<std::string> via;

  bool direct() const { return !via.has_value(); }
  bool operator==(const Match&) const = default;
};

/// Sorted by score descending, ties by doc id ascending; score >= threshold,
/// kinds restricted to config.kinds, at most top_k entries.
std::vector<Match> query(const RetrievalIndex& index, std::string_view text,
                         const AssociationConfig& config,
                         const Scorer& scorer = TfIdfCosineScorer{});

struct AttributeRef {
  OwnerRef owner;
  std::string key;

  auto operator<=>(const AttributeRef&) const = default;
};

/// "component:bpcs/entry-point" style label used in diagnostics and JSON.
std::string to_string(const AttributeRef& ref);

/// Per-attribute ranked matches for one model against one corpus snapshot.
struct AttackSurface {
  std::string model_id;
  std::string corpus_stamp;
  AssociationConfig config;
  std::map<AttributeRef, std::vector<Match>> per_attribute;

  std::size_t total_matches() const;
  bool operator==(const AttackSurface&) const = default;
};

/// Orders a ranked list: score descending, doc id ascending.
void sort_ranked(std::vector<Match>& matches);

/// Queries "key value" for every component and connection attribute, then
/// expands each direct match through cross-refs up to config.crossref_depth,
/// scoring a document h hops away at score * 0.5^h. Duplicates keep the
/// higher score, the direct match on ties. Threshold and top_k bound the
/// direct matches; cross-ref matches still obey the kind filter.
///
/// Throws Error(kInternal) when the index was not built from `corpus`.
AttackSurface associate(const SystemModel& model, const RetrievalIndex& index,
                        const Corpus& corpus, const AssociationConfig& config,
                        const Scorer& scorer = TfIdfCosineScorer{});

/// Ranked list for a single attribute; associate() applies this per entry.
std::vector<Match> associate_attribute(const Attribute& attribute,
                                       const RetrievalIndex& index,
                                       const Corpus& corpus,
                                       const AssociationConfig& config,
                                       const Scorer& scorer = TfIdfCosineScorer{});

}  // namespace cpsec
