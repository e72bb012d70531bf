#include "cpsec/retrieval.hpp"

#include <algorithm>
#include <cmath>

namespace cpsec {
namespace {

void count_field(const std::string& text, Field field, std::uint32_t doc,
                 std::map<std::string, std::vector<Posting>, std::less<>>& postings,
                 std::size_t& length) {
  auto tokens = tokenize(text);
  length += tokens.size();
  for (auto& t : tokens) {
    auto& list = postings[t];
    if (list.empty() || list.back().doc != doc) list.push_back({doc});
    auto& p = list.back();
    switch (field) {
      case Field::kTitle: ++p.title_tf; break;
      case Field::kDescription: ++p.description_tf; break;
      case Field::kExtraText: ++p.extra_tf; break;
    }
  }
}

}  // namespace

double FieldWeights::operator[](Field f) const {
  switch (f) {
    case Field::kTitle: return title;
    case Field::kDescription: return description;
    case Field::kExtraText: return extra_text;
  }
  return 0.0;
}

std::size_t RetrievalIndex::document_frequency(std::string_view term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? 0 : it->second.size();
}

double RetrievalIndex::idf(std::string_view term) const {
  return std::log((static_cast<double>(doc_count()) + 1.0) /
                  (static_cast<double>(document_frequency(term)) + 1.0)) +
         1.0;
}

double RetrievalIndex::weighted_tf(const Posting& p) const {
  return weights_.title * p.title_tf + weights_.description * p.description_tf +
         weights_.extra_text * p.extra_tf;
}

RetrievalIndex build_index(const Corpus& corpus, const FieldWeights& weights) {
  for (double w : {weights.title, weights.description, weights.extra_text}) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::kConfig, "field weights must be positive");
    }
  }
  if (corpus.size() == 0) {
    throw Error(ErrorCode::kEmptyCorpus, "cannot index an empty corpus");
  }
  RetrievalIndex index;
  index.weights_ = weights;
  index.corpus_stamp_ = corpus.build_stamp();

  std::uint32_t ordinal = 0;
  for (const auto& [id, doc] : corpus.documents()) {
    std::size_t title_len = 0, desc_len = 0, extra_len = 0;
    count_field(doc.title, Field::kTitle, ordinal, index.postings_, title_len);
    count_field(doc.description, Field::kDescription, ordinal, index.postings_,
                desc_len);
    if (doc.extra_text) {
      count_field(*doc.extra_text, Field::kExtraText, ordinal, index.postings_,
                  extra_len);
    }
    index.doc_ids_.push_back(id);
    index.doc_kinds_.push_back(doc.kind);
    index.doc_lengths_.push_back(weights.title * title_len +
                                 weights.description * desc_len +
                                 weights.extra_text * extra_len);
    ++ordinal;
  }

  // Accumulate squared components term by term in lexicographic order so
  // norms are reproducible bit for bit.
  std::vector<double> squares(index.doc_ids_.size(), 0.0);
  for (const auto& [term, list] : index.postings_) {
    double idf = index.idf(term);
    for (const auto& p : list) {
      double w = index.weighted_tf(p) * idf;
      squares[p.doc] += w * w;
    }
  }
  index.doc_norms_.reserve(squares.size());
  for (double s : squares) index.doc_norms_.push_back(std::sqrt(s));
  return index;
}

std::vector<ScoredDocument> TfIdfCosineScorer::score(
    const RetrievalIndex& index,
    const std::vector<std::string>& query_terms) const {
  std::map<std::string, double, std::less<>> query_tf;
  for (const auto& t : query_terms) {
    if (index.document_frequency(t) > 0) query_tf[t] += 1.0;
  }
  if (query_tf.empty()) return {};

  double query_sq = 0.0;
  std::map<std::uint32_t, ScoredDocument> acc;
  for (const auto& [term, tf] : query_tf) {
    double idf = index.idf(term);
    double q = tf * idf;
    query_sq += q * q;
    for (const auto& p : index.postings().find(term)->second) {
      auto& entry = acc[p.doc];
      entry.doc = p.doc;
      entry.score += q * index.weighted_tf(p) * idf;
      entry.matched_terms.insert(term);
    }
  }
  double query_norm = std::sqrt(query_sq);
  std::vector<ScoredDocument> out;
  out.reserve(acc.size());
  for (auto& [doc, entry] : acc) {
    entry.score /= query_norm * index.doc_norm(doc);
    out.push_back(std::move(entry));
  }
  return out;
}

void validate_config(const AssociationConfig& config) {
  if (config.top_k == 0) {
    throw Error(ErrorCode::kConfig, "top_k must be at least 1");
  }
  if (!std::isfinite(config.threshold) || config.threshold < 0.0) {
    throw Error(ErrorCode::kConfig, "threshold must be a non-negative number");
  }
}

void sort_ranked(std::vector<Match>& matches) {
  std::sort(matches.begin(), matches.end(), [](const Match& a, const Match& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
  });
}

std::vector<Match> query(const RetrievalIndex& index, std::string_view text,
                         const AssociationConfig& config, const Scorer& scorer) {
  validate_config(config);
  auto terms = tokenize(text);
  if (terms.empty()) return {};

  std::vector<Match> out;
  for (auto& s : scorer.score(index, terms)) {
    if (!config.kinds.contains(index.doc_kinds()[s.doc])) continue;
    if (!(s.score >= config.threshold)) continue;
    out.push_back({index.doc_ids()[s.doc], s.score, std::move(s.matched_terms),
                   std::nullopt});
  }
  sort_ranked(out);
  if (out.size() > config.top_k) out.resize(config.top_k);
  return out;
}

std::string to_string(const AttributeRef& ref) {
  return std::string(to_string(ref.owner.scope)) + ":" + ref.owner.id + "/" +
         ref.key;
}

std::size_t AttackSurface::total_matches() const {
  std::size_t n = 0;
  for (const auto& [ref, list] : per_attribute) n += list.size();
  return n;
}

std::vector<Match> associate_attribute(const Attribute& attribute,
                                       const RetrievalIndex& index,
                                       const Corpus& corpus,
                                       const AssociationConfig& config,
                                       const Scorer& scorer) {
  auto direct = query(index, attribute.key + " " + attribute.value, config, scorer);

  std::map<std::string, Match> merged;
  for (auto& m : direct) merged.emplace(m.doc_id, m);

  if (config.crossref_depth > 0) {
    for (const auto& m : direct) {
      auto reach = crossref_distances(corpus, {m.doc_id}, config.crossref_depth);
      for (const auto& [doc_id, hops] : reach) {
        if (hops == 0) continue;
        const auto* doc = corpus.find(doc_id);
        if (!config.kinds.contains(doc->kind)) continue;
        double score = m.score * std::pow(kCrossRefDecay, static_cast<double>(hops));
        Match candidate{doc_id, score, {}, m.doc_id};
        auto [it, inserted] = merged.emplace(doc_id, candidate);
        if (inserted) continue;
        Match& held = it->second;
        // Higher score wins; a direct match wins ties; between cross-refs the
        // smaller originating id wins ties.
        bool replace = score > held.score ||
                       (score == held.score && !held.direct() &&
                        m.doc_id < *held.via);
        if (replace) held = std::move(candidate);
      }
    }
  }

  std::vector<Match> out;
  out.reserve(merged.size());
  for (auto& [id, m] : merged) out.push_back(std::move(m));
  sort_ranked(out);
  return out;
}

AttackSurface associate(const SystemModel& model, const RetrievalIndex& index,
                        const Corpus& corpus, const AssociationConfig& config,
                        const Scorer& scorer) {
  validate_config(config);
  if (index.corpus_stamp() != corpus.build_stamp() ||
      index.doc_count() != corpus.size()) {
    throw Error(ErrorCode::kInternal,
                "retrieval index was not built from this corpus");
  }
  for (const auto& id : index.doc_ids()) {
    if (!corpus.find(id)) {
      throw Error(ErrorCode::kInternal,
                  "indexed document '" + id + "' missing from corpus", {id});
    }
  }

  AttackSurface surface;
  surface.model_id = model.id;
  surface.corpus_stamp = corpus.build_stamp();
  surface.config = config;
  for (const auto& c : model.components) {
    for (const auto& a : c.attributes) {
      surface.per_attribute[{{OwnerScope::kComponent, c.id}, a.key}] =
          associate_attribute(a, index, corpus, config, scorer);
    }
  }
  for (const auto& e : model.connections) {
    for (const auto& a : e.attributes) {
      surface.per_attribute[{{OwnerScope::kConnection, e.id}, a.key}] =
          associate_attribute(a, index, corpus, config, scorer);
    }
  }
  return surface;
}

}  // namespace cpsec
