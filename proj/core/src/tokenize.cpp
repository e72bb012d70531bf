#include <cctype>

#include "cpsec/retrieval.hpp"

namespace cpsec {

const std::set<std::string, std::less<>>& stopwords() {
  // Keep in sync with docs/stopwords.md.
  static const std::set<std::string, std::less<>> words = {
      "about",   "above",   "after",   "again",   "against", "all",
      "also",    "am",      "an",      "and",     "any",     "are",
      "as",      "at",      "be",      "because", "been",    "before",
      "being",   "below",   "between", "both",    "but",     "by",
      "can",     "could",   "did",     "do",      "does",    "doing",
      "down",    "during",  "each",    "either",  "etc",     "even",
      "ever",    "few",     "for",     "from",    "further", "had",
      "has",     "have",    "having",  "he",      "her",     "here",
      "hers",    "herself", "him",     "himself", "his",     "how",
      "however", "if",      "in",      "into",    "is",      "it",
      "its",     "itself",  "just",    "may",     "me",      "might",
      "more",    "most",    "must",    "my",      "myself",  "no",
      "nor",     "not",     "now",     "of",      "off",     "on",
      "once",    "only",    "or",      "other",   "our",     "ours",
      "ourselves", "out",   "over",    "own",     "same",    "shall",
      "she",     "should",  "so",      "some",    "such",    "than",
      "that",    "the",     "their",   "theirs",  "them",    "themselves",
      "then",    "there",   "these",   "they",    "this",    "those",
      "through", "thus",    "to",      "too",     "under",   "until",
      "up",      "upon",    "very",    "via",     "was",     "we",
      "were",    "what",    "when",    "where",   "whether", "which",
      "while",   "who",     "whom",    "why",     "will",    "with",
      "within",  "without", "would",   "yet",     "you",     "your",
      "yours",   "yourself",
  };
  return words;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (current.size() >= 2 && !stopwords().contains(current)) {
      out.push_back(std::move(current));
    }
    current.clear();
  };
  for (unsigned char c : text) {
    if (c < 0x80 && std::isalnum(c)) {
      current += static_cast<char>(std::tolower(c));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

}  // namespace cpsec
