#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cpsec/corpus.hpp"
#include "cpsec/graphml.hpp"

namespace cpsec::testing {

inline std::filesystem::path fixture(const std::string& relative) {
  return std::filesystem::path(CPSEC_FIXTURE_DIR) / relative;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string read_fixture(const std::string& relative) {
  return read_file(fixture(relative));
}

inline SystemModel load_model(const std::string& relative) {
  return parse_model(read_fixture(relative)).model;
}

/// CAPEC-88 -> CWE-78 -> CVE-TEST-0001, no dangling refs.
inline std::vector<AttackVectorDocument> trio_documents() {
  std::vector<AttackVectorDocument> docs;
  for (auto& d : parse_attack_patterns(read_fixture("corpus/trio/capec.xml")).value) {
    docs.push_back(std::move(d));
  }
  for (auto& d : parse_weaknesses(read_fixture("corpus/trio/cwe.xml")).value) {
    docs.push_back(std::move(d));
  }
  for (auto& d : parse_vulnerabilities(read_fixture("corpus/trio/nvd.json")).value) {
    docs.push_back(std::move(d));
  }
  return docs;
}

inline Corpus trio_corpus() { return build_corpus(trio_documents()); }

/// All three fixture catalogs.
inline Corpus full_corpus() {
  std::vector<AttackVectorDocument> docs;
  auto append = [&](auto parsed) {
    for (auto& d : parsed.value) docs.push_back(std::move(d));
  };
  append(parse_attack_patterns(read_fixture("corpus/capec.xml")));
  append(parse_weaknesses(read_fixture("corpus/cwe.xml")));
  append(parse_vulnerabilities(read_fixture("corpus/nvd.json")));
  return build_corpus(std::move(docs));
}

/// CWE-78 plus fourteen distractor weaknesses.
inline Corpus weakness_corpus() {
  return build_corpus(parse_weaknesses(read_fixture("corpus/cwe.xml")).value);
}

/// Valid model fixtures used for round-trip checks.
inline std::vector<std::string> valid_model_fixtures() {
  return {"models/scada_centrifuge.graphml", "models/empty.graphml",
          "models/single_node.graphml",      "models/self_loop.graphml",
          "models/escaping.graphml",         "models/unicode.graphml",
          "models/water_treatment.graphml",  "models/substation.graphml",
          "models/connection_attributes.graphml",
          "models/no_attributes.graphml",    "models/sensitivity_generic.graphml",
          "models/sensitivity_specific.graphml"};
}

}  // namespace cpsec::testing
