// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Fixture paths are compiled in; no arguments.

#include <httplib.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "cpsec/analysis.hpp"
#include "cpsec/graphml.hpp"
#include "cpsec/retrieval.hpp"
#include "cpsec/service.hpp"
#include "generators.hpp"
#include "test_support.hpp"
#include "tfidf_oracle.hpp"

using namespace cpsec;
namespace t = cpsec::testing;
using nlohmann::json;

namespace {

struct Failure {
  std::string what;
};

void require(bool cond, const std::string& what) {
  if (!cond) throw Failure{what};
}

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct Criterion {
  std::string name;
  std::function<std::string()> check;  // returns a short summary
};

// ---------------------------------------------------------------------------

std::string graphml_round_trip() {
  auto start = Clock::now();
  auto fixtures = t::valid_model_fixtures();
  require(fixtures.size() >= 10, "fewer than 10 fixture models");
  bool saw_demo = false;
  for (const auto& path : fixtures) {
    auto first = parse_model(t::read_fixture(path)).model;
    auto second = parse_model(serialize_model(first)).model;
    require(structurally_equal(first, second), path + " changed on round-trip");
    if (first.id == "scada-centrifuge") saw_demo = first.components.size() == 6;
  }
  require(saw_demo, "six-component demo model missing");
  double ms = ms_since(start);
  require(ms < 1000, "took " + std::to_string(ms) + " ms");
  return std::to_string(fixtures.size()) + " models, " + std::to_string(ms) + " ms";
}

std::string oracle_equivalence() {
  auto start = Clock::now();
  std::mt19937 rng(2024);
  const std::set<DocumentKind> all = {DocumentKind::kAttackPattern,
                                      DocumentKind::kWeakness,
                                      DocumentKind::kVulnerability};
  std::size_t corpora = 0, queries = 0;
  double worst = 0;
  for (std::size_t n = 1; n <= 10; ++n) {
    for (int rep = 0; rep < 2; ++rep) {
      auto corpus = build_corpus(t::random_documents(rng, n));
      std::vector<AttackVectorDocument> docs;
      for (const auto& [id, d] : corpus.documents()) docs.push_back(d);
      t::BruteForceTfIdf oracle(docs);
      auto index = build_index(corpus);
      ++corpora;
      for (int q = 0; q < 50; ++q) {
        auto text = t::random_text(rng, 1, 6);
        AssociationConfig cfg;
        cfg.threshold = q % 2 ? 0.0 : 0.05;
        cfg.top_k = q % 3 ? 25 : 3;
        auto got = query(index, text, cfg);
        auto want = oracle.query(text, all, cfg.threshold, cfg.top_k);
        ++queries;
        require(got.size() == want.size(), "result count differs for '" + text + "'");
        for (std::size_t i = 0; i < got.size(); ++i) {
          require(got[i].doc_id == want[i].id, "ranking differs for '" + text + "'");
          worst = std::max(worst, std::abs(got[i].score - want[i].score));
        }
      }
    }
  }
  require(worst <= 1e-9, "score error " + std::to_string(worst));
  double ms = ms_since(start);
  require(ms < 5000, "took " + std::to_string(ms) + " ms");
  std::ostringstream out;
  out << corpora << " corpora, " << queries << " queries, max |dscore| " << worst
      << ", " << ms << " ms";
  return out.str();
}

std::string cwe78_scenario() {
  auto corpus = t::weakness_corpus();
  std::size_t distractors = 0;
  for (const auto& [id, d] : corpus.documents()) {
    require(d.kind == DocumentKind::kWeakness, "non-weakness in corpus");
    distractors += id != "CWE-78";
  }
  require(corpus.find("CWE-78") != nullptr, "CWE-78 missing");
  require(distractors >= 10, "fewer than 10 distractors");
  auto index = build_index(corpus);
  auto model = t::load_model("models/scada_centrifuge.graphml");
  std::string summary;
  for (const char* id : {"bpcs_platform", "sis_platform"}) {
    const auto* attr = model.find_component(id)->find_attribute("entry-point");
    require(attr && attr->value == "accepts external operating system commands over MODBUS",
            std::string(id) + " entry-point text");
    auto ranked = associate_attribute(*attr, index, corpus, {});
    require(!ranked.empty() && ranked.front().doc_id == "CWE-78",
            std::string(id) + " does not rank CWE-78 first");
    summary += std::string(summary.empty() ? "" : ", ") + id + " top CWE-78 (" +
               std::to_string(ranked.front().score) + ")";
  }
  return summary + "; " + std::to_string(distractors) + " distractors";
}

std::string crossref_chain() {
  auto corpus = t::trio_corpus();
  auto index = build_index(corpus);
  const Attribute attr{"entry-point", "adversary shell privileges"};
  AssociationConfig cfg;
  std::vector<std::set<std::string>> by_depth;
  for (std::size_t d = 0; d <= 4; ++d) {
    cfg.crossref_depth = d;
    std::set<std::string> ids;
    for (const auto& m : associate_attribute(attr, index, corpus, cfg)) ids.insert(m.doc_id);
    by_depth.push_back(ids);
  }
  std::set<DocumentKind> kinds;
  for (const auto& id : by_depth[2]) kinds.insert(*kind_of_id(id));
  require(kinds.size() == 3, "depth 2 does not surface all three kinds");
  require(by_depth[0] == std::set<std::string>{"CAPEC-88"}, "unexpected direct matches");
  for (std::size_t d = 0; d < 4; ++d) {
    require(std::includes(by_depth[d + 1].begin(), by_depth[d + 1].end(),
                          by_depth[d].begin(), by_depth[d].end()),
            "depth " + std::to_string(d) + " not contained in depth " +
                std::to_string(d + 1));
  }
  // Same monotonicity on every attribute of the demo model, full corpus.
  auto full = t::full_corpus();
  auto full_index = build_index(full);
  auto model = t::load_model("models/scada_centrifuge.graphml");
  std::vector<AttackSurface> surfaces;
  for (std::size_t d = 0; d <= 4; ++d) {
    cfg.crossref_depth = d;
    surfaces.push_back(associate(model, full_index, full, cfg));
  }
  for (std::size_t d = 0; d < 4; ++d) {
    for (const auto& [ref, ms] : surfaces[d].per_attribute) {
      std::set<std::string> lo, hi;
      for (const auto& m : ms) lo.insert(m.doc_id);
      for (const auto& m : surfaces[d + 1].per_attribute.at(ref)) hi.insert(m.doc_id);
      require(std::includes(hi.begin(), hi.end(), lo.begin(), lo.end()),
              to_string(ref) + " shrinks at depth " + std::to_string(d + 1));
    }
  }
  return "depth 0..3 sizes " + std::to_string(by_depth[0].size()) + "/" +
         std::to_string(by_depth[1].size()) + "/" + std::to_string(by_depth[2].size()) +
         "/" + std::to_string(by_depth[3].size());
}

bool is_subsequence(const std::vector<Match>& sub, const std::vector<Match>& full) {
  auto it = full.begin();
  for (const auto& m : sub) {
    it = std::find(it, full.end(), m);
    if (it == full.end()) return false;
    ++it;
  }
  return true;
}

std::string filter_laws() {
  std::mt19937 rng(1000);
  int pairs = 0;
  for (; pairs < 1000; ++pairs) {
    auto docs = t::random_documents(rng, 12);
    auto corpus = build_corpus(docs);
    auto surface = t::random_surface(rng, docs, corpus.build_stamp());
    auto a = t::random_filter(rng);
    auto b = t::random_filter(rng);
    auto fa = filter_surface(surface, a, corpus).surface;
    for (const auto& [ref, ms] : fa.per_attribute) {
      require(surface.per_attribute.contains(ref) &&
                  is_subsequence(ms, surface.per_attribute.at(ref)),
              "subsequence property violated at pair " + std::to_string(pairs));
    }
    auto stepwise = filter_surface(fa, b, corpus).surface;
    auto combined = filter_surface(surface, conjunction(a, b), corpus).surface;
    require(stepwise == combined,
            "composition law violated at pair " + std::to_string(pairs));
  }
  return std::to_string(pairs) + " generated pairs";
}

std::string what_if_loop() {
  const std::set<std::string> expected_added = {"CAPEC-88",      "CVE-TEST-0001",
                                                "CVE-TEST-0003", "CVE-TEST-0010",
                                                "CWE-20",        "CWE-78"};
  auto snapshot = write_snapshot(t::full_corpus());
  auto graphml = t::read_fixture("models/scada_centrifuge.graphml");

  service::Session session;
  service::HttpService http(session);
  require(http.bind("127.0.0.1", 0), "cannot bind");
  std::thread server([&] { http.serve(); });
  struct Stop {
    service::HttpService& h;
    std::thread& th;
    ~Stop() {
      h.stop();
      th.join();
    }
  } stop{http, server};
  while (!http.running()) std::this_thread::sleep_for(std::chrono::milliseconds(1));
  httplib::Client client("127.0.0.1", http.port());

  auto start = Clock::now();
  auto expect = [&](const httplib::Result& r, int status, const std::string& step) {
    require(r && r->status == status,
            step + " returned " + (r ? std::to_string(r->status) : "no response"));
    return json::parse(r->body.empty() ? "null" : r->body);
  };
  expect(client.Put("/corpus", snapshot, "text/plain"), 200, "PUT /corpus");
  auto up = expect(client.Post("/models", graphml, "application/xml"), 201, "POST /models");
  std::string id = up["model_id"];
  auto a1 = expect(client.Post("/models/" + id + "/analyze", "", "application/json"), 200,
                   "analyze v1");
  json patch = {{"mutations", json::array({{{"op", "set_attribute"},
                                            {"component", "programming_ws"},
                                            {"key", "os"},
                                            {"value", "Windows XP"}}})}};
  auto p = expect(client.Patch("/models/" + id, patch.dump(), "application/json"), 200,
                  "PATCH");
  require(p["version"] == 2, "PATCH did not create version 2");
  auto a2 = expect(client.Post("/models/" + id + "/analyze", "", "application/json"), 200,
                   "analyze v2");
  auto diff = expect(client.Get("/analyses/" + a1["analysis_id"].get<std::string>() +
                                "/diff/" + a2["analysis_id"].get<std::string>()),
                     200, "diff");
  double ms = ms_since(start);

  require(diff["attributes"].size() == 1, "diff touches " +
                                              std::to_string(diff["attributes"].size()) +
                                              " attributes, expected 1");
  const auto& entry = diff["attributes"][0];
  require(entry["scope"] == "component" && entry["owner"] == "programming_ws" &&
              entry["key"] == "os",
          "diff names the wrong attribute");
  std::set<std::string> added(entry["added"].begin(), entry["added"].end());
  require(added == expected_added, "added set differs from fixture expectation");
  require(entry["removed"].empty(), "unexpected removals");
  require(diff["net_delta"] == static_cast<int>(expected_added.size()), "net delta");
  require(ms < 2000, "loop took " + std::to_string(ms) + " ms");
  return "+" + std::to_string(added.size()) + " on programming_ws/os, " +
         std::to_string(ms) + " ms";
}

std::string exposure_conservation() {
  std::mt19937 rng(31);
  int surfaces = 0;
  auto check = [&](const AttackSurface& s) {
    auto report = exposure_report(s);
    std::size_t total = 0;
    for (const auto& row : report.rows) total += row.counts.total();
    require(total == s.total_matches(), "row totals do not sum to surface matches");
    auto csv = to_csv(report);
    require(csv.substr(0, csv.find('\n')) ==
                "component,attribute,attack_patterns,weaknesses,vulnerabilities,total",
            "CSV header shape");
    ++surfaces;
  };
  for (int i = 0; i < 500; ++i) {
    auto docs = t::random_documents(rng, 10);
    check(t::random_surface(rng, docs, "s"));
  }
  auto corpus = t::full_corpus();
  auto index = build_index(corpus);
  for (const auto& path : t::valid_model_fixtures()) {
    check(associate(t::load_model(path), index, corpus, {}));
  }
  return std::to_string(surfaces) + " surfaces";
}

std::string sensitivity_pair() {
  auto corpus = t::full_corpus();
  auto index = build_index(corpus);
  AssociationConfig cfg;
  auto generic = associate(t::load_model("models/sensitivity_generic.graphml"), index,
                           corpus, cfg);
  auto specific = associate(t::load_model("models/sensitivity_specific.graphml"), index,
                            corpus, cfg);
  require(generic.total_matches() > specific.total_matches(),
          "generic " + std::to_string(generic.total_matches()) + " <= specific " +
              std::to_string(specific.total_matches()));
  return "generic " + std::to_string(generic.total_matches()) + " > specific " +
         std::to_string(specific.total_matches());
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"GraphML round-trip", graphml_round_trip},
      {"Retrieval oracle equivalence", oracle_equivalence},
      {"CWE-78 scenario", cwe78_scenario},
      {"Cross-reference chain", crossref_chain},
      {"Filter laws", filter_laws},
      {"What-if loop end-to-end", what_if_loop},
      {"Exposure report conservation", exposure_conservation},
      {"Model-fidelity sensitivity", sensitivity_pair},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    std::string line;
    bool ok = false;
    try {
      line = c.check();
      ok = true;
    } catch (const Failure& f) {
      line = f.what;
    } catch (const std::exception& e) {
      line = std::string("exception: ") + e.what();
    }
    failed += !ok;
    std::cout << (ok ? "PASS " : "FAIL ") << c.name << ": " << line << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size()
            << " acceptance criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
