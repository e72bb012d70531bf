// cpsec: batch front end for the security analysis workbench.
//
//   cpsec ingest  --capec F --cwe F --cve F --out SNAPSHOT
//   cpsec analyze --model M.graphml --corpus SNAPSHOT [--config C.json]
//                 [--format csv|json] [--surface-out S.json]
//   cpsec diff    --before S1.json --after S2.json
//   cpsec serve   --listen HOST:PORT --corpus SNAPSHOT [--persist DIR]
//
// Exit codes: 0 success or empty diff, 1 input error, 2 usage error,
// 3 non-empty diff.

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cpsec/analysis.hpp"
#include "cpsec/corpus.hpp"
#include "cpsec/graphml.hpp"
#include "cpsec/json_io.hpp"
#include "cpsec/retrieval.hpp"
#include "cpsec/service.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDiff = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw cpsec::Error(cpsec::ErrorCode::kNotFound, "cannot read " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) {
    throw cpsec::Error(cpsec::ErrorCode::kInternal, "cannot write " + path);
  }
}

void report_error(const cpsec::Error& e) {
  std::cerr << "error: " << cpsec::to_string(e.code()) << ": " << e.what() << "\n";
  for (const auto& d : e.detail()) std::cerr << "  " << d << "\n";
}

void print_warnings(std::string_view source,
                    const std::vector<cpsec::Warning>& warnings) {
  for (const auto& w : warnings) {
    std::cerr << "warning: " << source << ": " << w.code << ": " << w.message
              << "\n";
  }
}

struct IngestOptions {
  std::vector<std::string> capec;
  std::vector<std::string> cwe;
  std::vector<std::string> cve;
  std::string out;
};

int run_ingest(const IngestOptions& opt) {
  using Parser = cpsec::Parsed<std::vector<cpsec::AttackVectorDocument>> (*)(
      std::string_view);
  std::vector<cpsec::AttackVectorDocument> docs;
  auto load = [&](const std::vector<std::string>& files, Parser parse) {
    for (const auto& f : files) {
      auto parsed = parse(read_file(f));
      print_warnings(f, parsed.warnings);
      std::move(parsed.value.begin(), parsed.value.end(), std::back_inserter(docs));
    }
  };
  load(opt.capec, &cpsec::parse_attack_patterns);
  load(opt.cwe, &cpsec::parse_weaknesses);
  load(opt.cve, &cpsec::parse_vulnerabilities);

  auto corpus = cpsec::build_corpus(std::move(docs));
  print_warnings("corpus", corpus.warnings());
  write_file(opt.out, cpsec::write_snapshot(corpus));

  std::size_t per_kind[3] = {0, 0, 0};
  for (const auto& [id, doc] : corpus.documents()) {
    ++per_kind[static_cast<int>(doc.kind)];
  }
  std::cerr << "wrote " << corpus.size() << " documents to " << opt.out << " ("
            << per_kind[0] << " attack patterns, " << per_kind[1]
            << " weaknesses, " << per_kind[2] << " vulnerabilities); "
            << corpus.dangling_refs().size() << " dangling cross-refs; stamp "
            << corpus.build_stamp() << "\n";
  return kExitOk;
}

struct AnalyzeOptions {
  std::string model;
  std::string corpus;
  std::string config;
  std::string format = "csv";
  std::string surface_out;
};

int run_analyze(const AnalyzeOptions& opt) {
  auto parsed = cpsec::parse_model(read_file(opt.model));
  print_warnings(opt.model, parsed.warnings);
  auto corpus = cpsec::read_snapshot(read_file(opt.corpus));
  cpsec::AssociationConfig config;
  if (!opt.config.empty()) {
    try {
      config = cpsec::json_io::config_from_json(
          nlohmann::json::parse(read_file(opt.config)));
    } catch (const nlohmann::json::parse_error& e) {
      throw cpsec::Error(cpsec::ErrorCode::kConfig,
                         opt.config + " is not valid JSON", {e.what()});
    }
  }
  auto index = cpsec::build_index(corpus);
  auto surface = cpsec::associate(parsed.model, index, corpus, config);
  if (!opt.surface_out.empty()) {
    write_file(opt.surface_out, cpsec::json_io::to_json(surface).dump(2) + "\n");
  }
  auto report = cpsec::exposure_report(surface);
  if (opt.format == "json") {
    std::cout << cpsec::json_io::to_json(report).dump(2) << "\n";
  } else {
    std::cout << cpsec::to_csv(report);
  }
  return kExitOk;
}

cpsec::AttackSurface load_surface(const std::string& path) {
  try {
    return cpsec::json_io::surface_from_json(
        nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw cpsec::Error(cpsec::ErrorCode::kParse, path + " is not valid JSON",
                       {e.what()});
  }
}

int run_diff(const std::string& before, const std::string& after) {
  auto diff = cpsec::compare_surfaces(load_surface(before), load_surface(after));
  std::cout << cpsec::json_io::to_json(diff).dump(2) << "\n";
  return diff.empty() ? kExitOk : kExitDiff;
}

cpsec::service::HttpService* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

int run_serve(const std::string& listen, const std::string& corpus_path,
              const std::string& persist) {
  auto colon = listen.rfind(':');
  std::string host = colon == std::string::npos ? "127.0.0.1" : listen.substr(0, colon);
  if (host.empty()) host = "0.0.0.0";
  int port = 0;
  try {
    port = std::stoi(colon == std::string::npos ? listen : listen.substr(colon + 1));
  } catch (const std::exception&) {
    std::cerr << "error: invalid listen address '" << listen << "'\n";
    return kExitUsage;
  }

  std::optional<std::filesystem::path> persist_dir;
  if (!persist.empty()) persist_dir = persist;
  cpsec::service::Session session(persist_dir);
  auto summary = session.load_corpus(read_file(corpus_path));

  cpsec::service::HttpService service(session);
  if (!service.bind(host, port)) {
    std::cerr << "error: cannot bind " << host << ":" << port << "\n";
    return kExitInput;
  }
  g_service = &service;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "serving " << summary.doc_count << " documents (stamp "
            << summary.build_stamp << ") on http://" << host << ":"
            << service.port() << "\n";
  service.serve();
  g_service = nullptr;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-based security analysis workbench for cyber-physical systems"};
  app.require_subcommand(1);

  IngestOptions ingest;
  auto* ingest_cmd = app.add_subcommand(
      "ingest", "Normalize attack-pattern, weakness, and vulnerability catalogs "
                "into a corpus snapshot");
  ingest_cmd->add_option("--capec", ingest.capec, "CAPEC-style XML catalog");
  ingest_cmd->add_option("--cwe", ingest.cwe, "CWE-style XML catalog");
  ingest_cmd->add_option("--cve", ingest.cve, "NVD-style JSON feed");
  ingest_cmd->add_option("--out", ingest.out, "Snapshot to write")->required();

  AnalyzeOptions analyze;
  auto* analyze_cmd = app.add_subcommand(
      "analyze", "Associate a model with a corpus and print the exposure report");
  analyze_cmd->add_option("--model", analyze.model, "GraphML model")->required();
  analyze_cmd->add_option("--corpus", analyze.corpus, "Corpus snapshot")->required();
  analyze_cmd->add_option("--config", analyze.config, "AssociationConfig JSON");
  analyze_cmd->add_option("--format", analyze.format, "Report format")
      ->check(CLI::IsMember({"csv", "json"}));
  analyze_cmd->add_option("--surface-out", analyze.surface_out,
                          "Write the full attack surface as JSON");

  std::string before, after;
  auto* diff_cmd = app.add_subcommand("diff", "Compare two attack surfaces");
  diff_cmd->add_option("--before", before, "Baseline surface JSON")->required();
  diff_cmd->add_option("--after", after, "Candidate surface JSON")->required();

  std::string listen = "127.0.0.1:8080", serve_corpus, persist;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP/JSON service");
  serve_cmd->add_option("--listen", listen, "HOST:PORT")->capture_default_str();
  serve_cmd->add_option("--corpus", serve_corpus, "Corpus snapshot to preload")
      ->required();
  serve_cmd->add_option("--persist", persist,
                        "Directory receiving stored models and analyses");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*ingest_cmd) {
      if (ingest.capec.empty() && ingest.cwe.empty() && ingest.cve.empty()) {
        std::cerr << "error: ingest needs at least one of --capec, --cwe, --cve\n"
                  << ingest_cmd->help();
        return kExitUsage;
      }
      return run_ingest(ingest);
    }
    if (*analyze_cmd) return run_analyze(analyze);
    if (*diff_cmd) return run_diff(before, after);
    if (*serve_cmd) return run_serve(listen, serve_corpus, persist);
  } catch (const cpsec::Error& e) {
    report_error(e);
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitUsage;
}
