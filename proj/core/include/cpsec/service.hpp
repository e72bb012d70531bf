#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "cpsec/analysis.hpp"
#include "cpsec/corpus.hpp"
#include "cpsec/model.hpp"
#include "cpsec/retrieval.hpp"

namespace httplib {
class Server;
}

namespace cpsec::service {

/// Corpus plus the index built over it; replaced wholesale on upload.
struct CorpusHandle {
  Corpus corpus;
  RetrievalIndex index;
};

struct CorpusSummary {
  std::size_t doc_count = 0;
  std::size_t dangling_ref_count = 0;
  std::string build_stamp;
};

struct ModelVersion {
  std::string model_id;
  std::size_t version = 0;
  std::shared_ptr<const SystemModel> model;
};

struct UploadResult {
  ModelVersion stored;
  std::vector<Warning> warnings;
};

struct PatchResult {
  ModelVersion stored;
  ModelDiff diff;
};

struct Analysis {
  std::string id;
  std::string model_id;
  std::size_t version = 0;
  AttackSurface surface;
};

/// In-memory analyst session: one service-global corpus, many models with
/// append-only version histories, and immutable analyses. Thread-safe.
/// Writes to one model are serialized; analyses run on snapshots taken under
/// a shared lock.
class Session {
 public:
  /// When `persist_dir` is set, every stored model version is written to
  /// <dir>/models/<id>/v<n>.graphml and every analysis to
  /// <dir>/analyses/<id>.json.
  explicit Session(std::optional<std::filesystem::path> persist_dir = {});
  ~Session();

  /// Parses a snapshot and swaps in the new corpus and index atomically.
  CorpusSummary load_corpus(std::string_view snapshot);
  CorpusSummary set_corpus(Corpus corpus);
  std::optional<CorpusSummary> corpus_summary() const;
  std::shared_ptr<const CorpusHandle> corpus() const;

  UploadResult upload_model(std::string_view graphml);
  /// Applies the batch to the latest version as one new version. Throws
  /// Error(kBadRequest) for an empty batch, Error(kNotFound) for an unknown
  /// model, and the mutation's error otherwise (no version is created).
  PatchResult patch_model(const std::string& model_id,
                          const std::vector<Mutation>& batch);
  /// version 0 means latest.
  ModelVersion model_version(const std::string& model_id,
                             std::size_t version = 0) const;
  std::size_t version_count(const std::string& model_id) const;

  /// Runs association on the latest version. Analysis ids are derived from
  /// (model id, version, config, corpus stamp), so repeating an analysis
  /// returns the stored one. Throws Error(kNoCorpus) before a corpus upload.
  std::shared_ptr<const Analysis> analyze(const std::string& model_id,
                                          const AssociationConfig& config);
  std::shared_ptr<const Analysis> analysis(const std::string& analysis_id) const;
  SurfaceDiff diff(const std::string& before_id, const std::string& after_id) const;

 private:
  struct ModelRecord;

  std::shared_ptr<ModelRecord> record(const std::string& model_id) const;
  void persist(const std::filesystem::path& relative, std::string_view content) const;

  std::optional<std::filesystem::path> persist_dir_;
  mutable std::shared_mutex mutex_;
  std::shared_ptr<const CorpusHandle> corpus_;
  std::map<std::string, std::shared_ptr<ModelRecord>> models_;
  std::map<std::string, std::shared_ptr<const Analysis>> analyses_;
  std::size_t next_model_ = 1;
};

/// HTTP/JSON facade over a Session.
///
///   GET   /healthz
///   PUT   /corpus                      line-delimited JSON snapshot
///   GET   /corpus
///   POST  /models                      GraphML body
///   GET   /models/{id}                 latest version
///   GET   /models/{id}/versions/{n}
///   GET   /models/{id}/graphml[?version=n]
///   PATCH /models/{id}                 {"mutations": [...]}
///   POST  /models/{id}/analyze         AssociationConfig JSON (optional)
///   GET   /analyses/{id}[?kinds=&keyword=&min_severity=&components=]
///   GET   /analyses/{id}/report[?format=csv]
///   GET   /analyses/{id}/severity
///   GET   /analyses/{a}/diff/{b}
///
/// Errors are {code, message, detail} with a matching HTTP status.
class HttpService {
 public:
  explicit HttpService(Session& session);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Binds without serving; returns false on failure. Port 0 picks a free
  /// port, reported by port().
  bool bind(const std::string& host, int port);
  int port() const { return port_; }
  /// Blocks until stop().
  bool serve();
  void stop();
  bool running() const;

 private:
  void install_routes();

  Session& session_;
  std::unique_ptr<httplib::Server> server_;
  int port_ = -1;
};

}  // namespace cpsec::service
