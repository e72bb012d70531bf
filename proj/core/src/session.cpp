#include <fstream>

#include "cpsec/graphml.hpp"
#include "cpsec/json_io.hpp"
#include "cpsec/service.hpp"
#include "digest.hpp"

namespace cpsec::service {

struct Session::ModelRecord {
  std::string id;
  /// Serializes writers; readers only take it to copy a version pointer.
  mutable std::mutex mutex;
  std::vector<std::shared_ptr<const SystemModel>> versions;
};

Session::Session(std::optional<std::filesystem::path> persist_dir)
    : persist_dir_(std::move(persist_dir)) {
  if (persist_dir_) std::filesystem::create_directories(*persist_dir_);
}

Session::~Session() = default;

CorpusSummary Session::load_corpus(std::string_view snapshot) {
  return set_corpus(read_snapshot(snapshot));
}

CorpusSummary Session::set_corpus(Corpus corpus) {
  auto index = build_index(corpus);
  auto handle = std::make_shared<const CorpusHandle>(
      CorpusHandle{std::move(corpus), std::move(index)});
  CorpusSummary summary{handle->corpus.size(),
                        handle->corpus.dangling_refs().size(),
                        handle->corpus.build_stamp()};
  std::unique_lock lock(mutex_);
  corpus_ = std::move(handle);
  return summary;
}

std::optional<CorpusSummary> Session::corpus_summary() const {
  auto handle = corpus();
  if (!handle) return std::nullopt;
  return CorpusSummary{handle->corpus.size(),
                       handle->corpus.dangling_refs().size(),
                       handle->corpus.build_stamp()};
}

std::shared_ptr<const CorpusHandle> Session::corpus() const {
  std::shared_lock lock(mutex_);
  return corpus_;
}

UploadResult Session::upload_model(std::string_view graphml) {
  auto parsed = parse_model(graphml);
  auto record = std::make_shared<ModelRecord>();
  record->versions.push_back(
      std::make_shared<const SystemModel>(std::move(parsed.model)));
  {
    std::unique_lock lock(mutex_);
    record->id = "m" + std::to_string(next_model_++);
    models_.emplace(record->id, record);
  }
  persist(std::filesystem::path("models") / record->id / "v1.graphml",
          serialize_model(*record->versions.front()));
  return {{record->id, 1, record->versions.front()}, std::move(parsed.warnings)};
}

PatchResult Session::patch_model(const std::string& model_id,
                                 const std::vector<Mutation>& batch) {
  if (batch.empty()) {
    throw Error(ErrorCode::kBadRequest, "mutation list is empty");
  }
  auto rec = record(model_id);
  std::lock_guard lock(rec->mutex);
  const auto& latest = rec->versions.back();
  auto next = std::make_shared<const SystemModel>(apply_mutations(*latest, batch));
  auto diff = diff_models(*latest, *next);
  std::size_t version = rec->versions.size() + 1;
  persist(std::filesystem::path("models") / model_id /
              ("v" + std::to_string(version) + ".graphml"),
          serialize_model(*next));
  rec->versions.push_back(next);
  return {{model_id, version, next}, std::move(diff)};
}

ModelVersion Session::model_version(const std::string& model_id,
                                    std::size_t version) const {
  auto rec = record(model_id);
  std::lock_guard lock(rec->mutex);
  if (version == 0) version = rec->versions.size();
  if (version > rec->versions.size()) {
    throw Error(ErrorCode::kNotFound,
                "model '" + model_id + "' has no version " + std::to_string(version));
  }
  return {model_id, version, rec->versions[version - 1]};
}

std::size_t Session::version_count(const std::string& model_id) const {
  auto rec = record(model_id);
  std::lock_guard lock(rec->mutex);
  return rec->versions.size();
}

std::shared_ptr<const Analysis> Session::analyze(const std::string& model_id,
                                                 const AssociationConfig& config) {
  validate_config(config);
  auto handle = corpus();
  if (!handle) {
    throw Error(ErrorCode::kNoCorpus, "no corpus loaded; PUT /corpus first");
  }
  auto target = model_version(model_id);
  auto id = "a-" + detail::sha256_hex(model_id + "\n" +
                                      std::to_string(target.version) + "\n" +
                                      json_io::to_json(config).dump() + "\n" +
                                      handle->corpus.build_stamp())
                       .substr(0, 16);
  {
    std::shared_lock lock(mutex_);
    if (auto it = analyses_.find(id); it != analyses_.end()) return it->second;
  }

  auto result = std::make_shared<const Analysis>(Analysis{
      id, model_id, target.version,
      associate(*target.model, handle->index, handle->corpus, config)});
  {
    std::unique_lock lock(mutex_);
    auto [it, inserted] = analyses_.emplace(id, result);
    if (!inserted) return it->second;
  }
  persist(std::filesystem::path("analyses") / (id + ".json"),
          json_io::to_json(result->surface).dump(2));
  return result;
}

std::shared_ptr<const Analysis> Session::analysis(
    const std::string& analysis_id) const {
  std::shared_lock lock(mutex_);
  auto it = analyses_.find(analysis_id);
  if (it == analyses_.end()) {
    throw Error(ErrorCode::kNotFound, "no analysis '" + analysis_id + "'");
  }
  return it->second;
}

SurfaceDiff Session::diff(const std::string& before_id,
                          const std::string& after_id) const {
  return compare_surfaces(analysis(before_id)->surface,
                          analysis(after_id)->surface);
}

std::shared_ptr<Session::ModelRecord> Session::record(
    const std::string& model_id) const {
  std::shared_lock lock(mutex_);
  auto it = models_.find(model_id);
  if (it == models_.end()) {
    throw Error(ErrorCode::kNotFound, "no model '" + model_id + "'");
  }
  return it->second;
}

void Session::persist(const std::filesystem::path& relative,
                      std::string_view content) const {
  if (!persist_dir_) return;
  auto path = *persist_dir_ / relative;
  std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) {
      throw Error(ErrorCode::kInternal, "cannot write " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace cpsec::service
