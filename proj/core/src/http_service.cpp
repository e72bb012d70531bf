#include <httplib.h>

#include <sstream>

#include "cpsec/graphml.hpp"
#include "cpsec/json_io.hpp"
#include "cpsec/service.hpp"

namespace cpsec::service {
namespace {

using nlohmann::json;

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict:
    case ErrorCode::kStaleComparison:
    case ErrorCode::kNoCorpus: return 409;
    case ErrorCode::kInternal: return 500;
    default: return 400;
  }
}

json error_body(std::string_view code, const std::string& message,
                const std::vector<std::string>& detail) {
  return {{"code", code}, {"message", message}, {"detail", detail}};
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& e, int status) {
  auto detail = e.detail();
  if (e.position()) {
    detail.insert(detail.begin(), "line " + std::to_string(e.position()->line) +
                                      ", column " +
                                      std::to_string(e.position()->column));
  }
  send_json(res, status, error_body(to_string(e.code()), e.what(), detail));
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kBadRequest, "request body is not valid JSON",
                {e.what()});
  }
}

// Runs `fn`, translating library errors into the shared error payload.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, e, status_for(e.code()));
    } catch (const std::exception& e) {
      send_json(res, 500, error_body("INTERNAL", e.what(), {}));
    }
  };
}

json summary_json(const CorpusSummary& s) {
  return {{"doc_count", s.doc_count},
          {"dangling_ref_count", s.dangling_ref_count},
          {"build_stamp", s.build_stamp}};
}

json version_json(const ModelVersion& v) {
  return {{"model_id", v.model_id},
          {"version", v.version},
          {"model", json_io::to_json(*v.model)}};
}

std::set<std::string> split_csv(const std::string& s) {
  std::set<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.insert(item);
  }
  return out;
}

std::optional<FilterSpec> filter_from_params(const httplib::Request& req) {
  json spec = json::object();
  if (req.has_param("kinds")) {
    json kinds = json::array();
    for (const auto& k : split_csv(req.get_param_value("kinds"))) kinds.push_back(k);
    spec["kinds"] = kinds;
  }
  if (req.has_param("keyword")) spec["keyword"] = req.get_param_value("keyword");
  if (req.has_param("min_severity")) {
    spec["min_severity"] = req.get_param_value("min_severity");
  }
  if (req.has_param("components")) {
    spec["components"] = split_csv(req.get_param_value("components"));
  }
  if (spec.empty()) return std::nullopt;
  return json_io::filter_from_json(spec);
}

std::size_t parse_version(const std::string& s) {
  try {
    std::size_t used = 0;
    auto v = std::stoull(s, &used);
    if (used == s.size() && v > 0) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kBadRequest, "version must be a positive integer");
}

}  // namespace

HttpService::HttpService(Session& session)
    : session_(session), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

HttpService::~HttpService() { stop(); }

bool HttpService::bind(const std::string& host, int port) {
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
    return port_ > 0;
  }
  if (!server_->bind_to_port(host, port)) return false;
  port_ = port;
  return true;
}

bool HttpService::serve() { return server_->listen_after_bind(); }

void HttpService::stop() {
  if (server_) server_->stop();
}

bool HttpService::running() const { return server_->is_running(); }

void HttpService::install_routes() {
  auto& s = *server_;
  s.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                         {"Access-Control-Allow-Headers", "Content-Type"},
                         {"Access-Control-Allow-Methods",
                          "GET, POST, PUT, PATCH, OPTIONS"}});
  s.Options(".*", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });

  s.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200,
              {{"status", "ok"}, {"corpus_loaded", session_.corpus() != nullptr}});
  });

  s.Put("/corpus", guarded([this](const auto& req, auto& res) {
          send_json(res, 200, summary_json(session_.load_corpus(req.body)));
        }));

  s.Get("/corpus", guarded([this](const auto&, auto& res) {
          auto summary = session_.corpus_summary();
          if (!summary) throw Error(ErrorCode::kNoCorpus, "no corpus loaded");
          send_json(res, 200, summary_json(*summary));
        }));

  s.Post("/models", guarded([this](const auto& req, auto& res) {
           auto up = session_.upload_model(req.body);
           json components = json::array();
           for (const auto& c : up.stored.model->components) {
             components.push_back({{"id", c.id}, {"name", c.name}});
           }
           json warnings = json::array();
           for (const auto& w : up.warnings) warnings.push_back(json_io::to_json(w));
           res.set_header("Location", "/models/" + up.stored.model_id);
           send_json(res, 201,
                     {{"model_id", up.stored.model_id},
                      {"version", up.stored.version},
                      {"components", components},
                      {"connection_count", up.stored.model->connections.size()},
                      {"warnings", warnings}});
         }));

  s.Get(R"(/models/([^/]+))", guarded([this](const auto& req, auto& res) {
          auto v = session_.model_version(req.matches[1]);
          auto body = version_json(v);
          body["versions"] = session_.version_count(req.matches[1]);
          send_json(res, 200, body);
        }));

  s.Get(R"(/models/([^/]+)/versions/([^/]+))",
        guarded([this](const auto& req, auto& res) {
          send_json(res, 200,
                    version_json(session_.model_version(
                        req.matches[1], parse_version(req.matches[2]))));
        }));

  s.Get(R"(/models/([^/]+)/graphml)", guarded([this](const auto& req, auto& res) {
          std::size_t version = req.has_param("version")
                                    ? parse_version(req.get_param_value("version"))
                                    : 0;
          auto v = session_.model_version(req.matches[1], version);
          res.set_content(serialize_model(*v.model), "application/xml");
        }));

  s.Patch(R"(/models/([^/]+))",
          guarded([this](const auto& req, auto& res) {
            std::string id = req.matches[1];
            session_.version_count(id);  // 404 before body validation
            std::vector<Mutation> batch;
            try {
              batch = json_io::mutations_from_json(parse_body(req));
            } catch (const Error& e) {
              // Malformed mutation payloads are client errors, not conflicts.
              throw Error(ErrorCode::kBadRequest, e.what(), e.detail());
            }
            PatchResult patched;
            try {
              patched = session_.patch_model(id, batch);
            } catch (const Error& e) {
              // A mutation naming an unknown entity conflicts with the model.
              if (e.code() != ErrorCode::kNotFound) throw;
              throw Error(ErrorCode::kConflict, e.what(), e.detail());
            }
            send_json(res, 200,
                      {{"model_id", id},
                       {"version", patched.stored.version},
                       {"diff", json_io::to_json(patched.diff)}});
          }));

  s.Post(R"(/models/([^/]+)/analyze)", guarded([this](const auto& req, auto& res) {
           std::string id = req.matches[1];
           session_.version_count(id);
           AssociationConfig config;
           if (req.body.find_first_not_of(" \t\r\n") != std::string::npos) {
             config = json_io::config_from_json(parse_body(req));
           }
           auto a = session_.analyze(id, config);
           send_json(res, 200,
                     {{"analysis_id", a->id},
                      {"model_id", a->model_id},
                      {"version", a->version},
                      {"corpus_stamp", a->surface.corpus_stamp},
                      {"report", json_io::to_json(exposure_report(a->surface))}});
         }));

  s.Get(R"(/analyses/([^/]+))", guarded([this](const auto& req, auto& res) {
          auto a = session_.analysis(req.matches[1]);
          json warnings = json::array();
          json surface;
          if (auto spec = filter_from_params(req)) {
            auto handle = session_.corpus();
            if (!handle || handle->corpus.build_stamp() != a->surface.corpus_stamp) {
              throw Error(ErrorCode::kStaleComparison,
                          "the loaded corpus no longer matches this analysis");
            }
            auto filtered = filter_surface(a->surface, *spec, handle->corpus);
            surface = json_io::to_json(filtered.surface);
            for (const auto& w : filtered.warnings) warnings.push_back(json_io::to_json(w));
          } else {
            surface = json_io::to_json(a->surface);
          }
          send_json(res, 200,
                    {{"analysis_id", a->id},
                     {"model_id", a->model_id},
                     {"version", a->version},
                     {"surface", surface},
                     {"warnings", warnings}});
        }));

  s.Get(R"(/analyses/([^/]+)/report)", guarded([this](const auto& req, auto& res) {
          auto report = exposure_report(session_.analysis(req.matches[1])->surface);
          if (req.get_param_value("format") == "csv") {
            res.set_content(to_csv(report), "text/csv");
          } else {
            send_json(res, 200, json_io::to_json(report));
          }
        }));

  s.Get(R"(/analyses/([^/]+)/severity)", guarded([this](const auto& req, auto& res) {
          auto a = session_.analysis(req.matches[1]);
          auto handle = session_.corpus();
          if (!handle || handle->corpus.build_stamp() != a->surface.corpus_stamp) {
            throw Error(ErrorCode::kStaleComparison,
                        "the loaded corpus no longer matches this analysis");
          }
          send_json(res, 200,
                    json_io::to_json(severity_view(a->surface, handle->corpus)));
        }));

  s.Get(R"(/analyses/([^/]+)/diff/([^/]+))",
        guarded([this](const auto& req, auto& res) {
          send_json(res, 200,
                    json_io::to_json(session_.diff(req.matches[1], req.matches[2])));
        }));
}

}  // namespace cpsec::service
