/* Copyright 2026 The layoutplan Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// JSON-over-HTTP service. Routes and bodies are documented in
// docs/schemas.md.
//
//   POST /sessions                  {spec, initial?}  -> {session_id, ...}
//   POST /sessions/{id}/message     {text}            -> {revision_index, layout, applied_route}
//   GET  /sessions/{id}/layout.svg                    -> SVG of the latest revision
//   GET  /sessions/{id}/history                       -> {session_id, revisions}
//   POST /plan                      {spec, k, retry?} -> {outcome, raw_reply, ...}
//   POST /evaluate                  {gen_file, ref_file, mode, format?} -> report
//   GET  /health

#pragma once

#include <atomic>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "httplib.h"
#include "layoutplan/backend.hpp"
#include "layoutplan/evaluation.hpp"
#include "layoutplan/io.hpp"
#include "layoutplan/planner.hpp"
#include "layoutplan/prompt.hpp"
#include "layoutplan/session.hpp"
#include "layoutplan/svg.hpp"

namespace layoutplan {

// Retrieval corpus lines: {"id", "prompt", "layout"} (pipeline output is
// accepted as is; other fields are ignored).
inline std::vector<CorpusItem> load_corpus(const std::string& path) {
  std::vector<CorpusItem> out;
  const auto lines = read_jsonl(path);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const Json& j = lines[n];
    const std::string where = path + ":" + std::to_string(n + 1);
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("prompt") ||
        !j["prompt"].is_string() || !j.contains("layout")) {
      throw Error(ErrorCode::kSchemaError, where + ": expected id, prompt and layout");
    }
    out.push_back({j["id"].get<std::string>(), j["prompt"].get<std::string>(),
                   layout_from_json(j["layout"], where)});
  }
  return out;
}

inline int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSessionNotFound: return 404;
    case ErrorCode::kBackendProtocolError:
    case ErrorCode::kProviderError:
      return 502;
    case ErrorCode::kNoBackend: return 503;
    case ErrorCode::kBackendTimeout: return 504;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kSchemaError:
    case ErrorCode::kEmptyInput:
    case ErrorCode::kAlignmentError:
      return 400;
    default: return 422;
  }
}

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  // Empty disables authentication; otherwise requests need
  // "Authorization: Bearer <token>".
  std::string token;
  SessionOptions sessions;
  // Repair rounds for /plan unless the request sets "retry".
  int plan_retry = 1;
  unsigned eval_workers = 1;
  // Text embeddings for retrieval and open-set evaluation; trigrams when
  // null. Must be the provider the retrieval index was built with.
  std::shared_ptr<const EmbeddingProvider> embedder;
};

class Service {
 public:
  Service(ServiceOptions opts, std::shared_ptr<Backend> backend,
          std::optional<RetrievalIndex> index = std::nullopt)
      : opts_(std::move(opts)),
        backend_(backend),
        sessions_(backend, opts_.sessions),
        index_(std::move(index)),
        embedder_(opts_.embedder ? opts_.embedder : std::make_shared<TrigramEmbedding>()) {
    sessions_.restore();
    routes();
  }

  ~Service() { stop(); }

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds and serves on a background thread; returns the bound port.
  int start() {
    int port = opts_.port;
    if (port == 0) {
      port = server_.bind_to_any_port(opts_.host);
    } else if (!server_.bind_to_port(opts_.host, port)) {
      port = -1;
    }
    if (port < 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "cannot bind " + opts_.host + ":" + std::to_string(opts_.port));
    }
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port;
  }

  // Serves on the calling thread until stop().
  void run() {
    if (!server_.listen(opts_.host, opts_.port)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "cannot bind " + opts_.host + ":" + std::to_string(opts_.port));
    }
  }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  SessionManager& sessions() { return sessions_; }

 private:
  using Req = httplib::Request;
  using Res = httplib::Response;

  static void send_json(Res& res, const OrderedJson& j, int status = 200) {
    res.status = status;
    res.set_content(j.dump(), "application/json");
  }

  static void send_error(Res& res, int status, std::string_view code, const std::string& msg) {
    OrderedJson j;
    j["error"] = {{"code", std::string(code)}, {"message", msg}};
    send_json(res, j, status);
  }

  static Json body_of(const Req& req) {
    Json j = Json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw Error(ErrorCode::kSchemaError, "request body must be a JSON object");
    }
    return j;
  }

  // Wraps a handler with authentication and error mapping.
  template <typename F>
  httplib::Server::Handler guarded(F f) {
    return [this, f](const Req& req, Res& res) {
      if (!opts_.token.empty() && req.get_header_value("Authorization") != "Bearer " + opts_.token) {
        send_error(res, 401, "Unauthorized", "missing or wrong bearer token");
        return;
      }
      try {
        f(req, res);
      } catch (const Error& e) {
        send_error(res, http_status_for(e.code()), to_string(e.code()), e.what());
      } catch (const Json::exception& e) {
        send_error(res, 400, "SchemaError", e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "Internal", e.what());
      }
    };
  }

  void routes() {
    server_.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                 {"Access-Control-Allow-Headers", "Authorization, Content-Type"},
                                 {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    server_.Options(R"(.*)", [](const Req&, Res& res) { res.status = 204; });

    server_.Get("/health", [this](const Req&, Res& res) {
      OrderedJson j;
      j["status"] = "ok";
      j["backend"] = backend_ != nullptr;
      j["retrieval_corpus"] = index_ ? index_->size() : 0;
      send_json(res, j);
    });

    server_.Post("/sessions", guarded([this](const Req& req, Res& res) {
      const Json body = body_of(req);
      if (!body.contains("spec")) throw Error(ErrorCode::kSchemaError, "missing 'spec'");
      const PromptSpec spec = prompt_spec_from_json(body["spec"]);
      std::optional<Layout> initial;
      if (body.contains("initial") && !body["initial"].is_null()) {
        initial = layout_from_json(body["initial"], "initial");
      }
      const std::string id = sessions_.create(spec, std::move(initial));
      OrderedJson j;
      j["session_id"] = id;
      j["revision_index"] = 0;
      j["layout"] = to_json(sessions_.latest(id));
      send_json(res, j, 201);
    }));

    server_.Post(R"(/sessions/([^/]+)/message)", guarded([this](const Req& req, Res& res) {
      const Json body = body_of(req);
      if (!body.contains("text") || !body["text"].is_string()) {
        throw Error(ErrorCode::kSchemaError, "missing string 'text'");
      }
      const StepResult r = sessions_.step(req.matches[1], body["text"].get<std::string>());
      OrderedJson j;
      j["revision_index"] = r.revision_index;
      j["layout"] = to_json(r.revision.layout);
      j["applied_route"] = std::string(to_string(r.revision.origin));
      if (r.revision.origin == RevisionOrigin::kDeterministicEdit) {
        j["requested"] = r.revision.requested;
        j["applied"] = r.revision.applied;
      } else {
        j["repair_count"] = r.revision.repair_count;
      }
      send_json(res, j);
    }));

    server_.Get(R"(/sessions/([^/]+)/layout\.svg)", guarded([this](const Req& req, Res& res) {
      res.set_content(render_svg(sessions_.latest(req.matches[1])), "image/svg+xml");
    }));

    server_.Get(R"(/sessions/([^/]+)/history)", guarded([this](const Req& req, Res& res) {
      const std::string id = req.matches[1];
      OrderedJson j;
      j["session_id"] = id;
      j["spec"] = to_json(sessions_.spec(id));
      j["revisions"] = OrderedJson::array();
      for (const auto& r : sessions_.history(id)) j["revisions"].push_back(to_json(r));
      send_json(res, j);
    }));

    server_.Post("/plan", guarded([this](const Req& req, Res& res) {
      const Json body = body_of(req);
      if (!body.contains("spec")) throw Error(ErrorCode::kSchemaError, "missing 'spec'");
      const PromptSpec spec = prompt_spec_from_json(body["spec"]);
      const int k = body.value("k", 0);
      const int retry = body.value("retry", opts_.plan_retry);
      if (k < 0 || retry < 0) throw Error(ErrorCode::kInvalidArgument, "k and retry must be >= 0");
      if (!backend_) throw Error(ErrorCode::kNoBackend, "no backend is configured");
      if (k > 0 && !index_) {
        throw Error(ErrorCode::kInvalidArgument, "no retrieval corpus is loaded; use k = 0");
      }
      const RetrievalIndex empty;
      const auto demos = retrieve_demonstrations(spec.caption, index_ ? *index_ : empty,
                                                 static_cast<std::size_t>(k), *embedder_,
                                                 spec.format);
      const PlanResult p = plan_layout(spec, demos, *backend_, retry);
      OrderedJson j;
      j["outcome"] = to_json(p.outcome);
      j["raw_reply"] = p.raw_reply;
      j["repair_count"] = p.repair_count;
      j["demonstrations"] = OrderedJson::array();
      for (const auto& d : demos) j["demonstrations"].push_back(d.source_id);
      send_json(res, j);
    }));

    server_.Post("/evaluate", guarded([this](const Req& req, Res& res) {
      const Json body = body_of(req);
      for (const char* key : {"gen_file", "ref_file"}) {
        if (!body.contains(key) || !body[key].is_string()) {
          throw Error(ErrorCode::kSchemaError, std::string("missing string '") + key + "'");
        }
      }
      const auto mode = match_mode_from_string(body.value("mode", std::string("closed")));
      if (!mode) throw Error(ErrorCode::kSchemaError, "mode must be closed or open");
      LayoutFormat fallback = LayoutFormat::int128();
      if (body.contains("format")) {
        const auto f = LayoutFormat::from_name(body.value("format", std::string()));
        if (!f) throw Error(ErrorCode::kSchemaError, "unknown format");
        fallback = *f;
      }
      const EvalReport r = evaluate_files(body["gen_file"].get<std::string>(),
                                          body["ref_file"].get<std::string>(), *mode, fallback,
                                          opts_.eval_workers, embedder_.get());
      OrderedJson j = to_json(r);
      j["items"] = OrderedJson::array();
      for (const auto& d : r.items) j["items"].push_back(to_json(d));
      send_json(res, j);
    }));
  }

  ServiceOptions opts_;
  std::shared_ptr<Backend> backend_;
  SessionManager sessions_;
  std::optional<RetrievalIndex> index_;
  std::shared_ptr<const EmbeddingProvider> embedder_;
  httplib::Server server_;
  std::thread thread_;
};

}  // namespace layoutplan
