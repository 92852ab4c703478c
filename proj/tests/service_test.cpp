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

// HTTP service and chat backend tests. Everything binds to 127.0.0.1 on a
// free port; nothing leaves the machine.

#include "layoutplan/service.hpp"

#include "layoutplan/remote_embedding.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

namespace layoutplan {
namespace {

const std::string kData = LAYOUTPLAN_TEST_DATA;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Structural equality with a numeric tolerance, so goldens survive libm
// differences in the last bits.
bool json_near(const Json& a, const Json& b, double tol) {
  if (a.is_number() && b.is_number()) {
    return std::abs(a.get<double>() - b.get<double>()) <= tol;
  }
  if (a.type() != b.type() || a.size() != b.size()) return false;
  if (a.is_object()) {
    for (auto it = a.begin(); it != a.end(); ++it) {
      if (!b.contains(it.key()) || !json_near(it.value(), b[it.key()], tol)) return false;
    }
    return true;
  }
  if (a.is_array()) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!json_near(a[i], b[i], tol)) return false;
    }
    return true;
  }
  return a == b;
}

// ---------------------------------------------------------------------------
// Evaluation files
// ---------------------------------------------------------------------------

TEST(EvalFiles, ParsesInReferenceFormat) {
  const auto in = parse_eval_inputs(read_jsonl(kData + "/eval/gen.jsonl"),
                                    read_jsonl(kData + "/eval/ref.jsonl"));
  ASSERT_EQ(in.references.size(), 6u);
  ASSERT_EQ(in.generated.size(), 6u);
  // r3 is CSS inside a code fence; r6 is on the 1024 grid.
  EXPECT_TRUE(in.generated[2].outcome.ok());
  EXPECT_EQ(in.generated[2].outcome.layout->elements[0].bbox, (BBox{50, 40, 80, 70}));
  EXPECT_TRUE(in.generated[5].outcome.ok());
  EXPECT_DOUBLE_EQ(in.generated[5].outcome.layout->elements[0].bbox.left, 100.0 / 1024 * 128);
  EXPECT_EQ(*in.generated[3].outcome.failure, FailureReason::kSyntaxError);
  EXPECT_EQ(*in.generated[4].outcome.failure, FailureReason::kInvertedBox);
  EXPECT_EQ(in.references[3].layout.elements[1].label, "red car");
}

TEST(EvalFiles, ReportMatchesGolden) {
  const auto r = evaluate_files(kData + "/eval/gen.jsonl", kData + "/eval/ref.jsonl",
                                MatchMode::kClosed);
  EXPECT_EQ(r.n_success, 4u);
  EXPECT_NEAR(r.fail_percent, 100.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(r.items[0].max_iou, 1.0);
  // r2 by hand: kite 728 / 1068, person 2048 / 2928, averaged.
  EXPECT_NEAR(r.items[1].max_iou, (728.0 / 1068.0 + 2048.0 / 2928.0) / 2.0, 1e-12);
  // Failures score zero in the penalized mean.
  EXPECT_NEAR(r.max_iou, r.max_iou_success * 4.0 / 6.0, 1e-12);

  OrderedJson j = to_json(r);
  j["items"] = OrderedJson::array();
  for (const auto& d : r.items) j["items"].push_back(to_json(d));
  const std::string text = j.dump(2) + "\n";
  const std::string path = kData + "/eval/report_closed.json";
  if (std::getenv("LAYOUTPLAN_UPDATE_GOLDEN")) {
    std::ofstream(path, std::ios::binary) << text;
    GTEST_SKIP() << "rewrote " << path;
  }
  EXPECT_TRUE(json_near(Json::parse(slurp(path)), Json::parse(text), 1e-9));
}

TEST(EvalFiles, SchemaErrors) {
  const Json bad_ref = Json::parse(R"({"id": "x", "format": "nope", "target": "a: [1,2,3,4]"})");
  EXPECT_THROW(parse_eval_inputs({}, {bad_ref}), Error);
  const Json no_id = Json::parse(R"({"output": "a: [1,2,3,4]"})");
  EXPECT_THROW(parse_eval_inputs({no_id}, {}), Error);
  EXPECT_THROW(evaluate_files("/nonexistent/gen.jsonl", kData + "/eval/ref.jsonl",
                              MatchMode::kClosed),
               Error);
}

// ---------------------------------------------------------------------------
// Chat backend over HTTP, against a local fake
// ---------------------------------------------------------------------------

class FakeChatServer {
 public:
  explicit FakeChatServer(httplib::Server::Handler h,
                          const std::string& path = "/v1/chat/completions") {
    server_.Post(path, std::move(h));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeChatServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

BackendConfig config_for(const std::string& url) {
  BackendConfig c;
  c.endpoint = url;
  c.timeout_s = 2.0;
  return c;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::kInvalidArgument;
}

TEST(HttpBackend, SendsChatRequestAndReadsReply) {
  Json seen;
  std::string auth;
  FakeChatServer fake([&](const httplib::Request& req, httplib::Response& res) {
    seen = Json::parse(req.body);
    auth = req.get_header_value("Authorization");
    res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"dog: [1, 2, 3, 4]"}}]})",
                    "application/json");
  });
  BackendConfig c = config_for(fake.url());
  c.api_key = "k123";
  HttpChatBackend backend(c);
  EXPECT_EQ(backend.complete({{"user", "hello"}}), "dog: [1, 2, 3, 4]");
  EXPECT_EQ(seen["model"], "layout-planner");
  EXPECT_EQ(seen["temperature"], 0.0);
  EXPECT_EQ(seen["messages"][0]["content"], "hello");
  EXPECT_EQ(auth, "Bearer k123");
}

TEST(HttpBackend, ProtocolErrors) {
  FakeChatServer status([](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
    res.set_content("boom", "text/plain");
  });
  HttpChatBackend a(config_for(status.url()));
  EXPECT_EQ(code_of([&] { a.complete({{"user", "x"}}); }), ErrorCode::kBackendProtocolError);

  FakeChatServer shape([](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"choices": []})", "application/json");
  });
  HttpChatBackend b(config_for(shape.url()));
  EXPECT_EQ(code_of([&] { b.complete({{"user", "x"}}); }), ErrorCode::kBackendProtocolError);
}

TEST(HttpBackend, SlowServerTimesOut) {
  FakeChatServer slow([](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(1500));
    res.set_content(R"({"choices":[{"message":{"content":"late"}}]})", "application/json");
  });
  BackendConfig c = config_for(slow.url());
  c.timeout_s = 0.3;
  HttpChatBackend backend(c);
  const auto t0 = std::chrono::steady_clock::now();
  EXPECT_EQ(code_of([&] { backend.complete({{"user", "x"}}); }), ErrorCode::kBackendTimeout);
  EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::milliseconds(1400));
}

TEST(HttpBackend, ConfigFromEnvironment) {
  ::unsetenv("LAYOUTPLAN_BACKEND_URL");
  EXPECT_FALSE(backend_config_from_env());
  ::setenv("LAYOUTPLAN_BACKEND_URL", "http://127.0.0.1:1", 1);
  ::setenv("LAYOUTPLAN_BACKEND_MODEL", "m", 1);
  ::setenv("LAYOUTPLAN_BACKEND_TIMEOUT", "2.5", 1);
  const auto c = backend_config_from_env();
  ASSERT_TRUE(c);
  EXPECT_EQ(c->endpoint, "http://127.0.0.1:1");
  EXPECT_EQ(c->model, "m");
  EXPECT_DOUBLE_EQ(c->timeout_s, 2.5);
  ::unsetenv("LAYOUTPLAN_BACKEND_URL");
  ::unsetenv("LAYOUTPLAN_BACKEND_MODEL");
  ::unsetenv("LAYOUTPLAN_BACKEND_TIMEOUT");
}

TEST(HttpStatus, UpstreamFailuresAreBadGateway) {
  EXPECT_EQ(http_status_for(ErrorCode::kBackendProtocolError), 502);
  EXPECT_EQ(http_status_for(ErrorCode::kProviderError), 502);
  EXPECT_EQ(http_status_for(ErrorCode::kBackendTimeout), 504);
  EXPECT_EQ(http_status_for(ErrorCode::kNoFeasibleMove), 422);
}

// ---------------------------------------------------------------------------
// Remote embeddings, against a local fake
// ---------------------------------------------------------------------------

EmbeddingConfig embedding_for(const std::string& url, std::size_t dim) {
  EmbeddingConfig c;
  c.endpoint = url;
  c.dim = dim;
  c.timeout_s = 2.0;
  return c;
}

TEST(HttpEmbedding, RequestShapeAndNormalisation) {
  Json seen;
  std::string auth;
  FakeChatServer fake(
      [&](const httplib::Request& req, httplib::Response& res) {
        seen = Json::parse(req.body);
        auth = req.get_header_value("Authorization");
        res.set_content(R"({"data":[{"embedding":[3.0, 4.0, 12.0, 99.0]}]})", "application/json");
      },
      "/v1/embeddings");
  EmbeddingConfig c = embedding_for(fake.url(), 3);
  c.api_key = "e1";
  const HttpEmbeddingProvider p(c);
  EXPECT_EQ(p.dim(), 3u);
  const auto v = p.embed("a red car");
  EXPECT_EQ(seen["input"], "a red car");
  EXPECT_EQ(seen["model"], "text-embedding");
  EXPECT_EQ(auth, "Bearer e1");
  // Truncated to (3, 4, 12), whose norm is 13.
  ASSERT_EQ(v.size(), 3u);
  EXPECT_DOUBLE_EQ(v[0], 3.0 / 13.0);
  EXPECT_DOUBLE_EQ(v[1], 4.0 / 13.0);
  EXPECT_DOUBLE_EQ(v[2], 12.0 / 13.0);

  const HttpEmbeddingProvider wide(embedding_for(fake.url(), 6));
  const auto w = wide.embed("x");
  ASSERT_EQ(w.size(), 6u);
  EXPECT_EQ(w[4], 0.0);
  EXPECT_EQ(w[5], 0.0);
  EXPECT_NEAR(std::sqrt(dot(w, w)), 1.0, 1e-12);
}

TEST(HttpEmbedding, EqualTextIsFetchedOnce) {
  std::atomic<int> calls{0};
  FakeChatServer fake(
      [&](const httplib::Request&, httplib::Response& res) {
        // A drifting service: every answer differs.
        const int n = ++calls;
        res.set_content(R"({"data":[{"embedding":[1.0, )" + std::to_string(n) + "]}]}",
                        "application/json");
      },
      "/v1/embeddings");
  const HttpEmbeddingProvider p(embedding_for(fake.url(), 2));
  const auto a = p.embed("dog");
  const auto b = p.embed("dog");
  EXPECT_EQ(a, b);
  EXPECT_EQ(calls.load(), 1);
  EXPECT_NE(p.embed("cat"), a);
  EXPECT_EQ(calls.load(), 2);
}

TEST(HttpEmbedding, ProviderErrors) {
  FakeChatServer status(
      [](const httplib::Request&, httplib::Response& res) { res.status = 503; },
      "/v1/embeddings");
  const HttpEmbeddingProvider a(embedding_for(status.url(), 4));
  EXPECT_EQ(code_of([&] { a.embed("x"); }), ErrorCode::kProviderError);

  FakeChatServer zeros(
      [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"data":[{"embedding":[0, 0]}]})", "application/json");
      },
      "/v1/embeddings");
  const HttpEmbeddingProvider b(embedding_for(zeros.url(), 4));
  EXPECT_EQ(code_of([&] { b.embed("x"); }), ErrorCode::kProviderError);

  FakeChatServer shape(
      [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"data":[{"embedding":"nope"}]})", "application/json");
      },
      "/v1/embeddings");
  const HttpEmbeddingProvider c(embedding_for(shape.url(), 4));
  EXPECT_EQ(code_of([&] { c.embed("x"); }), ErrorCode::kProviderError);

  EXPECT_EQ(code_of([] { HttpEmbeddingProvider bad(EmbeddingConfig{}); }),
            ErrorCode::kInvalidArgument);
}

TEST(HttpEmbedding, ProviderFromEnvironment) {
  ::unsetenv("LAYOUTPLAN_EMBEDDING_URL");
  EXPECT_FALSE(embedding_config_from_env());
  EXPECT_NE(dynamic_cast<const TrigramEmbedding*>(embedding_provider_from_env().get()), nullptr);
  ::setenv("LAYOUTPLAN_EMBEDDING_URL", "http://127.0.0.1:1", 1);
  ::setenv("LAYOUTPLAN_EMBEDDING_DIM", "512", 1);
  const auto c = embedding_config_from_env();
  ASSERT_TRUE(c);
  EXPECT_EQ(c->dim, 512u);
  EXPECT_NE(dynamic_cast<const HttpEmbeddingProvider*>(embedding_provider_from_env().get()),
            nullptr);
  ::unsetenv("LAYOUTPLAN_EMBEDDING_URL");
  ::unsetenv("LAYOUTPLAN_EMBEDDING_DIM");
}

TEST(HttpEmbedding, DrivesOpenSetEvaluation) {
  // Labels map to fixed directions: "dog" and "puppy" coincide, "car" is
  // orthogonal to both.
  FakeChatServer fake(
      [](const httplib::Request& req, httplib::Response& res) {
        const std::string text = Json::parse(req.body)["input"];
        const bool canine = text.find("dog") != std::string::npos ||
                            text.find("pupp") != std::string::npos;
        res.set_content(canine ? R"({"data":[{"embedding":[1, 0]}]})"
                               : R"({"data":[{"embedding":[0, 1]}]})",
                        "application/json");
      },
      "/v1/embeddings");
  const HttpEmbeddingProvider p(embedding_for(fake.url(), 2));
  Layout gen, ref;
  gen.canvas_w = gen.canvas_h = ref.canvas_w = ref.canvas_h = 128;
  gen.elements = {{"e0", ElementKind::kVisualObject, "puppy", {0, 0, 64, 64}, {}}};
  ref.elements = {{"e0", ElementKind::kVisualObject, "dog", {0, 0, 64, 64}, {}}};
  EXPECT_DOUBLE_EQ(max_iou_open(gen, ref, p).score, 1.0);
  gen.elements[0].label = "car";
  EXPECT_DOUBLE_EQ(max_iou_open(gen, ref, p).score, 0.0);
}

// ---------------------------------------------------------------------------
// Service
// ---------------------------------------------------------------------------

class ServiceTest : public ::testing::Test {
 protected:
  void start(std::shared_ptr<Backend> backend, std::string token = "") {
    ServiceOptions opts;
    opts.port = 0;
    opts.token = std::move(token);
    service_ = std::make_unique<Service>(opts, std::move(backend));
    port_ = service_->start();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    if (!opts.token.empty()) client_->set_bearer_token_auth(opts.token);
  }

  httplib::Result post(const std::string& path, const Json& body) {
    return client_->Post(path, body.dump(), "application/json");
  }

  std::string new_session() {
    const Json body = Json::parse(R"({
      "spec": {"caption": "A dog and a cat."},
      "initial": {"canvas_w": 128, "canvas_h": 128, "elements": [
        {"id": "e0", "label": "dog", "bbox": [50, 50, 70, 70]},
        {"id": "e1", "label": "cat", "bbox": [10, 10, 30, 30]}]}})");
    auto res = post("/sessions", body);
    EXPECT_EQ(res->status, 201);
    return Json::parse(res->body)["session_id"];
  }

  std::unique_ptr<Service> service_;
  std::unique_ptr<httplib::Client> client_;
  int port_ = 0;
};

TEST_F(ServiceTest, DeterministicEditFlow) {
  start(nullptr);
  const std::string id = new_session();
  auto res = post("/sessions/" + id + "/message", {{"text", "move the dog left by 10"}});
  ASSERT_EQ(res->status, 200) << res->body;
  const Json j = Json::parse(res->body);
  EXPECT_EQ(j["revision_index"], 1);
  EXPECT_EQ(j["applied_route"], "deterministic-edit");
  EXPECT_EQ(j["layout"]["elements"][0]["bbox"][0], 40.0);
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");

  auto svg = client_->Get("/sessions/" + id + "/layout.svg");
  ASSERT_EQ(svg->status, 200);
  EXPECT_EQ(svg->get_header_value("Content-Type"), "image/svg+xml");
  EXPECT_EQ(svg->body, render_svg(service_->sessions().latest(id)));

  auto hist = client_->Get("/sessions/" + id + "/history");
  ASSERT_EQ(hist->status, 200);
  const Json h = Json::parse(hist->body);
  ASSERT_EQ(h["revisions"].size(), 2u);
  EXPECT_EQ(h["revisions"][0]["origin"], "initial");
  EXPECT_EQ(h["revisions"][1]["message"], "move the dog left by 10");
}

TEST_F(ServiceTest, ErrorStatusMapping) {
  start(nullptr);
  const std::string id = new_session();
  EXPECT_EQ(post("/sessions/" + id + "/message", {{"text", "make it pop"}})->status, 503);
  EXPECT_EQ(post("/sessions/s404/message", {{"text", "move the dog left"}})->status, 404);
  EXPECT_EQ(client_->Get("/sessions/s404/layout.svg")->status, 404);
  EXPECT_EQ(post("/sessions/" + id + "/message", {{"text", "move the horse left"}})->status, 422);
  EXPECT_EQ(post("/sessions/" + id + "/message", {{"words", "x"}})->status, 400);
  EXPECT_EQ(client_->Post("/sessions", "not json", "application/json")->status, 400);
  auto res = post("/sessions", Json::parse(R"({"spec": {"caption": "x", "format": "svg"}})"));
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(Json::parse(res->body)["error"]["code"], "SchemaError");
  EXPECT_EQ(post("/plan", Json::parse(R"({"spec": {"caption": "x"}})"))->status, 503);
  EXPECT_EQ(client_->Options("/plan")->status, 204);
}

TEST_F(ServiceTest, BackendRoutesAndErrors) {
  auto stub = std::make_shared<LoopbackBackend>(
      LoopbackBackend::Responder([](const std::vector<ChatMessage>& m) -> std::string {
        const std::string& last = m.back().content;
        if (last.find("too slow") != std::string::npos) {
          throw Error(ErrorCode::kBackendTimeout, "slow");
        }
        if (last.find("broken") != std::string::npos) {
          throw Error(ErrorCode::kBackendProtocolError, "bad reply");
        }
        return "dog: [0, 0, 20, 20]\ncat: [100, 100, 120, 120]";
      }));
  start(stub);
  const std::string id = new_session();
  auto ok = post("/sessions/" + id + "/message", {{"text", "spread them apart"}});
  ASSERT_EQ(ok->status, 200) << ok->body;
  EXPECT_EQ(Json::parse(ok->body)["applied_route"], "backend");
  EXPECT_EQ(post("/sessions/" + id + "/message", {{"text", "too slow please"}})->status, 504);
  EXPECT_EQ(post("/sessions/" + id + "/message", {{"text", "broken please"}})->status, 502);
  EXPECT_EQ(service_->sessions().history(id).size(), 2u);

  auto plan = post("/plan", Json::parse(R"({"spec": {"caption": "A dog and a cat."}, "k": 0})"));
  ASSERT_EQ(plan->status, 200) << plan->body;
  const Json p = Json::parse(plan->body);
  EXPECT_EQ(p["outcome"]["status"], "success");
  EXPECT_EQ(p["demonstrations"].size(), 3u);
  EXPECT_EQ(post("/plan", Json::parse(R"({"spec": {"caption": "x"}, "k": 2})"))->status, 400);
}

TEST_F(ServiceTest, BearerToken) {
  start(nullptr, "secret");
  EXPECT_EQ(post("/sessions", Json::parse(R"({"spec": {"caption": "x"}})"))->status, 201);
  httplib::Client anon("127.0.0.1", port_);
  EXPECT_EQ(anon.Post("/sessions", R"({"spec": {"caption": "x"}})", "application/json")->status,
            401);
  EXPECT_EQ(anon.Get("/health")->status, 200);
}

TEST_F(ServiceTest, Evaluate) {
  start(nullptr);
  Json body;
  body["gen_file"] = kData + "/eval/gen.jsonl";
  body["ref_file"] = kData + "/eval/ref.jsonl";
  body["mode"] = "closed";
  auto res = post("/evaluate", body);
  ASSERT_EQ(res->status, 200) << res->body;
  const Json j = Json::parse(res->body);
  EXPECT_EQ(j["n_success"], 4);
  EXPECT_EQ(j["items"].size(), 6u);
  body["mode"] = "sideways";
  EXPECT_EQ(post("/evaluate", body)->status, 400);
  body["mode"] = "open";
  body["gen_file"] = "/nonexistent.jsonl";
  EXPECT_EQ(post("/evaluate", body)->status, 400);
}

TEST_F(ServiceTest, ConcurrentMessagesOnOneSession) {
  start(nullptr);
  const std::string id = new_session();
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      httplib::Client c("127.0.0.1", port_);
      for (int i = 0; i < 10; ++i) {
        const Json body = {{"text", (i + t) % 2 ? "move the dog up by 1" : "move the dog down by 1"}};
        auto res = c.Post("/sessions/" + id + "/message", body.dump(), "application/json");
        if (res && res->status == 200) ++ok;
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(ok.load(), 40);
  const auto h = service_->sessions().history(id);
  ASSERT_EQ(h.size(), 41u);
  for (std::size_t i = 1; i < h.size(); ++i) {
    EXPECT_NEAR(std::abs(h[i].layout.elements[0].bbox.top - h[i - 1].layout.elements[0].bbox.top),
                1.0, 1e-12);
  }
}

}  // namespace
}  // namespace layoutplan
