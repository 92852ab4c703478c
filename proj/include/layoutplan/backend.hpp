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

// Chat backends. The wire shape is the common chat-completions request:
//
//   POST <endpoint>/v1/chat/completions
//   {"model": m, "messages": [{"role", "content"}...], "temperature": t,
//    "max_tokens": n}
//   -> {"choices": [{"message": {"role": "assistant", "content": "..."}}]}

#pragma once

#include <chrono>
#include <cstdlib>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "httplib.h"
// <resolv.h>, pulled in by httplib, defines _res, which Eigen uses as an
// identifier.
#ifdef _res
#undef _res
#endif
#include "json.hpp"
#include "layoutplan/error.hpp"

namespace layoutplan {

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct BackendConfig {
  std::string endpoint;  // scheme://host[:port]
  std::string model = "layout-planner";
  std::string api_key;
  double temperature = 0.0;
  int max_tokens = 1024;
  double timeout_s = 60.0;
  int retry = 1;  // repair attempts after a parse failure

  void check() const {
    if (!(timeout_s > 0.0)) throw Error(ErrorCode::kInvalidArgument, "timeout must be positive");
    if (retry < 0) throw Error(ErrorCode::kInvalidArgument, "retry must be non-negative");
  }
};

// Reads LAYOUTPLAN_BACKEND_URL, LAYOUTPLAN_BACKEND_MODEL,
// LAYOUTPLAN_BACKEND_KEY and LAYOUTPLAN_BACKEND_TIMEOUT. nullopt when no URL
// is set.
inline std::optional<BackendConfig> backend_config_from_env() {
  const char* url = std::getenv("LAYOUTPLAN_BACKEND_URL");
  if (!url || !*url) return std::nullopt;
  BackendConfig c;
  c.endpoint = url;
  if (const char* m = std::getenv("LAYOUTPLAN_BACKEND_MODEL")) c.model = m;
  if (const char* k = std::getenv("LAYOUTPLAN_BACKEND_KEY")) c.api_key = k;
  if (const char* t = std::getenv("LAYOUTPLAN_BACKEND_TIMEOUT")) {
    char* end = nullptr;
    const double v = std::strtod(t, &end);
    if (end != t && v > 0.0) c.timeout_s = v;
  }
  return c;
}

class Backend {
 public:
  virtual ~Backend() = default;
  // Returns the assistant reply. Throws BackendTimeout or
  // BackendProtocolError.
  virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
};

// Replies from a script, for tests and offline runs. Each call pops the next
// reply; the last reply repeats once the script is exhausted. A reply may
// also be produced by a function of the conversation.
class LoopbackBackend final : public Backend {
 public:
  using Responder = std::function<std::string(const std::vector<ChatMessage>&)>;

  explicit LoopbackBackend(std::vector<std::string> replies)
      : replies_(replies.begin(), replies.end()) {
    if (replies_.empty()) throw Error(ErrorCode::kInvalidArgument, "loopback needs a reply");
  }
  explicit LoopbackBackend(Responder responder) : responder_(std::move(responder)) {}

  std::string complete(const std::vector<ChatMessage>& messages) override {
    std::lock_guard lock(mu_);
    requests_.push_back(messages);
    if (responder_) return responder_(messages);
    std::string r = replies_.front();
    if (replies_.size() > 1) replies_.pop_front();
    return r;
  }

  std::size_t calls() const {
    std::lock_guard lock(mu_);
    return requests_.size();
  }

  std::vector<std::vector<ChatMessage>> requests() const {
    std::lock_guard lock(mu_);
    return requests_;
  }

 private:
  mutable std::mutex mu_;
  std::deque<std::string> replies_;
  Responder responder_;
  std::vector<std::vector<ChatMessage>> requests_;
};

class HttpChatBackend final : public Backend {
 public:
  explicit HttpChatBackend(BackendConfig config) : config_(std::move(config)) {
    config_.check();
    if (config_.endpoint.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "backend endpoint is empty");
    }
  }

  std::string complete(const std::vector<ChatMessage>& messages) override {
    nlohmann::json body;
    body["model"] = config_.model;
    body["temperature"] = config_.temperature;
    body["max_tokens"] = config_.max_tokens;
    body["messages"] = nlohmann::json::array();
    for (const auto& m : messages) {
      body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    }

    httplib::Client client(config_.endpoint);
    const auto secs = static_cast<time_t>(config_.timeout_s);
    const auto usecs = static_cast<time_t>((config_.timeout_s - secs) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (!config_.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + config_.api_key);
    }
    auto res = client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
    if (!res) {
      const auto err = res.error();
      if (err == httplib::Error::Read || err == httplib::Error::Write ||
          err == httplib::Error::ConnectionTimeout) {
        throw Error(ErrorCode::kBackendTimeout,
                    "backend did not answer within " + std::to_string(config_.timeout_s) + " s");
      }
      throw Error(ErrorCode::kBackendProtocolError,
                  "backend request failed: " + httplib::to_string(err));
    }
    if (res->status != 200) {
      throw Error(ErrorCode::kBackendProtocolError,
                  "backend answered HTTP " + std::to_string(res->status));
    }
    const auto reply = nlohmann::json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.is_object() || !reply.contains("choices") ||
        !reply["choices"].is_array() || reply["choices"].empty()) {
      throw Error(ErrorCode::kBackendProtocolError, "backend reply has no choices");
    }
    const auto& choice = reply["choices"][0];
    if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object() ||
        !choice["message"].contains("content") || !choice["message"]["content"].is_string()) {
      throw Error(ErrorCode::kBackendProtocolError, "backend reply has no message content");
    }
    return choice["message"]["content"].get<std::string>();
  }

  const BackendConfig& config() const { return config_; }

 private:
  BackendConfig config_;
};

}  // namespace layoutplan
