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

// Embedding provider backed by an HTTP service speaking the common
// embeddings request:
//
//   POST <endpoint>/v1/embeddings  {"model": m, "input": text}
//   -> {"data": [{"embedding": [x0, x1, ...]}]}
//
// Vectors are truncated or zero-padded to dim() and L2-normalised. Replies
// are memoised per text, so equal text yields an identical vector for the
// lifetime of the provider even if the service is not deterministic.

#pragma once

#include <cmath>
#include <cstdlib>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "layoutplan/backend.hpp"
#include "layoutplan/embedding.hpp"

namespace layoutplan {

struct EmbeddingConfig {
  std::string endpoint;  // scheme://host[:port]
  std::string model = "text-embedding";
  std::string api_key;
  std::size_t dim = 64;
  double timeout_s = 30.0;

  void check() const {
    if (endpoint.empty()) throw Error(ErrorCode::kInvalidArgument, "embedding endpoint is empty");
    if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "embedding dim must be positive");
    if (!(timeout_s > 0.0)) throw Error(ErrorCode::kInvalidArgument, "timeout must be positive");
  }
};

// Reads LAYOUTPLAN_EMBEDDING_URL, LAYOUTPLAN_EMBEDDING_MODEL,
// LAYOUTPLAN_EMBEDDING_KEY, LAYOUTPLAN_EMBEDDING_DIM and
// LAYOUTPLAN_EMBEDDING_TIMEOUT. nullopt when no URL is set.
inline std::optional<EmbeddingConfig> embedding_config_from_env() {
  const char* url = std::getenv("LAYOUTPLAN_EMBEDDING_URL");
  if (!url || !*url) return std::nullopt;
  EmbeddingConfig c;
  c.endpoint = url;
  if (const char* m = std::getenv("LAYOUTPLAN_EMBEDDING_MODEL")) c.model = m;
  if (const char* k = std::getenv("LAYOUTPLAN_EMBEDDING_KEY")) c.api_key = k;
  if (const char* d = std::getenv("LAYOUTPLAN_EMBEDDING_DIM")) {
    const long v = std::strtol(d, nullptr, 10);
    if (v > 0) c.dim = static_cast<std::size_t>(v);
  }
  if (const char* t = std::getenv("LAYOUTPLAN_EMBEDDING_TIMEOUT")) {
    char* end = nullptr;
    const double v = std::strtod(t, &end);
    if (end != t && v > 0.0) c.timeout_s = v;
  }
  return c;
}

class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HttpEmbeddingProvider(EmbeddingConfig config) : config_(std::move(config)) {
    config_.check();
  }

  std::size_t dim() const override { return config_.dim; }

  // Throws ProviderError on transport failures and malformed replies.
  std::vector<double> embed(std::string_view text) const override {
    const std::string key(text);
    {
      std::lock_guard lock(mu_);
      if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    std::vector<double> v = fetch(key);
    std::lock_guard lock(mu_);
    // A concurrent caller may have won the race; keep the first answer.
    return cache_.emplace(key, std::move(v)).first->second;
  }

  const EmbeddingConfig& config() const { return config_; }

 private:
  std::vector<double> fetch(const std::string& text) const {
    nlohmann::json body;
    body["model"] = config_.model;
    body["input"] = text;
    httplib::Client client(config_.endpoint);
    const auto secs = static_cast<time_t>(config_.timeout_s);
    const auto usecs = static_cast<time_t>((config_.timeout_s - secs) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
    auto res = client.Post("/v1/embeddings", headers, body.dump(), "application/json");
    if (!res) {
      throw Error(ErrorCode::kProviderError,
                  "embedding request failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw Error(ErrorCode::kProviderError,
                  "embedding service answered HTTP " + std::to_string(res->status));
    }
    const auto reply = nlohmann::json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.is_object() || !reply.contains("data") ||
        !reply["data"].is_array() || reply["data"].empty() || !reply["data"][0].is_object() ||
        !reply["data"][0].contains("embedding") || !reply["data"][0]["embedding"].is_array()) {
      throw Error(ErrorCode::kProviderError, "embedding reply has no data[0].embedding");
    }
    std::vector<double> raw;
    for (const auto& x : reply["data"][0]["embedding"]) {
      if (!x.is_number()) throw Error(ErrorCode::kProviderError, "non-numeric embedding entry");
      raw.push_back(x.get<double>());
    }
    std::vector<double> v = fit_length(raw, config_.dim);
    const double n = std::sqrt(dot(v, v));
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw Error(ErrorCode::kProviderError, "embedding has no usable components");
    }
    l2_normalize(v);
    return v;
  }

  EmbeddingConfig config_;
  mutable std::mutex mu_;
  mutable std::map<std::string, std::vector<double>> cache_;
};

// The remote provider when the environment names one, otherwise trigrams.
inline std::shared_ptr<const EmbeddingProvider> embedding_provider_from_env() {
  if (auto cfg = embedding_config_from_env()) {
    return std::make_shared<HttpEmbeddingProvider>(std::move(*cfg));
  }
  return std::make_shared<TrigramEmbedding>();
}

}  // namespace layoutplan
