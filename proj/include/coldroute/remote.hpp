// Copyright 2026 The coldroute Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <semaphore>
#include <string>

#include <json.hpp>

#include "coldroute/features.hpp"

namespace coldroute {

struct RemoteConfig {
  std::string url;  // base URL, e.g. http://127.0.0.1:8000 (the /v1/... path is appended)
  std::string model;
  std::string api_key;
  int max_retries = 3;
  std::chrono::milliseconds backoff{200};  // doubled after every failed attempt
  std::chrono::seconds timeout{30};
  std::size_t batch_size = 64;
  std::size_t max_in_flight = 4;
  // Inputs are cut to this many bytes before sending (0 = no cap). The
  // default approximates a 4096-token encoder window.
  std::size_t max_input_bytes = 16384;
};

// Shared plumbing: JSON POST with bounded retries on connection failures,
// 429 and 5xx, plus a cap on concurrent requests.
class JsonHttpClient {
 public:
  explicit JsonHttpClient(RemoteConfig config);
  ~JsonHttpClient();

  // POSTs body to `path` (appended to the configured base path).
  nlohmann::json post(const std::string& path, const nlohmann::json& body) const;

  const RemoteConfig& config() const { return config_; }

 private:
  RemoteConfig config_;
  std::string scheme_host_port_;
  std::string base_path_;
  mutable std::counting_semaphore<1024> in_flight_;
};

// OpenAI-style embeddings client: POST /v1/embeddings {"input": [...], "model": ...}.
class RemoteEncoder final : public TextEncoder {
 public:
  RemoteEncoder(RemoteConfig config, std::size_t dim);

  std::size_t dim() const override { return dim_; }
  Dense1 encode(std::string_view text) const override;
  std::vector<Dense1> encode_batch(std::span<const std::string> texts) const override;

 private:
  JsonHttpClient client_;
  std::size_t dim_;
};

// OpenAI-style chat client: POST /v1/chat/completions at temperature 0.
class RemoteSummarizer final : public LlmSummarizer {
 public:
  explicit RemoteSummarizer(RemoteConfig config);
  std::string summarize(std::string_view prompt) const override;

 private:
  JsonHttpClient client_;
};

}  // namespace coldroute
