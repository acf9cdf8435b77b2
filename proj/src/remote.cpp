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

#include "coldroute/remote.hpp"

#include <algorithm>
#include <thread>

#include <httplib.h>

#include "coldroute/error.hpp"

namespace coldroute {

namespace {

// Splits "http://host:port/prefix" into ("http://host:port", "/prefix").
std::pair<std::string, std::string> split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::Config, "URL needs a scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, ""};
  std::string path = url.substr(path_start);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {url.substr(0, path_start), path};
}

class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<1024>& s) : s_(s) { s_.acquire(); }
  ~SlotGuard() { s_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<1024>& s_;
};

}  // namespace

JsonHttpClient::JsonHttpClient(RemoteConfig config)
    : config_(std::move(config)),
      in_flight_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(config_.max_in_flight, 1, 1024))) {
  if (config_.url.empty()) throw Error(ErrorCode::Config, "remote provider URL not configured");
  std::tie(scheme_host_port_, base_path_) = split_url(config_.url);
}

JsonHttpClient::~JsonHttpClient() = default;

nlohmann::json JsonHttpClient::post(const std::string& path, const nlohmann::json& body) const {
  std::string target = base_path_;
  // Accept base URLs that already end in the endpoint path.
  if (target.size() < path.size() || target.compare(target.size() - path.size(), path.size(), path) != 0) {
    target += path;
  }
  const std::string payload = body.dump();
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  SlotGuard slot(in_flight_);
  auto delay = config_.backoff;
  ErrorCode last_code = ErrorCode::Transport;
  std::string last_detail;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
    httplib::Client cli(scheme_host_port_);
    cli.set_connection_timeout(config_.timeout);
    cli.set_read_timeout(config_.timeout);
    cli.set_write_timeout(config_.timeout);
    auto res = cli.Post(target, headers, payload, "application/json");
    if (!res) {
      auto err = res.error();
      last_code = (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read)
                      ? ErrorCode::Timeout
                      : ErrorCode::Transport;
      last_detail = httplib::to_string(err);
      continue;
    }
    if (res->status == 200) {
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Transport, std::string("malformed response body: ") + e.what());
      }
    }
    last_code = ErrorCode::Transport;
    last_detail = "status " + std::to_string(res->status);
    bool transient = res->status == 429 || res->status >= 500;
    if (!transient) break;
  }
  throw Error(last_code, scheme_host_port_ + target + ": " + last_detail);
}

RemoteEncoder::RemoteEncoder(RemoteConfig config, std::size_t dim)
    : client_(std::move(config)), dim_(dim) {}

Dense1 RemoteEncoder::encode(std::string_view text) const {
  std::string t(text);
  return encode_batch(std::span<const std::string>(&t, 1)).front();
}

std::vector<Dense1> RemoteEncoder::encode_batch(std::span<const std::string> texts) const {
  std::vector<Dense1> out(texts.size(), Dense1(dim_, 0.0));
  const auto& cfg = client_.config();
  const std::size_t step = std::max<std::size_t>(cfg.batch_size, 1);
  for (std::size_t start = 0; start < texts.size(); start += step) {
    std::size_t end = std::min(texts.size(), start + step);
    // Empty strings are not sent; their encoding is the zero vector.
    std::vector<std::size_t> slots;
    nlohmann::json input = nlohmann::json::array();
    for (std::size_t i = start; i < end; ++i) {
      if (texts[i].empty()) continue;
      slots.push_back(i);
      input.push_back(std::string(truncate_utf8(texts[i], cfg.max_input_bytes)));
    }
    if (slots.empty()) continue;
    nlohmann::json body = {{"input", input}, {"model", cfg.model}};
    auto reply = client_.post("/v1/embeddings", body);
    if (!reply.contains("data") || !reply["data"].is_array()) {
      throw Error(ErrorCode::Transport, "embeddings response lacks a data array");
    }
    const auto& data = reply["data"];
    if (data.size() != slots.size()) {
      throw Error(ErrorCode::Transport, "embedding count mismatch: sent " + std::to_string(slots.size()) +
                                            ", got " + std::to_string(data.size()));
    }
    for (std::size_t k = 0; k < data.size(); ++k) {
      // Servers may return items out of order; "index" is authoritative.
      std::size_t pos = k;
      Dense1 vec;
      try {
        if (data[k].contains("index")) pos = data[k].at("index").get<std::size_t>();
        vec = data[k].at("embedding").get<Dense1>();
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Transport, std::string("malformed embedding item: ") + e.what());
      }
      if (pos >= slots.size()) throw Error(ErrorCode::Transport, "embedding index out of range");
      if (vec.size() != dim_) {
        throw Error(ErrorCode::DimensionMismatch,
                    "expected " + std::to_string(dim_) + ", got " + std::to_string(vec.size()));
      }
      l2_normalize(vec);
      out[slots[pos]] = std::move(vec);
    }
  }
  return out;
}

RemoteSummarizer::RemoteSummarizer(RemoteConfig config) : client_(std::move(config)) {}

std::string RemoteSummarizer::summarize(std::string_view prompt) const {
  nlohmann::json body = {
      {"model", client_.config().model},
      {"temperature", 0},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", std::string(prompt)}}})},
  };
  try {
    auto reply = client_.post("/v1/chat/completions", body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SummarizerFailure, e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::SummarizerFailure, e.what());
  }
}

}  // namespace coldroute
