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

#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include <httplib.h>

#include "coldroute/remote.hpp"
#include "expect.hpp"

using namespace coldroute;

namespace {

// Local stand-in for an embeddings / chat endpoint.
struct MockServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;

  MockServer() = default;
  void start() {
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~MockServer() {
    server.stop();
    if (thread.joinable()) thread.join();
  }
  RemoteConfig config() const {
    RemoteConfig c;
    c.url = "http://127.0.0.1:" + std::to_string(port);
    c.model = "mock";
    c.backoff = std::chrono::milliseconds(1);
    c.timeout = std::chrono::seconds(5);
    return c;
  }
};

// Echoes each input's byte length into a fixed pattern so callers can tell
// which vector belongs to which input.
nlohmann::json embed_reply(const nlohmann::json& inputs, std::size_t dim, bool reverse) {
  nlohmann::json data = nlohmann::json::array();
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    std::size_t k = reverse ? inputs.size() - 1 - i : i;
    Dense1 v(dim, 0.0);
    v[0] = 3.0 * static_cast<double>(inputs[k].get<std::string>().size());
    v[1 % dim] += 4.0;
    data.push_back({{"index", k}, {"embedding", v}});
  }
  return {{"data", data}};
}

}  // namespace

TEST_CASE("retries transient failures then succeeds") {
  MockServer mock;
  std::atomic<int> calls{0};
  mock.server.Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
    if (calls++ < 2) {
      res.status = 500;
      return;
    }
    auto body = nlohmann::json::parse(req.body);
    res.set_content(embed_reply(body.at("input"), 4, false).dump(), "application/json");
  });
  mock.start();
  RemoteEncoder enc(mock.config(), 4);
  Dense1 v = enc.encode("abc");
  CHECK(calls.load() == 3);
  CHECK(v[0] == doctest::Approx(9.0 / std::sqrt(81.0 + 16.0)));
}

TEST_CASE("gives up after the retry budget") {
  MockServer mock;
  std::atomic<int> calls{0};
  mock.server.Post("/v1/embeddings", [&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 503;
  });
  mock.start();
  RemoteConfig cfg = mock.config();
  cfg.max_retries = 2;
  RemoteEncoder enc(cfg, 4);
  CHECK_THROWS_CODE(enc.encode("abc"), ErrorCode::Transport);
  CHECK(calls.load() == 3);
}

TEST_CASE("client errors are not retried") {
  MockServer mock;
  std::atomic<int> calls{0};
  mock.server.Post("/v1/embeddings", [&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 401;
  });
  mock.start();
  RemoteEncoder enc(mock.config(), 4);
  CHECK_THROWS_CODE(enc.encode("abc"), ErrorCode::Transport);
  CHECK(calls.load() == 1);
}

TEST_CASE("wrong vector length is a dimension mismatch") {
  MockServer mock;
  mock.server.Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
    auto body = nlohmann::json::parse(req.body);
    res.set_content(embed_reply(body.at("input"), 3, false).dump(), "application/json");
  });
  mock.start();
  RemoteEncoder enc(mock.config(), 4);
  CHECK_THROWS_CODE(enc.encode("abc"), ErrorCode::DimensionMismatch);
}

TEST_CASE("batches keep input order, skip empty texts and normalize") {
  MockServer mock;
  std::atomic<int> calls{0};
  std::string auth;
  mock.server.Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
    ++calls;
    auth = req.get_header_value("Authorization");
    auto body = nlohmann::json::parse(req.body);
    res.set_content(embed_reply(body.at("input"), 4, true).dump(), "application/json");
  });
  mock.start();
  RemoteConfig cfg = mock.config();
  cfg.batch_size = 2;
  cfg.api_key = "secret";
  RemoteEncoder enc(cfg, 4);
  std::vector<std::string> texts = {"a", "", "abcd", "ab", "abc"};
  auto out = enc.encode_batch(texts);
  REQUIRE(out.size() == texts.size());
  CHECK(out[1] == Dense1(4, 0.0));
  for (std::size_t i : {0u, 2u, 3u, 4u}) {
    double x = 3.0 * static_cast<double>(texts[i].size());
    CHECK(out[i][0] == doctest::Approx(x / std::sqrt(x * x + 16.0)));
    double n = 0.0;
    for (double c : out[i]) n += c * c;
    CHECK(n == doctest::Approx(1.0));
  }
  CHECK(calls.load() == 3);
  CHECK(auth == "Bearer secret");
}

TEST_CASE("summarizer reads the first choice") {
  MockServer mock;
  nlohmann::json seen;
  mock.server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    nlohmann::json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", "short summary"}}}}}}};
    res.set_content(reply.dump(), "application/json");
  });
  mock.start();
  RemoteSummarizer s(mock.config());
  CHECK(s.summarize("describe this model") == "short summary");
  CHECK(seen.at("temperature") == 0);
  CHECK(seen.at("messages").at(0).at("content") == "describe this model");
}

TEST_CASE("malformed chat reply is a summarizer failure") {
  MockServer mock;
  mock.server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"choices": []})", "application/json");
  });
  mock.start();
  RemoteSummarizer s(mock.config());
  CHECK_THROWS_CODE(s.summarize("x"), ErrorCode::SummarizerFailure);
}

TEST_CASE("unreachable endpoint") {
  RemoteConfig cfg;
  cfg.url = "http://127.0.0.1:1";
  cfg.max_retries = 1;
  cfg.backoff = std::chrono::milliseconds(1);
  cfg.timeout = std::chrono::seconds(1);
  RemoteEncoder enc(cfg, 4);
  CHECK_THROWS_AS(enc.encode("abc"), coldroute::Error);
  CHECK_THROWS_CODE(RemoteEncoder(RemoteConfig{}, 4), ErrorCode::Config);
}
