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

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "coldroute/eval.hpp"
#include "coldroute/features.hpp"
#include "coldroute/graph.hpp"
#include "coldroute/profile.hpp"
#include "coldroute/routing.hpp"

namespace httplib {
class Server;
}

namespace coldroute {

// Runtime configuration. Loaded from a JSON file (--config or RP_CONFIG),
// then RP_EMBED_URL / RP_LLM_URL / RP_API_KEY from the environment, then
// command-line flags, each layer overriding the previous one.
struct AppConfig {
  std::string embed_url;  // empty: offline DeterministicEmbedder
  std::string embed_model = "text-embedding";
  std::size_t embed_dim = 64;
  std::uint64_t embed_seed = 0;
  std::string llm_url;  // empty: EchoSummarizer
  std::string llm_model = "chat";
  std::string api_key;
  std::size_t max_in_flight = 4;
  std::size_t max_input_bytes = 16384;
  std::size_t summarizer_threads = 1;
  std::string templates_dir;

  std::string spec = "emb:2";
  std::string data_dir = "data/fixture";
  std::string router = "sim";          // router kind for training / evaluation
  std::string router_checkpoint;        // serve / route / integrate
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> random_seeds = default_random_seeds();
  std::string output;                   // report path
  std::string snapshot;                 // service pool snapshot path
  std::string host = "127.0.0.1";
  int port = 8080;
};

AppConfig load_config(const std::filesystem::path& path);  // Config on unreadable or invalid files
void apply_config_json(AppConfig& config, const nlohmann::json& j);
void apply_env(AppConfig& config);

// Encoder and summarizer selected by the configuration.
struct Providers {
  std::unique_ptr<TextEncoder> encoder;
  std::unique_ptr<LlmSummarizer> summarizer;
};

Providers make_providers(const AppConfig& config);
ProfileContext make_context(const AppConfig& config, const Providers& providers);

// Everything read from a data directory. Optional files load as empty.
//   families.json, models.json, benchmarks.json, domains.json   (card arrays)
//   queries.jsonl        evidence-graph queries {id, benchmark_id, text}
//   eval_queries.jsonl   {id, text, task_id?}
//   train_queries.jsonl  {id, text, task_id?}
//   tasks.jsonl          {query_id, task_id}, fills in missing task ids
//   interactions.jsonl   training {query_id, model_id, reward}
//   rewards.jsonl        evaluation {query_id, model_id, reward}
//   new_model.json       ModelCard held out for integration
struct DataSet {
  CardSet cards;
  std::vector<EvalQuery> eval_queries;
  std::vector<EvalQuery> train_queries;
  std::vector<InteractionRecord> interactions;
  RewardTable rewards;
  std::optional<ModelCard> new_model;

  std::vector<std::string> pool() const;  // models.json order
  std::map<std::string, ScoreScale> benchmark_scales() const;
};

DataSet load_data_dir(const std::filesystem::path& dir);
void write_data_dir(const std::filesystem::path& dir, const DataSet& data);

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

// Routing service state: evidence graph, candidate pool and a frozen router.
// Routing takes a shared lock; registration takes the exclusive one.
class RoutingService {
 public:
  struct Response {
    int status = 200;
    nlohmann::json body;
  };

  RoutingService(EvidenceGraph graph, CandidatePool pool, std::unique_ptr<const Router> router, ProfileSpec spec,
                 ProfileContext ctx, std::map<std::string, ScoreScale> scales, std::string snapshot_path = {});

  // Builds graph, pool and router from a configuration (router checkpoint
  // if configured, SimRouter otherwise) and replays a saved snapshot.
  static std::unique_ptr<RoutingService> from_config(const AppConfig& config, std::shared_ptr<Providers> providers);

  Response route(const std::string& body) const;
  Response register_model(const std::string& body);
  Response pool() const;
  Response healthz() const;

  void bind(httplib::Server& server);
  std::string router_checksum() const { return router_->checksum(); }

 private:
  void save_snapshot() const;
  void load_snapshot();

  mutable std::shared_mutex mutex_;
  EvidenceGraph graph_;
  CandidatePool pool_;
  std::unique_ptr<const Router> router_;
  ProfileSpec spec_;
  ProfileContext ctx_;
  std::map<std::string, ScoreScale> scales_;
  std::string snapshot_path_;
  std::vector<ModelCard> registered_;
  std::shared_ptr<Providers> providers_;  // keeps ctx_ pointers alive
  mutable std::atomic<std::uint64_t> requests_{0};
};

// Entry point of the command-line tool; returns the process exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace coldroute
