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

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "coldroute/graph.hpp"
#include "coldroute/profile.hpp"
#include "coldroute/routing.hpp"

namespace coldroute {

// Per-pair rewards for a set of evaluation queries and models.
class RewardTable {
 public:
  RewardTable() = default;
  // Duplicated (query, model) pairs are rejected with DuplicateId.
  static RewardTable from_records(std::span<const InteractionRecord> records);

  void set(const std::string& query_id, const std::string& model_id, double reward);
  bool has(std::string_view query_id, std::string_view model_id) const;
  double at(std::string_view query_id, std::string_view model_id) const;  // MissingReward

  const std::vector<std::string>& queries() const { return queries_; }  // sorted
  const std::vector<std::string>& models() const { return models_; }    // sorted
  bool empty() const { return queries_.empty() || models_.empty(); }

  // Sub-table over the given queries and models; MissingReward if a pair is absent.
  RewardTable restrict(std::span<const std::string> queries, std::span<const std::string> models) const;
  // Throws MissingReward for the first absent pair.
  void require_complete() const;
  std::vector<InteractionRecord> records() const;

 private:
  std::vector<std::string> queries_;
  std::vector<std::string> models_;
  std::map<std::pair<std::string, std::string>, double, std::less<>> rewards_;
};

double average_performance(std::span<const RoutingDecision> decisions, const RewardTable& rewards);
double ncir(std::span<const RoutingDecision> decisions, const RewardTable& rewards,
            std::string_view new_model_id, double threshold = 1.0);
double oracle(const RewardTable& rewards);
std::pair<std::string, double> single_best(const RewardTable& rewards);
// Mean over seeds of the mean reward of a uniformly chosen model per query.
double random_baseline(const RewardTable& rewards, std::span<const std::uint64_t> seeds);

std::vector<std::uint64_t> default_random_seeds();  // 0..5

struct Baselines {
  double oracle = 0.0;
  std::string single_best_model;
  double single_best = 0.0;
  double random_mean = 0.0;
  std::vector<std::uint64_t> random_seeds;
};

Baselines compute_baselines(const RewardTable& rewards, std::span<const std::uint64_t> seeds);

struct EvalReport {
  std::string protocol;  // "coldstart" | "integration"
  std::string spec;
  std::string router;
  std::uint64_t seed = 0;
  double average_performance = 0.0;
  std::optional<double> ncir;
  std::optional<std::string> new_model;
  std::vector<RoutingDecision> decisions;
  Baselines baselines;
  std::optional<std::string> checksum_before;
  std::optional<std::string> checksum_after;
};

nlohmann::json report_to_json(const EvalReport& report);
// query_id,chosen,reward
std::string report_csv(const EvalReport& report, const RewardTable& rewards);

// A query to be routed during evaluation (or used to train a router).
struct EvalQuery {
  std::string id;
  std::string text;
  std::optional<std::string> task_id;
};

void to_json(nlohmann::json& j, const EvalQuery& q);
void from_json(const nlohmann::json& j, EvalQuery& q);

std::vector<RouteQuery> encode_queries(std::span<const EvalQuery> queries, const TextEncoder& encoder);

struct EvalOptions {
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> random_seeds = default_random_seeds();
  double ncir_threshold = 1.0;
  MlpRouterConfig mlp;
  GraphRouterConfig graph_router;
  std::map<std::string, ScoreScale> benchmark_scales;
};

// Fills in missing node embeddings with ctx.encoder when the spec needs them.
void ensure_embeddings(EvidenceGraph& graph, const ProfileSpec& spec, const ProfileContext& ctx);

// Cold-start protocol: profiles for every pool model, SimRouter on every
// evaluation query, metrics against the pool-restricted reward table.
EvalReport run_coldstart(EvidenceGraph graph, const ProfileSpec& spec, std::span<const std::string> pool,
                         std::span<const EvalQuery> queries, const RewardTable& rewards, ProfileContext& ctx,
                         const EvalOptions& options = {});

struct IntegrationInputs {
  std::span<const std::string> old_pool;
  const ModelCard* new_card = nullptr;
  RouterKind router = RouterKind::Graph;
  std::span<const InteractionRecord> train_interactions;
  std::span<const EvalQuery> train_queries;
  std::span<const EvalQuery> eval_queries;
  const RewardTable* rewards = nullptr;
};

// Fits a router on the old pool, freezes it, integrates the new model and
// routes every evaluation query over the expanded pool.
EvalReport run_integration(EvidenceGraph graph, const ProfileSpec& spec, const IntegrationInputs& in,
                           ProfileContext& ctx, const EvalOptions& options = {});

// Router fitting shared by the evaluation and the CLI. Rejects any interaction
// naming `excluded` (the model to be integrated later) with LeakedInteraction.
std::unique_ptr<Router> fit_router(RouterKind kind, const CandidatePool& pool,
                                   std::span<const InteractionRecord> interactions,
                                   std::span<const EvalQuery> train_queries, const TextEncoder* encoder,
                                   const EvalOptions& options, std::string_view excluded = {});

}  // namespace coldroute
