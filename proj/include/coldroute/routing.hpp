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

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "coldroute/nn.hpp"
#include "coldroute/profile.hpp"

namespace coldroute {

struct InteractionRecord {
  std::string query_id;
  std::string model_id;
  double reward = 0.0;

  bool operator==(const InteractionRecord&) const = default;
};

void to_json(nlohmann::json& j, const InteractionRecord& r);
void from_json(const nlohmann::json& j, InteractionRecord& r);

struct Candidate {
  std::string model_id;
  Profile profile;
};

// Ordered candidate list; every profile shares one dimension.
class CandidatePool {
 public:
  void add(Profile profile);  // DuplicateId, DimensionMismatch
  bool contains(std::string_view id) const;
  const Profile& profile(std::string_view id) const;
  const std::vector<Candidate>& candidates() const { return candidates_; }
  std::vector<std::string> ids() const;
  std::size_t size() const { return candidates_.size(); }
  bool empty() const { return candidates_.empty(); }
  std::size_t dim() const { return candidates_.empty() ? 0 : candidates_.front().profile.vector.size(); }

 private:
  std::vector<Candidate> candidates_;
};

using ScoreList = std::vector<std::pair<std::string, double>>;

struct RoutingDecision {
  std::string query_id;
  std::string chosen;
  ScoreList scores;  // pool order

  bool operator==(const RoutingDecision&) const = default;
};

// argmax over scores; exact ties go to the lexicographically smallest id.
// -inf marks an unrankable candidate and never wins against a finite score.
RoutingDecision decide(std::string query_id, ScoreList scores);

double cosine(std::span<const double> a, std::span<const double> b);
bool is_zero(std::span<const double> v);

// A query as seen by a router: its id, encoded text and (for routers that
// need it) the task it belongs to.
struct RouteQuery {
  std::string id;
  Dense1 vector;
  std::optional<std::string> task_id;
};

enum class RouterKind { Sim, Mlp, Graph };
std::string_view to_string(RouterKind kind);
RouterKind router_kind_from_string(std::string_view s);

// Frozen router: routing never mutates the object.
class Router {
 public:
  virtual ~Router() = default;
  virtual RouterKind kind() const = 0;
  virtual RoutingDecision route(const RouteQuery& query, const CandidatePool& pool) const = 0;
  virtual nlohmann::json checkpoint() const = 0;
  // FNV-1a over the serialized checkpoint.
  std::string checksum() const;
};

// Candidates with an all-zero profile carry no signal and are scored -inf
// by every router.
RoutingDecision sim_route(const RouteQuery& query, const CandidatePool& pool);

class SimRouter final : public Router {
 public:
  RouterKind kind() const override { return RouterKind::Sim; }
  RoutingDecision route(const RouteQuery& query, const CandidatePool& pool) const override {
    return sim_route(query, pool);
  }
  nlohmann::json checkpoint() const override { return {{"kind", "sim"}}; }
};

// ---------------------------------------------------------------------------
// MLPRouter: two towers into a shared latent space, reward = sigmoid(q . p).

struct MlpRouterConfig {
  std::size_t hidden = 64;
  int epochs = 100;
  double lr = 1e-3;
  std::size_t batch_size = 64;
};

struct MlpRouterModel {
  std::size_t dim = 0;
  MlpRouterConfig config;
  AffineLayer query_in, query_out;      // d -> h -> h
  AffineLayer profile_in, profile_out;  // d -> h -> h
  std::vector<double> loss_trace;       // full-data loss after each epoch

  std::vector<AffineLayer*> layers();
  double predict(std::span<const double> query, std::span<const double> profile) const;
};

MlpRouterModel mlp_fit(std::span<const InteractionRecord> interactions,
                       const std::map<std::string, Dense1>& query_vectors, const CandidatePool& pool,
                       const MlpRouterConfig& config, std::uint64_t seed);
RoutingDecision mlp_route(const MlpRouterModel& model, const RouteQuery& query, const CandidatePool& pool);
nlohmann::json mlp_to_json(const MlpRouterModel& model);
MlpRouterModel mlp_from_json(const nlohmann::json& j);

class MlpRouter final : public Router {
 public:
  explicit MlpRouter(MlpRouterModel model) : model_(std::move(model)) {}
  RouterKind kind() const override { return RouterKind::Mlp; }
  RoutingDecision route(const RouteQuery& query, const CandidatePool& pool) const override {
    return mlp_route(model_, query, pool);
  }
  nlohmann::json checkpoint() const override { return mlp_to_json(model_); }
  const MlpRouterModel& model() const { return model_; }

 private:
  MlpRouterModel model_;
};

// ---------------------------------------------------------------------------
// GraphRouter-lite: a task/query/model graph with reward-weighted query-model
// edges, two propagation rounds (affine + ReLU) and a decoder on
// [q ⊙ m ; q ; m] predicting sigmoid reward.

struct GraphRouterConfig {
  std::size_t hidden = 64;
  int epochs = 100;
  double lr = 1e-4;
  std::size_t batch_size = 64;  // reward edges per optimizer step
};

struct TrainingQuery {
  std::string id;
  Dense1 vector;
  std::string task_id;
};

struct GraphRouterLiteModel {
  std::size_t dim = 0;
  GraphRouterConfig config;
  std::vector<std::string> tasks;      // sorted
  std::vector<TrainingQuery> queries;  // sorted by id
  std::vector<std::string> models;     // training pool, sorted
  struct RewardEdge {
    std::size_t query;  // index into queries
    std::size_t model;  // index into models
    double reward;
  };
  std::vector<RewardEdge> edges;
  AffineLayer round1;   // d -> h
  AffineLayer round2;   // h -> h
  AffineLayer decoder;  // 3h -> 1
  std::vector<double> loss_trace;

  std::vector<AffineLayer*> layers();
};

GraphRouterLiteModel graphrouter_fit(std::span<const TrainingQuery> queries,
                                     std::span<const InteractionRecord> interactions,
                                     const CandidatePool& pool, const GraphRouterConfig& config,
                                     std::uint64_t seed);
// Inserts the query (attached to its task only), runs the frozen
// propagation and scores every pool model.
RoutingDecision graphrouter_route(const GraphRouterLiteModel& model, const RouteQuery& query,
                                  const CandidatePool& pool);
nlohmann::json graphrouter_to_json(const GraphRouterLiteModel& model);
GraphRouterLiteModel graphrouter_from_json(const nlohmann::json& j);

class GraphRouterLite final : public Router {
 public:
  explicit GraphRouterLite(GraphRouterLiteModel model) : model_(std::move(model)) {}
  RouterKind kind() const override { return RouterKind::Graph; }
  RoutingDecision route(const RouteQuery& query, const CandidatePool& pool) const override {
    return graphrouter_route(model_, query, pool);
  }
  nlohmann::json checkpoint() const override { return graphrouter_to_json(model_); }
  const GraphRouterLiteModel& model() const { return model_; }

 private:
  GraphRouterLiteModel model_;
};

std::unique_ptr<Router> router_from_checkpoint(const nlohmann::json& j);

// Adds the card to the evidence graph, builds its profile under `spec` over
// the expanded graph and appends it to the pool. Existing pool profiles and
// the router are left untouched.
const Profile& integrate_new_model(const Router& router, CandidatePool& pool, EvidenceGraph& graph,
                                   const ModelCard& card, const ProfileSpec& spec, ProfileContext& ctx,
                                   const std::map<std::string, ScoreScale>& benchmark_scales = {});

}  // namespace coldroute
