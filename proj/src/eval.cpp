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

#include "coldroute/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "coldroute/error.hpp"
#include "coldroute/features.hpp"
#include "coldroute/rng.hpp"

namespace coldroute {

namespace {

void insert_sorted(std::vector<std::string>& v, const std::string& s) {
  auto it = std::lower_bound(v.begin(), v.end(), s);
  if (it == v.end() || *it != s) v.insert(it, s);
}

std::string missing(std::string_view q, std::string_view m) {
  return "no reward for (" + std::string(q) + ", " + std::string(m) + ")";
}

}  // namespace

RewardTable RewardTable::from_records(std::span<const InteractionRecord> records) {
  RewardTable t;
  for (const auto& r : records) {
    if (t.has(r.query_id, r.model_id)) throw Error(ErrorCode::DuplicateId, r.query_id + "/" + r.model_id);
    t.set(r.query_id, r.model_id, r.reward);
  }
  return t;
}

void RewardTable::set(const std::string& query_id, const std::string& model_id, double reward) {
  if (!(reward >= 0.0 && reward <= 1.0)) {
    throw Error(ErrorCode::InvalidSpec, "reward outside [0, 1] for " + query_id + "/" + model_id);
  }
  insert_sorted(queries_, query_id);
  insert_sorted(models_, model_id);
  rewards_[{query_id, model_id}] = reward;
}

bool RewardTable::has(std::string_view query_id, std::string_view model_id) const {
  return rewards_.find(std::make_pair(std::string(query_id), std::string(model_id))) != rewards_.end();
}

double RewardTable::at(std::string_view query_id, std::string_view model_id) const {
  auto it = rewards_.find(std::make_pair(std::string(query_id), std::string(model_id)));
  if (it == rewards_.end()) throw Error(ErrorCode::MissingReward, missing(query_id, model_id));
  return it->second;
}

RewardTable RewardTable::restrict(std::span<const std::string> queries, std::span<const std::string> models) const {
  RewardTable t;
  for (const auto& q : queries) {
    for (const auto& m : models) t.set(q, m, at(q, m));
  }
  return t;
}

void RewardTable::require_complete() const {
  for (const auto& q : queries_) {
    for (const auto& m : models_) {
      if (!has(q, m)) throw Error(ErrorCode::MissingReward, missing(q, m));
    }
  }
}

std::vector<InteractionRecord> RewardTable::records() const {
  std::vector<InteractionRecord> out;
  for (const auto& [key, r] : rewards_) out.push_back({key.first, key.second, r});
  return out;
}

double average_performance(std::span<const RoutingDecision> decisions, const RewardTable& rewards) {
  if (decisions.empty()) throw Error(ErrorCode::EmptyTable, "no decisions to score");
  double sum = 0.0;
  for (const auto& d : decisions) sum += rewards.at(d.query_id, d.chosen);
  return sum / static_cast<double>(decisions.size());
}

double ncir(std::span<const RoutingDecision> decisions, const RewardTable& rewards, std::string_view new_model_id,
            double threshold) {
  if (decisions.empty()) throw Error(ErrorCode::EmptyTable, "no decisions to score");
  std::size_t hits = 0;
  for (const auto& d : decisions) {
    // Every decision must be scoreable, even those that did not pick the new model.
    double r = rewards.at(d.query_id, d.chosen);
    if (d.chosen == new_model_id && r >= threshold) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(decisions.size());
}

double oracle(const RewardTable& rewards) {
  if (rewards.empty()) throw Error(ErrorCode::EmptyTable, "oracle");
  double sum = 0.0;
  for (const auto& q : rewards.queries()) {
    double best = 0.0;
    for (const auto& m : rewards.models()) best = std::max(best, rewards.at(q, m));
    sum += best;
  }
  return sum / static_cast<double>(rewards.queries().size());
}

std::pair<std::string, double> single_best(const RewardTable& rewards) {
  if (rewards.empty()) throw Error(ErrorCode::EmptyTable, "single_best");
  std::pair<std::string, double> best{"", -1.0};
  for (const auto& m : rewards.models()) {  // sorted, so strict > keeps the smallest id on ties
    double sum = 0.0;
    for (const auto& q : rewards.queries()) sum += rewards.at(q, m);
    double mean = sum / static_cast<double>(rewards.queries().size());
    if (mean > best.second) best = {m, mean};
  }
  return best;
}

double random_baseline(const RewardTable& rewards, std::span<const std::uint64_t> seeds) {
  if (rewards.empty()) throw Error(ErrorCode::EmptyTable, "random_baseline");
  if (seeds.empty()) throw Error(ErrorCode::InvalidSpec, "random baseline needs at least one seed");
  const auto& models = rewards.models();
  double total = 0.0;
  for (std::uint64_t seed : seeds) {
    Rng rng(seed);
    double sum = 0.0;
    for (const auto& q : rewards.queries()) sum += rewards.at(q, models[rng.below(models.size())]);
    total += sum / static_cast<double>(rewards.queries().size());
  }
  return total / static_cast<double>(seeds.size());
}

std::vector<std::uint64_t> default_random_seeds() { return {0, 1, 2, 3, 4, 5}; }

Baselines compute_baselines(const RewardTable& rewards, std::span<const std::uint64_t> seeds) {
  Baselines b;
  b.oracle = oracle(rewards);
  std::tie(b.single_best_model, b.single_best) = single_best(rewards);
  b.random_mean = random_baseline(rewards, seeds);
  b.random_seeds.assign(seeds.begin(), seeds.end());
  return b;
}

nlohmann::json report_to_json(const EvalReport& r) {
  nlohmann::json decisions = nlohmann::json::array();
  for (const auto& d : r.decisions) {
    nlohmann::json scores = nlohmann::json::array();
    for (const auto& [id, s] : d.scores) {
      // -inf (unrankable) has no JSON spelling; null stands in for it.
      scores.push_back({id, std::isfinite(s) ? nlohmann::json(s) : nlohmann::json(nullptr)});
    }
    decisions.push_back({{"query_id", d.query_id}, {"chosen", d.chosen}, {"scores", scores}});
  }
  nlohmann::json j = {
      {"protocol", r.protocol},
      {"spec", r.spec},
      {"router", r.router},
      {"seed", r.seed},
      {"average_performance", r.average_performance},
      {"decisions", decisions},
      {"baselines",
       {{"oracle", r.baselines.oracle},
        {"single_best", {{"model_id", r.baselines.single_best_model}, {"value", r.baselines.single_best}}},
        {"random_mean", r.baselines.random_mean},
        {"random_seeds", r.baselines.random_seeds}}},
      {"metadata",
       {{"version", COLDROUTE_VERSION},
        {"random_seeds_note", "random baseline averages the listed seeds; the default list is 0..5"}}},
  };
  if (r.ncir) j["ncir"] = *r.ncir;
  if (r.new_model) j["new_model"] = *r.new_model;
  if (r.checksum_before) j["router_checksum_before"] = *r.checksum_before;
  if (r.checksum_after) j["router_checksum_after"] = *r.checksum_after;
  return j;
}

std::string report_csv(const EvalReport& report, const RewardTable& rewards) {
  std::string out = "query_id,chosen,reward\n";
  char buf[32];
  for (const auto& d : report.decisions) {
    std::snprintf(buf, sizeof buf, "%.6f", rewards.at(d.query_id, d.chosen));
    out += d.query_id + "," + d.chosen + "," + buf + "\n";
  }
  return out;
}

void to_json(nlohmann::json& j, const EvalQuery& q) {
  j = {{"id", q.id}, {"text", q.text}};
  if (q.task_id) j["task_id"] = *q.task_id;
}

void from_json(const nlohmann::json& j, EvalQuery& q) {
  j.at("id").get_to(q.id);
  j.at("text").get_to(q.text);
  q.task_id.reset();
  if (j.contains("task_id") && !j.at("task_id").is_null()) q.task_id = j.at("task_id").get<std::string>();
}

std::vector<RouteQuery> encode_queries(std::span<const EvalQuery> queries, const TextEncoder& encoder) {
  std::vector<std::string> texts;
  for (const auto& q : queries) {
    if (q.text.empty()) throw Error(ErrorCode::EmptyText, "query " + q.id);
    texts.push_back(q.text);
  }
  auto vecs = encoder.encode_batch(texts);
  if (vecs.size() != queries.size()) throw Error(ErrorCode::EncoderFailure, "query batch size mismatch");
  std::vector<RouteQuery> out;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    out.push_back({queries[i].id, std::move(vecs[i]), queries[i].task_id});
  }
  return out;
}

void ensure_embeddings(EvidenceGraph& graph, const ProfileSpec& spec, const ProfileContext& ctx) {
  if (spec.representation != Representation::Embedding) return;
  bool complete = graph.dim() != 0;
  for (const auto& n : graph.nodes()) {
    if (!n.embedding || n.embedding->size() != graph.dim()) complete = false;
  }
  if (complete && (!ctx.encoder || ctx.encoder->dim() == graph.dim())) return;
  if (!ctx.encoder) throw Error(ErrorCode::Config, "embedding profiles need a text encoder");
  encode_all(graph, *ctx.encoder);
}

namespace {

CandidatePool build_pool(const EvidenceGraph& graph, const ProfileSpec& spec, std::span<const std::string> ids,
                         ProfileContext& ctx) {
  if (ids.empty()) throw Error(ErrorCode::EmptyPool, "evaluation pool");
  auto profiles = make_profiles(graph, spec, ids, ctx);
  CandidatePool pool;
  for (const auto& id : ids) pool.add(std::move(profiles.at(id)));
  return pool;
}

std::vector<RoutingDecision> route_all(const Router& router, std::span<const RouteQuery> queries,
                                       const CandidatePool& pool) {
  std::vector<RoutingDecision> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(router.route(q, pool));
  return out;
}

std::vector<std::string> query_ids(std::span<const EvalQuery> queries) {
  std::vector<std::string> ids;
  for (const auto& q : queries) ids.push_back(q.id);
  return ids;
}

}  // namespace

EvalReport run_coldstart(EvidenceGraph graph, const ProfileSpec& spec, std::span<const std::string> pool_ids,
                         std::span<const EvalQuery> queries, const RewardTable& rewards, ProfileContext& ctx,
                         const EvalOptions& options) {
  if (!ctx.encoder) throw Error(ErrorCode::Config, "evaluation needs a text encoder for queries");
  if (queries.empty()) throw Error(ErrorCode::EmptyTable, "no evaluation queries");
  ensure_embeddings(graph, spec, ctx);
  const RewardTable table = rewards.restrict(query_ids(queries), pool_ids);
  CandidatePool pool = build_pool(graph, spec, pool_ids, ctx);
  auto routed = encode_queries(queries, *ctx.encoder);

  EvalReport report;
  report.protocol = "coldstart";
  report.spec = to_string(spec);
  report.router = std::string(to_string(RouterKind::Sim));
  report.seed = options.seed;
  report.decisions = route_all(SimRouter{}, routed, pool);
  report.average_performance = average_performance(report.decisions, table);
  report.baselines = compute_baselines(table, options.random_seeds);
  return report;
}

std::unique_ptr<Router> fit_router(RouterKind kind, const CandidatePool& pool,
                                   std::span<const InteractionRecord> interactions,
                                   std::span<const EvalQuery> train_queries, const TextEncoder* encoder,
                                   const EvalOptions& options, std::string_view excluded) {
  if (!excluded.empty()) {
    for (const auto& r : interactions) {
      if (r.model_id == excluded) {
        throw Error(ErrorCode::LeakedInteraction,
                    "training interaction " + r.query_id + "/" + r.model_id + " names the model being integrated");
      }
    }
  }
  if (kind == RouterKind::Sim) return std::make_unique<SimRouter>();
  if (!encoder) throw Error(ErrorCode::Config, "router training needs a text encoder for queries");
  auto routed = encode_queries(train_queries, *encoder);
  if (kind == RouterKind::Mlp) {
    std::map<std::string, Dense1> vectors;
    for (auto& q : routed) vectors[q.id] = std::move(q.vector);
    return std::make_unique<MlpRouter>(mlp_fit(interactions, vectors, pool, options.mlp, options.seed));
  }
  std::vector<TrainingQuery> tq;
  for (auto& q : routed) {
    if (!q.task_id) throw Error(ErrorCode::UnassignedQuery, q.id);
    tq.push_back({q.id, std::move(q.vector), *q.task_id});
  }
  return std::make_unique<GraphRouterLite>(
      graphrouter_fit(tq, interactions, pool, options.graph_router, options.seed));
}

EvalReport run_integration(EvidenceGraph graph, const ProfileSpec& spec, const IntegrationInputs& in,
                           ProfileContext& ctx, const EvalOptions& options) {
  if (!in.new_card || !in.rewards) throw Error(ErrorCode::Config, "integration needs a new model and rewards");
  if (!ctx.encoder) throw Error(ErrorCode::Config, "evaluation needs a text encoder for queries");
  if (in.eval_queries.empty()) throw Error(ErrorCode::EmptyTable, "no evaluation queries");
  const std::string& new_id = in.new_card->id;
  for (const auto& r : in.train_interactions) {
    if (r.model_id == new_id) {
      throw Error(ErrorCode::LeakedInteraction,
                  "training interaction " + r.query_id + "/" + r.model_id + " names the model being integrated");
    }
  }
  if (std::find(in.old_pool.begin(), in.old_pool.end(), new_id) != in.old_pool.end()) {
    throw Error(ErrorCode::DuplicateId, new_id + " is already in the pool");
  }

  ensure_embeddings(graph, spec, ctx);
  CandidatePool pool = build_pool(graph, spec, in.old_pool, ctx);
  std::unique_ptr<const Router> router =
      fit_router(in.router, pool, in.train_interactions, in.train_queries, ctx.encoder, options, new_id);

  EvalReport report;
  report.protocol = "integration";
  report.spec = to_string(spec);
  report.router = std::string(to_string(in.router));
  report.seed = options.seed;
  report.new_model = new_id;
  report.checksum_before = router->checksum();

  integrate_new_model(*router, pool, graph, *in.new_card, spec, ctx, options.benchmark_scales);
  auto routed = encode_queries(in.eval_queries, *ctx.encoder);
  report.decisions = route_all(*router, routed, pool);
  report.checksum_after = router->checksum();

  const RewardTable table = in.rewards->restrict(query_ids(in.eval_queries), pool.ids());
  report.average_performance = average_performance(report.decisions, table);
  report.ncir = ncir(report.decisions, table, new_id, options.ncir_threshold);
  report.baselines = compute_baselines(table, options.random_seeds);
  return report;
}

}  // namespace coldroute
