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

#include <filesystem>
#include <mutex>

#include <httplib.h>

#include "coldroute/app.hpp"
#include "coldroute/error.hpp"

namespace coldroute {

namespace {

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Transport:
    case ErrorCode::Timeout:
    case ErrorCode::EncoderFailure:
    case ErrorCode::SummarizerFailure:
      return 503;
    case ErrorCode::DuplicateId:
      return 409;
    default:
      return 400;
  }
}

RoutingService::Response error_response(int status, const std::string& code, const std::string& message) {
  return {status, {{"error", code}, {"message", message}}};
}

RoutingService::Response error_response(const Error& e) {
  return error_response(status_for(e.code()), std::string(to_string(e.code())), e.what());
}

nlohmann::json score_json(double s) { return std::isfinite(s) ? nlohmann::json(s) : nlohmann::json(nullptr); }

}  // namespace

RoutingService::RoutingService(EvidenceGraph graph, CandidatePool pool, std::unique_ptr<const Router> router,
                               ProfileSpec spec, ProfileContext ctx, std::map<std::string, ScoreScale> scales,
                               std::string snapshot_path)
    : graph_(std::move(graph)),
      pool_(std::move(pool)),
      router_(std::move(router)),
      spec_(spec),
      ctx_(std::move(ctx)),
      scales_(std::move(scales)),
      snapshot_path_(std::move(snapshot_path)) {
  if (!router_) throw Error(ErrorCode::Config, "service needs a router");
  if (!ctx_.encoder) throw Error(ErrorCode::Config, "service needs a text encoder");
  if (!snapshot_path_.empty() && std::filesystem::exists(snapshot_path_)) load_snapshot();
}

std::unique_ptr<RoutingService> RoutingService::from_config(const AppConfig& config,
                                                            std::shared_ptr<Providers> providers) {
  DataSet data = load_data_dir(config.data_dir);
  ProfileSpec spec = parse_spec(config.spec);
  ProfileContext ctx = make_context(config, *providers);
  EvidenceGraph graph = build_graph(data.cards, providers->encoder->dim());
  ensure_embeddings(graph, spec, ctx);
  auto ids = data.pool();
  auto profiles = make_profiles(graph, spec, ids, ctx);
  CandidatePool pool;
  for (const auto& id : ids) pool.add(std::move(profiles.at(id)));

  std::unique_ptr<const Router> router;
  if (config.router_checkpoint.empty()) {
    router = std::make_unique<SimRouter>();
  } else {
    router = router_from_checkpoint(nlohmann::json::parse(read_file(config.router_checkpoint)));
  }
  auto service = std::make_unique<RoutingService>(std::move(graph), std::move(pool), std::move(router), spec,
                                                  std::move(ctx), data.benchmark_scales(), config.snapshot);
  service->providers_ = std::move(providers);
  return service;
}

RoutingService::Response RoutingService::route(const std::string& body) const {
  ++requests_;
  RouteQuery query;
  try {
    auto j = nlohmann::json::parse(body);
    const auto& text = j.at("query_text");
    if (!text.is_string() || text.get<std::string>().empty()) {
      return error_response(400, "BadRequest", "query_text must be a non-empty string");
    }
    query.id = j.value("query_id", std::string("request"));
    if (j.contains("task_id") && !j.at("task_id").is_null()) query.task_id = j.at("task_id").get<std::string>();
    query.vector = ctx_.encoder->encode(text.get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    return error_response(400, "BadRequest", e.what());
  } catch (const Error& e) {
    return error_response(e);
  }

  try {
    std::shared_lock lock(mutex_);
    RoutingDecision d = router_->route(query, pool_);
    nlohmann::json scores = nlohmann::json::array();
    for (const auto& [id, s] : d.scores) scores.push_back({{"model_id", id}, {"score", score_json(s)}});
    return {200, {{"query_id", d.query_id}, {"model_id", d.chosen}, {"scores", scores}}};
  } catch (const Error& e) {
    return error_response(e);
  }
}

RoutingService::Response RoutingService::register_model(const std::string& body) {
  ModelCard card;
  try {
    card = nlohmann::json::parse(body).get<ModelCard>();
  } catch (const nlohmann::json::exception& e) {
    return error_response(400, "BadRequest", e.what());
  } catch (const Error& e) {
    return error_response(400, std::string(to_string(e.code())), e.what());
  }
  if (card.id.empty()) return error_response(400, "BadRequest", "model card needs an id");

  std::unique_lock lock(mutex_);
  if (pool_.contains(card.id) || graph_.contains(card.id)) {
    return error_response(409, "DuplicateId", card.id + " is already registered");
  }
  try {
    integrate_new_model(*router_, pool_, graph_, card, spec_, ctx_, scales_);
  } catch (const Error& e) {
    return error_response(e);
  }
  registered_.push_back(card);
  try {
    save_snapshot();
  } catch (const Error& e) {
    return error_response(500, std::string(to_string(e.code())), e.what());
  }
  return {200,
          {{"models", pool_.ids()}, {"size", pool_.size()}, {"router_checksum", router_->checksum()}}};
}

RoutingService::Response RoutingService::pool() const {
  std::shared_lock lock(mutex_);
  return {200,
          {{"models", pool_.ids()},
           {"size", pool_.size()},
           {"spec", to_string(spec_)},
           {"router", std::string(to_string(router_->kind()))},
           {"router_checksum", router_->checksum()}}};
}

RoutingService::Response RoutingService::healthz() const {
  return {200, {{"status", "ok"}, {"version", COLDROUTE_VERSION}}};
}

void RoutingService::save_snapshot() const {
  if (snapshot_path_.empty()) return;
  nlohmann::json profiles = nlohmann::json::array();
  for (const auto& c : pool_.candidates()) profiles.push_back(c.profile);
  nlohmann::json j = {{"spec", to_string(spec_)},
                      {"router_checksum", router_->checksum()},
                      {"registered", registered_},
                      {"pool", profiles}};
  // Write-then-rename so a crash never leaves a torn snapshot behind.
  std::string tmp = snapshot_path_ + ".tmp";
  write_file(tmp, j.dump(2) + "\n");
  std::filesystem::rename(tmp, snapshot_path_);
}

void RoutingService::load_snapshot() {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(snapshot_path_));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, snapshot_path_ + ": " + e.what());
  }
  if (j.value("spec", "") != to_string(spec_)) {
    throw Error(ErrorCode::Config, "snapshot " + snapshot_path_ + " was written for spec " + j.value("spec", "?"));
  }
  std::map<std::string, Profile> saved;
  for (const auto& p : j.at("pool")) {
    Profile profile = p.get<Profile>();
    saved[profile.model_id] = std::move(profile);
  }
  for (const auto& c : j.at("registered")) {
    ModelCard card = c.get<ModelCard>();
    if (pool_.contains(card.id)) continue;
    add_model_node(graph_, card, scales_);
    if (graph_.dim() == ctx_.encoder->dim()) {
      graph_.set_embedding(graph_.index_of(card.id), ctx_.encoder->encode(card.description));
    }
    auto it = saved.find(card.id);
    if (it == saved.end()) throw Error(ErrorCode::Parse, "snapshot lacks a profile for " + card.id);
    pool_.add(it->second);
    registered_.push_back(std::move(card));
  }
}

void RoutingService::bind(httplib::Server& server) {
  auto reply = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.Post("/route", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, route(req.body));
  });
  server.Post("/models", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, register_model(req.body));
  });
  server.Get("/pool", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, pool()); });
  server.Get("/healthz", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, healthz()); });
}

}  // namespace coldroute
