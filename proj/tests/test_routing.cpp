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

#include <cmath>
#include <limits>

#include "coldroute/eval.hpp"
#include "coldroute/routing.hpp"
#include "coldroute/synth.hpp"
#include "expect.hpp"
#include "support.hpp"

using namespace coldroute;

namespace {

Profile prof(const std::string& id, Dense1 v) { return {id, std::move(v), std::nullopt, ProfileSpec::emb_gnn(1)}; }

CandidatePool pool_of(std::vector<Profile> ps) {
  CandidatePool p;
  for (auto& x : ps) p.add(std::move(x));
  return p;
}

// A planted world with its initial pool profiled under emb:2.
struct World {
  SynthWorld synth;
  EvidenceGraph graph;
  DeterministicEmbedder encoder{0, 32};
  ProfileContext ctx;
  CandidatePool pool;
  std::map<std::string, Dense1> query_vectors;
  std::vector<TrainingQuery> train_queries;

  explicit World(std::uint64_t seed, bool with_new = false) {
    SynthWorldConfig cfg;
    cfg.seed = seed;
    cfg.with_new_model = with_new;
    synth = synth_world(cfg);
    graph = build_graph(synth.cards, encoder.dim());
    encode_all(graph, encoder);
    ctx.encoder = &encoder;
    auto profiles = make_profiles(graph, ProfileSpec::emb_gnn(2), synth.pool, ctx);
    for (const auto& id : synth.pool) pool.add(profiles.at(id));
    for (const auto& q : synth.train_queries) {
      query_vectors[q.id] = encoder.encode(q.text);
      train_queries.push_back({q.id, query_vectors[q.id], *q.task_id});
    }
  }
};

double fraction_non_increasing(const std::vector<double>& trace) {
  int ok = 0;
  for (std::size_t i = 1; i < trace.size(); ++i) ok += trace[i] <= trace[i - 1] + 1e-12;
  return trace.size() < 2 ? 1.0 : static_cast<double>(ok) / static_cast<double>(trace.size() - 1);
}

}  // namespace

TEST_CASE("decide picks the argmax with smallest-id ties") {
  CHECK(decide("q", {{"b", 0.2}, {"a", 0.9}}).chosen == "a");
  CHECK(decide("q", {{"c", 0.5}, {"b", 0.5}, {"d", 0.1}}).chosen == "b");
  const double ninf = -std::numeric_limits<double>::infinity();
  CHECK(decide("q", {{"a", ninf}, {"b", -3.0}}).chosen == "b");
  CHECK(decide("q", {{"b", ninf}, {"a", ninf}}).chosen == "a");
  CHECK_THROWS_CODE(decide("q", {}), ErrorCode::EmptyPool);
}

TEST_CASE("decisions are invariant to positive score scaling") {
  Rng rng(0);
  for (int t = 0; t < 200; ++t) {
    ScoreList s;
    std::size_t n = 1 + rng.below(6);
    for (std::size_t i = 0; i < n; ++i) s.push_back({"m" + std::to_string(rng.below(100)), std::round(rng.normal() * 4) / 4});
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end(), [](auto& a, auto& b) { return a.first == b.first; }), s.end());
    double k = 0.01 + 10.0 * rng.uniform();
    ScoreList scaled = s;
    for (auto& [id, v] : scaled) v *= k;
    std::reverse(scaled.begin(), scaled.end());
    CHECK(decide("q", s).chosen == decide("q", scaled).chosen);
  }
}

TEST_CASE("similarity router examples") {
  RouteQuery q{"q", {1.0, 0.0}, std::nullopt};
  CHECK(sim_route(q, pool_of({prof("only", {0.0, 1.0})})).chosen == "only");

  RoutingDecision d = sim_route(q, pool_of({prof("b", {0.0, 1.0}), prof("a", {2.0, 0.0})}));
  CHECK(d.chosen == "a");
  CHECK(d.scores[0].second == doctest::Approx(0.0));
  CHECK(d.scores[1].second == doctest::Approx(1.0));

  CHECK(sim_route(q, pool_of({prof("z", {1.0, 1.0}), prof("y", {1.0, 1.0})})).chosen == "y");

  // Zero profiles are unrankable.
  RoutingDecision z = sim_route(q, pool_of({prof("a", {0.0, 0.0}), prof("b", {-1.0, 0.0})}));
  CHECK(z.chosen == "b");
  CHECK(std::isinf(z.scores[0].second));

  CHECK_THROWS_CODE(sim_route(q, CandidatePool{}), ErrorCode::EmptyPool);
  RouteQuery wrong{"q", {1.0, 0.0, 0.0}, std::nullopt};
  CHECK_THROWS_CODE(sim_route(wrong, pool_of({prof("a", {1.0, 0.0})})), ErrorCode::DimensionMismatch);
}

TEST_CASE("similarity routing ignores query scale") {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    std::vector<Profile> ps;
    for (int i = 0; i < 4; ++i) ps.push_back(prof("m" + std::to_string(i), testing::random_vector(rng, 5)));
    CandidatePool pool = pool_of(ps);
    Dense1 v = testing::random_vector(rng, 5);
    Dense1 w = v;
    const double k = 0.001 + 50.0 * rng.uniform();
    for (double& x : w) x *= k;
    CHECK(sim_route({"q", v, std::nullopt}, pool).chosen == sim_route({"q", w, std::nullopt}, pool).chosen);
  }
}

TEST_CASE("pool constraints") {
  CandidatePool p = pool_of({prof("a", {1.0, 0.0})});
  CHECK_THROWS_CODE(p.add(prof("a", {0.0, 1.0})), ErrorCode::DuplicateId);
  CHECK_THROWS_CODE(p.add(prof("b", {0.0, 1.0, 2.0})), ErrorCode::DimensionMismatch);
  CHECK(p.ids() == std::vector<std::string>{"a"});
}

TEST_CASE("interaction records") {
  InteractionRecord r = nlohmann::json::parse(R"({"query_id":"q","model_id":"m","reward":0.5})").get<InteractionRecord>();
  CHECK(r.reward == 0.5);
  CHECK_THROWS_CODE(nlohmann::json::parse(R"({"query_id":"q","model_id":"m","reward":1.5})").get<InteractionRecord>(),
                    ErrorCode::Parse);
}

TEST_CASE("router kind names") {
  CHECK(router_kind_from_string("sim") == RouterKind::Sim);
  CHECK(router_kind_from_string("mlp") == RouterKind::Mlp);
  CHECK(router_kind_from_string("graph") == RouterKind::Graph);
  CHECK_THROWS_CODE(router_kind_from_string("knn"), ErrorCode::Config);
}

TEST_CASE("mlp router regresses a constant reward") {
  Rng rng(5);
  std::vector<Profile> ps;
  for (int i = 0; i < 4; ++i) ps.push_back(prof("m" + std::to_string(i), testing::random_vector(rng, 6)));
  CandidatePool pool = pool_of(ps);
  std::map<std::string, Dense1> qv;
  std::vector<InteractionRecord> inter;
  for (int i = 0; i < 16; ++i) {
    std::string id = "q" + std::to_string(i);
    qv[id] = testing::random_vector(rng, 6);
    for (const auto& m : pool.ids()) inter.push_back({id, m, 0.5});
  }
  MlpRouterModel model = mlp_fit(inter, qv, pool, MlpRouterConfig{}, 0);
  for (const auto& [id, v] : qv)
    for (const auto& c : pool.candidates()) CHECK(std::abs(model.predict(v, c.profile.vector) - 0.5) <= 0.05);
}

TEST_CASE("mlp router with no interactions keeps its initialization") {
  CandidatePool pool = pool_of({prof("a", {1.0, 0.0})});
  MlpRouterModel a = mlp_fit({}, {}, pool, MlpRouterConfig{}, 3);
  MlpRouterModel b = mlp_fit({}, {}, pool, MlpRouterConfig{}, 3);
  CHECK(a.loss_trace.empty());
  CHECK(mlp_to_json(a) == mlp_to_json(b));
}

TEST_CASE("mlp router fitting errors") {
  CandidatePool pool = pool_of({prof("a", {1.0, 0.0})});
  std::map<std::string, Dense1> qv = {{"q", {1.0, 0.0}}};
  std::vector<InteractionRecord> bad_model = {{"q", "ghost", 1.0}};
  CHECK_THROWS_CODE(mlp_fit(bad_model, qv, pool, MlpRouterConfig{}, 0), ErrorCode::UnknownModelInInteractions);
  std::vector<InteractionRecord> bad_query = {{"nope", "a", 1.0}};
  CHECK_THROWS_CODE(mlp_fit(bad_query, qv, pool, MlpRouterConfig{}, 0), ErrorCode::UnknownNode);
}

TEST_CASE("mlp router on a planted world") {
  World w(0);
  MlpRouterConfig cfg;
  cfg.epochs = 20;
  MlpRouterModel a = mlp_fit(w.synth.train_interactions, w.query_vectors, w.pool, cfg, 1);
  MlpRouterModel b = mlp_fit(w.synth.train_interactions, w.query_vectors, w.pool, cfg, 1);
  CHECK(mlp_to_json(a) == mlp_to_json(b));

  // A candidate carrying an existing profile scores like its twin.
  CandidatePool twin = w.pool;
  Profile copy = w.pool.candidates().front().profile;
  copy.model_id = "zz-twin";
  twin.add(copy);
  RouteQuery q{"q", w.encoder.encode(w.synth.eval_queries.front().text), std::nullopt};
  RoutingDecision d = mlp_route(a, q, twin);
  CHECK(d.scores.front().second == d.scores.back().second);
  CHECK(mlp_route(a, q, twin) == d);
  MlpRouterModel back = mlp_from_json(nlohmann::json::parse(mlp_to_json(a).dump()));
  CHECK(mlp_route(back, q, twin) == d);
}

TEST_CASE("graph router on a single all-correct task") {
  CandidatePool pool = pool_of({prof("m", {0.6, 0.8, 0.0})});
  Rng rng(2);
  std::vector<TrainingQuery> qs;
  std::vector<InteractionRecord> inter;
  for (int i = 0; i < 8; ++i) {
    Dense1 v = testing::random_vector(rng, 3);
    l2_normalize(v);
    qs.push_back({"q" + std::to_string(i), v, "task"});
    inter.push_back({qs.back().id, "m", 1.0});
  }
  GraphRouterLiteModel model = graphrouter_fit(qs, inter, pool, GraphRouterConfig{}, 0);
  for (const auto& q : qs) {
    RoutingDecision d = graphrouter_route(model, {"x", q.vector, std::string("task")}, pool);
    CHECK(d.scores.front().second >= 0.9);
  }
}

TEST_CASE("graph router gives an unseen twin the score of an edge-free model") {
  World w(1);
  // Drop every interaction of one pool model so it sits in the graph without reward edges.
  const std::string quiet = w.synth.pool.back();
  std::vector<InteractionRecord> inter;
  for (const auto& r : w.synth.train_interactions)
    if (r.model_id != quiet) inter.push_back(r);
  GraphRouterConfig cfg;
  cfg.epochs = 10;
  GraphRouterLiteModel model = graphrouter_fit(w.train_queries, inter, w.pool, cfg, 0);
  for (const auto& e : model.edges) CHECK(model.models[e.model] != quiet);

  CandidatePool expanded = w.pool;
  Profile copy = w.pool.profile(quiet);
  copy.model_id = "zz-new";
  expanded.add(copy);
  for (int i = 0; i < 5; ++i) {
    const auto& eq = w.synth.eval_queries[static_cast<std::size_t>(i) * 17];
    RouteQuery q{eq.id, w.encoder.encode(eq.text), eq.task_id};
    RoutingDecision d = graphrouter_route(model, q, expanded);
    double a = 0, b = 0;
    for (const auto& [id, s] : d.scores) {
      if (id == quiet) a = s;
      if (id == "zz-new") b = s;
    }
    CHECK(std::abs(a - b) <= 1e-6);
    CHECK(graphrouter_route(model, q, expanded) == d);
  }
}

TEST_CASE("graph router errors") {
  World w(0);
  GraphRouterConfig cfg;
  cfg.epochs = 1;
  GraphRouterLiteModel model = graphrouter_fit(w.train_queries, w.synth.train_interactions, w.pool, cfg, 0);
  Dense1 v = w.encoder.encode("anything");
  CHECK_THROWS_CODE(graphrouter_route(model, {"q", v, std::string("no-such-task")}, w.pool), ErrorCode::UnknownTask);
  CHECK_THROWS_CODE(graphrouter_route(model, {"q", v, std::nullopt}, w.pool), ErrorCode::UnknownTask);
  CHECK_THROWS_CODE(graphrouter_route(model, {"q", v, model.tasks.front()}, CandidatePool{}), ErrorCode::EmptyPool);

  auto unassigned = w.train_queries;
  unassigned.front().task_id.clear();
  CHECK_THROWS_CODE(graphrouter_fit(unassigned, w.synth.train_interactions, w.pool, cfg, 0), ErrorCode::UnassignedQuery);
  std::vector<InteractionRecord> ghost = {{w.train_queries.front().id, "ghost", 1.0}};
  CHECK_THROWS_CODE(graphrouter_fit(w.train_queries, ghost, w.pool, cfg, 0), ErrorCode::UnknownModelInInteractions);
}

TEST_CASE("graph router fitting is deterministic and round-trips") {
  World w(2);
  GraphRouterConfig cfg;
  cfg.epochs = 5;
  auto a = graphrouter_fit(w.train_queries, w.synth.train_interactions, w.pool, cfg, 4);
  auto b = graphrouter_fit(w.train_queries, w.synth.train_interactions, w.pool, cfg, 4);
  CHECK(graphrouter_to_json(a) == graphrouter_to_json(b));
  auto back = graphrouter_from_json(nlohmann::json::parse(graphrouter_to_json(a).dump()));
  CHECK(graphrouter_to_json(back) == graphrouter_to_json(a));
  auto r = router_from_checkpoint(graphrouter_to_json(a));
  CHECK(r->kind() == RouterKind::Graph);
  CHECK(r->checksum() == GraphRouterLite(a).checksum());
}

TEST_CASE("training losses mostly decrease") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    World w(seed);
    MlpRouterModel mlp = mlp_fit(w.synth.train_interactions, w.query_vectors, w.pool, MlpRouterConfig{}, seed);
    CHECK(fraction_non_increasing(mlp.loss_trace) >= 0.9);
    GraphRouterLiteModel gr =
        graphrouter_fit(w.train_queries, w.synth.train_interactions, w.pool, GraphRouterConfig{}, seed);
    CHECK(fraction_non_increasing(gr.loss_trace) >= 0.9);
  }
}

TEST_CASE("integration leaves every router frozen") {
  World w(0, true);
  REQUIRE(w.synth.new_model);
  EvalOptions opts;
  opts.mlp.epochs = 5;
  opts.graph_router.epochs = 5;
  for (RouterKind kind : {RouterKind::Sim, RouterKind::Mlp, RouterKind::Graph}) {
    auto router = fit_router(kind, w.pool, w.synth.train_interactions, w.synth.train_queries, &w.encoder, opts);
    const std::string before = router->checkpoint().dump();
    CandidatePool pool = w.pool;
    EvidenceGraph graph = w.graph;
    const Profile& p = integrate_new_model(*router, pool, graph, *w.synth.new_model, ProfileSpec::emb_gnn(2), w.ctx);
    CHECK(p.model_id == w.synth.new_model->id);
    CHECK(pool.size() == w.pool.size() + 1);
    for (const auto& c : w.pool.candidates()) CHECK(pool.profile(c.model_id) == c.profile);
    for (const auto& eq : w.synth.eval_queries) {
      RouteQuery q{eq.id, w.encoder.encode(eq.text), eq.task_id};
      RoutingDecision d = router->route(q, pool);
      CHECK(d.scores.size() == pool.size());
    }
    CHECK(router->checkpoint().dump() == before);
    CHECK_THROWS_CODE(integrate_new_model(*router, pool, graph, *w.synth.new_model, ProfileSpec::emb_gnn(2), w.ctx),
                      ErrorCode::DuplicateId);
    CHECK(pool.size() == w.pool.size() + 1);
  }
}

TEST_CASE("failed integration leaves graph and pool unchanged") {
  World w(0, true);
  SimRouter router;
  CandidatePool pool = w.pool;
  EvidenceGraph graph = w.graph;
  ModelCard card = *w.synth.new_model;
  card.family_id = "no-such-family";
  CHECK_THROWS_CODE(integrate_new_model(router, pool, graph, card, ProfileSpec::emb_gnn(2), w.ctx),
                    ErrorCode::DanglingReference);
  CHECK(graph == w.graph);
  CHECK(pool.size() == w.pool.size());
}
