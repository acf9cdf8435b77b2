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

// Acceptance runner: checks each numbered criterion and prints one PASS/FAIL
// line per criterion. Exit status is non-zero when any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <thread>

#include <httplib.h>

#include "cli_runner.hpp"
#include "coldroute/app.hpp"
#include "coldroute/eval.hpp"
#include "coldroute/synth.hpp"
#include "support.hpp"

using namespace coldroute;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome propagation_oracle() {
  Rng rng(1);
  double worst = 0.0;
  int cases = 0;
  for (int t = 0; t < 50; ++t) {
    EvidenceGraph g = testing::random_graph(rng, 10, 4);
    auto s = testing::dense_propagation_matrix(g);
    auto x = testing::embeddings_of(g);
    for (int k = 1; k <= 4; ++k) {
      worst = std::max(worst, testing::max_abs_diff(testing::dense_power_apply(s, x, k), embgnn_propagate(g, k)));
      ++cases;
    }
  }
  return {worst <= 1e-9, std::to_string(cases) + " cases, max abs diff " + fmt("%.2e", worst)};
}

Outcome gradient_check() {
  double err = testing::traingnn_gradient_error(0);
  return {err <= 1e-4, "max relative error " + fmt("%.2e", err)};
}

Outcome training_sanity() {
  EvidenceGraph g = testing::two_cluster_graph(8, 0);
  TrainGnnModel m = traingnn_fit(g, 2, TrainGnnConfig{}, 0);
  double first = m.loss_trace.front(), last = m.loss_trace.back();
  return {last <= 0.5 * first, "loss " + fmt("%.4f", first) + " -> " + fmt("%.4f", last) + " (ratio " +
                                   fmt("%.3f", last / first) + ")"};
}

Outcome metric_oracles() {
  Rng rng(4);
  int mismatches = 0;
  for (int t = 0; t < 100; ++t) {
    auto qt = testing::random_quarter_table(rng, 20, 5, t % 2 == 0);
    RewardTable rt = testing::to_reward_table(qt);
    std::vector<std::size_t> choice;
    for (std::size_t i = 0; i < qt.queries.size(); ++i) choice.push_back(rng.below(qt.models.size()));
    auto decisions = testing::decisions_for(qt, choice);
    std::size_t m = rng.below(qt.models.size());
    mismatches += average_performance(decisions, rt) != testing::bf_average(qt, choice);
    mismatches += oracle(rt) != testing::bf_oracle(qt);
    mismatches += single_best(rt) != testing::bf_single_best(qt);
    mismatches += ncir(decisions, rt, qt.models[m]) != testing::bf_ncir(qt, choice, m);
  }
  return {mismatches == 0, "100 tables, " + std::to_string(mismatches) + " mismatches"};
}

Outcome baseline_ordering() {
  Rng rng(5);
  int violations = 0, checks = 0;
  const std::size_t dim = 8;
  EvalOptions opts;
  for (int t = 0; t < 100; ++t) {
    auto qt = testing::random_quarter_table(rng, 20, 5, t % 2 == 0);
    RewardTable rt = testing::to_reward_table(qt);
    CandidatePool pool;
    for (const auto& m : qt.models)
      pool.add({m, testing::random_vector(rng, dim), std::nullopt, ProfileSpec::emb_gnn(1)});
    std::vector<EvalQuery> queries;
    std::vector<RouteQuery> encoded;
    std::map<std::string, Dense1> vectors;
    for (std::size_t i = 0; i < qt.queries.size(); ++i) {
      std::string task = "task-" + std::to_string(i % 2);
      queries.push_back({qt.queries[i], "", task});
      encoded.push_back({qt.queries[i], testing::random_vector(rng, dim), task});
      vectors[qt.queries[i]] = encoded.back().vector;
    }
    std::vector<TrainingQuery> train;
    for (const auto& q : encoded) train.push_back({q.id, q.vector, *q.task_id});
    auto records = rt.records();

    std::vector<std::unique_ptr<Router>> routers;
    routers.push_back(std::make_unique<SimRouter>());
    routers.push_back(std::make_unique<MlpRouter>(mlp_fit(records, vectors, pool, opts.mlp, 0)));
    routers.push_back(std::make_unique<GraphRouterLite>(graphrouter_fit(train, records, pool, opts.graph_router, 0)));

    double orc = oracle(rt);
    for (const auto& r : routers) {
      std::vector<RoutingDecision> d;
      for (const auto& q : encoded) d.push_back(r->route(q, pool));
      double avg = average_performance(d, rt);
      violations += !(orc >= avg && avg >= 0.0);
      ++checks;
    }
    violations += !(orc >= single_best(rt).second);
    violations += !(random_baseline(rt, opts.random_seeds) <= orc + 1e-12);
    checks += 2;
  }
  return {violations == 0, std::to_string(checks) + " checks over 100 tables (sim, mlp, graph), " +
                               std::to_string(violations) + " violations"};
}

Outcome coldstart_direction() {
  SynthWorldConfig cfg;
  cfg.seed = 0;
  cfg.noise = 0.1;
  SynthWorld w = synth_world(cfg);
  DeterministicEmbedder enc(0, 64);
  EvidenceGraph g = build_graph(w.cards, enc.dim());
  ProfileContext ctx;
  ctx.encoder = &enc;
  EvalReport emb = run_coldstart(g, ProfileSpec::emb_gnn(2), w.pool, w.eval_queries, w.rewards, ctx);
  EvalReport flat = run_coldstart(g, ProfileSpec::flat(), w.pool, w.eval_queries, w.rewards, ctx);
  double rnd = emb.baselines.random_mean;
  bool ok = emb.average_performance >= rnd + 0.25 && std::abs(flat.average_performance - rnd) <= 0.1;
  return {ok, "emb:2 " + fmt("%.4f", emb.average_performance) + ", flat " + fmt("%.4f", flat.average_performance) +
                  ", random " + fmt("%.4f", rnd)};
}

Outcome integration_direction() {
  SynthWorldConfig cfg;
  cfg.seed = 0;
  cfg.with_new_model = true;
  SynthWorld w = synth_world(cfg);
  DeterministicEmbedder enc(0, 64);
  EvidenceGraph g = build_graph(w.cards, enc.dim());
  ProfileContext ctx;
  ctx.encoder = &enc;
  const ProfileSpec spec = ProfileSpec::emb_gnn(2);

  IntegrationInputs in;
  in.old_pool = w.pool;
  in.new_card = &*w.new_model;
  in.router = RouterKind::Graph;
  in.train_interactions = w.train_interactions;
  in.train_queries = w.train_queries;
  in.eval_queries = w.eval_queries;
  in.rewards = &w.rewards;
  EvalReport report = run_integration(g, spec, in, ctx);
  bool frozen = report.checksum_before == report.checksum_after;

  // Same frozen router, but the new model enters with an all-zero profile.
  ensure_embeddings(g, spec, ctx);
  auto profiles = make_profiles(g, spec, w.pool, ctx);
  CandidatePool pool;
  for (const auto& id : w.pool) pool.add(profiles.at(id));
  auto router = fit_router(RouterKind::Graph, pool, w.train_interactions, w.train_queries, &enc, EvalOptions{},
                           w.new_model->id);
  pool.add({w.new_model->id, Dense1(pool.dim(), 0.0), std::nullopt, spec});
  std::vector<RoutingDecision> zero_decisions;
  for (const auto& q : encode_queries(w.eval_queries, enc)) zero_decisions.push_back(router->route(q, pool));
  double zero_ncir = ncir(zero_decisions, w.rewards.restrict(w.rewards.queries(), pool.ids()), w.new_model->id);
  std::size_t chosen = 0;
  for (const auto& d : zero_decisions) chosen += d.chosen == w.new_model->id;

  bool ok = *report.ncir > 0.0 && frozen && zero_ncir == 0.0 && chosen == 0;
  return {ok, "ncir " + fmt("%.4f", *report.ncir) + ", checksum " + (frozen ? "unchanged" : "CHANGED") +
                  ", zero-profile ncir " + fmt("%.4f", zero_ncir) + " (chosen " + std::to_string(chosen) + "x)"};
}

Outcome cli_determinism() {
  auto dir = testing::scratch_dir("acceptance-det");
  const std::string data = "--data '" + testing::fixture_dir() + "' ";
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"coldstart-emb2", "--spec emb:2 --seed 7 eval coldstart"},
      {"coldstart-flat", "--spec flat eval coldstart"},
      {"coldstart-text1", "--spec text:1 eval coldstart"},
      {"coldstart-train2", "--spec train:2 --seed 3 eval coldstart"},
      {"integrate-graph", "--spec emb:2 eval integrate --router-kind graph"},
      {"integrate-mlp", "--spec train:1 eval integrate --router-kind mlp"},
      {"integrate-sim", "--spec emb:3 eval integrate --router-kind sim"},
  };
  int identical = 0;
  std::string failed;
  for (const auto& [name, args] : commands) {
    std::string reports[2], csvs[2];
    bool ran = true;
    for (int run = 0; run < 2; ++run) {
      auto out = dir / (name + "-" + std::to_string(run) + ".json");
      auto r = testing::run_cli_binary(data + args + " -o '" + out.string() + "'", dir);
      ran = ran && r.code == 0;
      reports[run] = testing::slurp(out);
      csvs[run] = testing::slurp(fs::path(out).replace_extension(".csv"));
    }
    if (ran && !reports[0].empty() && reports[0] == reports[1] && csvs[0] == csvs[1]) {
      ++identical;
    } else {
      failed += " " + name;
    }
  }
  fs::remove_all(dir);
  return {identical == static_cast<int>(commands.size()),
          std::to_string(identical) + "/" + std::to_string(commands.size()) +
              " commands byte-identical across two runs" + (failed.empty() ? "" : "; differing:" + failed)};
}

Outcome textgnn_reachability() {
  DataSet data = load_data_dir(testing::fixture_dir());
  EvidenceGraph g = build_graph(data.cards, 8);
  EchoSummarizer echo;
  int checked = 0, wrong = 0;
  for (int k : {1, 2}) {
    auto states = textgnn_propagate(g, k, echo, PromptTemplates::defaults());
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      if (g.node_at(i).kind != NodeKind::Model) continue;
      ++checked;
      wrong += testing::ids_mentioned(states[i]) != testing::within_distance(g, g.node_at(i).id, k);
    }
  }
  return {checked > 0 && wrong == 0,
          std::to_string(checked) + " model profiles at K=1,2, " + std::to_string(wrong) + " mismatched id sets"};
}

Outcome service_contract() {
  auto dir = testing::scratch_dir("acceptance-svc");
  AppConfig config;
  config.data_dir = testing::fixture_dir();
  config.spec = "emb:2";

  // Train and freeze a graph router on the fixture's old pool.
  {
    Providers p = make_providers(config);
    ProfileContext ctx = make_context(config, p);
    DataSet data = load_data_dir(config.data_dir);
    EvidenceGraph g = build_graph(data.cards, p.encoder->dim());
    ProfileSpec spec = parse_spec(config.spec);
    ensure_embeddings(g, spec, ctx);
    auto profiles = make_profiles(g, spec, data.pool(), ctx);
    CandidatePool pool;
    for (const auto& id : data.pool()) pool.add(profiles.at(id));
    auto router = fit_router(RouterKind::Graph, pool, data.interactions, data.train_queries, p.encoder.get(),
                             EvalOptions{}, data.new_model->id);
    config.router_checkpoint = (dir / "router.json").string();
    write_file(config.router_checkpoint, router->checkpoint().dump());
  }

  auto service = RoutingService::from_config(config, std::make_shared<Providers>(make_providers(config)));
  httplib::Server server;
  service->bind(server);
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client cli("127.0.0.1", port);

  DataSet data = load_data_dir(config.data_dir);
  std::vector<EvalQuery> replay(data.eval_queries.begin(), data.eval_queries.begin() + 20);
  auto route_all = [&](std::vector<std::string>& chosen) {
    for (const auto& q : replay) {
      nlohmann::json body = {{"query_text", q.text}, {"query_id", q.id}, {"task_id", *q.task_id}};
      auto r = cli.Post("/route", body.dump(), "application/json");
      chosen.push_back(r && r->status == 200 ? nlohmann::json::parse(r->body).at("model_id").get<std::string>() : "");
    }
  };
  auto pool_state = [&]() {
    auto r = cli.Get("/pool");
    return r && r->status == 200 ? nlohmann::json::parse(r->body) : nlohmann::json();
  };

  std::vector<std::string> before, after;
  route_all(before);
  nlohmann::json pool_before = pool_state();
  std::string card = nlohmann::json(*data.new_model).dump();
  auto reg = cli.Post("/models", card, "application/json");
  auto dup = cli.Post("/models", card, "application/json");
  nlohmann::json pool_after = pool_state();
  route_all(after);
  server.stop();
  worker.join();
  fs::remove_all(dir);

  bool all_routed = std::none_of(before.begin(), before.end(), [](auto& s) { return s.empty(); }) &&
                    std::none_of(after.begin(), after.end(), [](auto& s) { return s.empty(); });
  bool grew = !pool_before.is_null() && !pool_after.is_null() &&
              pool_after.at("size").get<int>() == pool_before.at("size").get<int>() + 1;
  bool registered = reg && reg->status == 200;
  bool conflict = dup && dup->status == 409;
  bool frozen = !pool_before.is_null() && !pool_after.is_null() &&
                pool_before.at("router_checksum") == pool_after.at("router_checksum");
  int changed = 0, to_new = 0;
  for (std::size_t i = 0; i < before.size(); ++i) {
    if (after[i] == data.new_model->id) {
      ++to_new;
    } else {
      changed += after[i] != before[i];
    }
  }
  bool ok = all_routed && grew && registered && conflict && frozen && changed == 0;
  std::string detail = "20 queries; pool " + (pool_before.is_null() ? std::string("?") : pool_before.at("size").dump()) +
                       " -> " + (pool_after.is_null() ? std::string("?") : pool_after.at("size").dump()) +
                       ", duplicate -> " + (dup ? std::to_string(dup->status) : std::string("no reply")) +
                       ", checksum " + (frozen ? "unchanged" : "CHANGED") + ", " + std::to_string(to_new) +
                       " routed to new model, " + std::to_string(changed) + " other decisions changed";
  return {ok, detail};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;  // 0 = no runtime bound
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "propagation oracle", 5, propagation_oracle},
      {2, "gradient correctness", 10, gradient_check},
      {3, "training sanity", 30, training_sanity},
      {4, "metric oracles", 5, metric_oracles},
      {5, "baseline ordering", 0, baseline_ordering},
      {6, "cold-start direction", 20, coldstart_direction},
      {7, "integration direction", 60, integration_direction},
      {8, "cli determinism", 0, cli_determinism},
      {9, "textgnn reachability", 0, textgnn_reachability},
      {10, "service contract", 0, service_contract},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool in_time = c.budget_s == 0 || secs < c.budget_s;
    bool pass = o.pass && in_time;
    failures += !pass;
    std::string timing = fmt("%.2f s", secs);
    if (c.budget_s > 0) timing += fmt(" of %.0f s", c.budget_s);
    std::printf("%s %2d %-22s %s [%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), timing.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
