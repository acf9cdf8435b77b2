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

#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <httplib.h>

#include "coldroute/app.hpp"
#include "coldroute/error.hpp"
#include "coldroute/synth.hpp"

namespace coldroute {

namespace {

namespace fs = std::filesystem;

// Flags that override the configuration file when given.
struct Overrides {
  std::optional<std::string> config;
  std::optional<std::string> data;
  std::optional<std::string> spec;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> dim;
  std::optional<std::string> out;
  std::optional<std::string> router_file;
  std::vector<std::uint64_t> random_seeds;
  bool json = false;
};

AppConfig resolve(const Overrides& o) {
  AppConfig c;
  std::string path = o.config.value_or("");
  if (path.empty()) {
    if (const char* env = std::getenv("RP_CONFIG")) path = env;
  }
  if (!path.empty()) c = load_config(path);
  apply_env(c);
  if (o.data) c.data_dir = *o.data;
  if (o.spec) c.spec = *o.spec;
  if (o.seed) c.seed = *o.seed;
  if (o.dim) c.embed_dim = *o.dim;
  if (o.out) c.output = *o.out;
  if (o.router_file) c.router_checkpoint = *o.router_file;
  if (!o.random_seeds.empty()) c.random_seeds = o.random_seeds;
  return c;
}

EvalOptions eval_options(const AppConfig& c, const DataSet& data) {
  EvalOptions opt;
  opt.seed = c.seed;
  opt.random_seeds = c.random_seeds;
  opt.benchmark_scales = data.benchmark_scales();
  return opt;
}

// Prints `j` as JSON, or the plain-text rendering when --json is off.
void emit(const Overrides& o, const nlohmann::json& j, const std::string& text) {
  if (o.json) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << text;
  }
}

void write_or_print(const std::string& path, const std::string& contents) {
  if (path.empty() || path == "-") {
    std::cout << contents;
  } else {
    write_file(path, contents);
  }
}

CandidatePool build_pool(const EvidenceGraph& graph, const ProfileSpec& spec, const std::vector<std::string>& ids,
                         ProfileContext& ctx) {
  auto profiles = make_profiles(graph, spec, ids, ctx);
  CandidatePool pool;
  for (const auto& id : ids) pool.add(std::move(profiles.at(id)));
  return pool;
}

struct Loaded {
  AppConfig config;
  std::shared_ptr<Providers> providers;
  ProfileContext ctx;
  DataSet data;
  ProfileSpec spec;
  EvidenceGraph graph;
};

Loaded load_all(const Overrides& o, std::optional<std::string> spec_text = std::nullopt) {
  Loaded l{resolve(o), nullptr, {}, {}, {}, EvidenceGraph(1)};
  l.providers = std::make_shared<Providers>(make_providers(l.config));
  l.ctx = make_context(l.config, *l.providers);
  l.data = load_data_dir(l.config.data_dir);
  l.spec = parse_spec(spec_text.value_or(l.config.spec));
  l.graph = build_graph(l.data.cards, l.providers->encoder->dim());
  ensure_embeddings(l.graph, l.spec, l.ctx);
  return l;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

std::string report_summary(const EvalReport& r) {
  std::string s = r.protocol + " spec=" + r.spec + " router=" + r.router + "\n";
  s += "  average_performance " + fmt(r.average_performance) + "\n";
  if (r.ncir) s += "  ncir                " + fmt(*r.ncir) + " (new model " + r.new_model.value_or("") + ")\n";
  s += "  oracle              " + fmt(r.baselines.oracle) + "\n";
  s += "  single_best         " + fmt(r.baselines.single_best) + " (" + r.baselines.single_best_model + ")\n";
  s += "  random              " + fmt(r.baselines.random_mean) + "\n";
  if (r.checksum_before) {
    s += "  router checksum     " + *r.checksum_before +
         (*r.checksum_before == *r.checksum_after ? " (unchanged)\n" : " -> " + *r.checksum_after + "\n");
  }
  return s;
}

void write_report(const Overrides& o, const AppConfig& c, const EvalReport& report, const RewardTable& rewards,
                  const std::string& csv_path) {
  nlohmann::json j = report_to_json(report);
  if (c.output.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  write_file(c.output, j.dump(2) + "\n");
  std::string csv = csv_path;
  if (csv.empty()) csv = fs::path(c.output).replace_extension(".csv").string();
  write_file(csv, report_csv(report, rewards));
  emit(o, {{"report", c.output}, {"csv", csv}, {"average_performance", report.average_performance}},
       report_summary(report) + "  wrote " + c.output + " and " + csv + "\n");
}

int cmd_graph(const Overrides& o, bool build) {
  AppConfig c = resolve(o);
  DataSet data = load_data_dir(c.data_dir);
  EvidenceGraph graph = build_graph(data.cards, c.embed_dim);
  graph.validate();
  std::map<std::string, int> kinds;
  for (const auto& n : graph.nodes()) ++kinds[std::string(to_string(n.kind))];
  nlohmann::json summary = {{"nodes", graph.node_count()}, {"edges", graph.edge_count()}, {"kinds", kinds}};
  std::string text = "graph ok: " + std::to_string(graph.node_count()) + " nodes, " +
                     std::to_string(graph.edge_count()) + " edges\n";
  if (build) {
    Providers p = make_providers(c);
    encode_all(graph, *p.encoder);
    if (!c.output.empty()) {
      write_file(c.output, graph_to_json(graph).dump(2) + "\n");
      text += "wrote " + c.output + "\n";
      summary["output"] = c.output;
    } else if (!o.json) {
      std::cout << graph_to_json(graph).dump(2) << "\n";
      return 0;
    }
  }
  emit(o, summary, text);
  return 0;
}

int cmd_profile(const Overrides& o, const std::string& spec_text) {
  Loaded l = load_all(o, spec_text);
  auto ids = l.data.pool();
  auto profiles = make_profiles(l.graph, l.spec, ids, l.ctx);
  // One profile per line.
  std::string lines;
  for (const auto& id : ids) lines += nlohmann::json(profiles.at(id)).dump() + "\n";
  write_or_print(l.config.output, lines);
  if (!l.config.output.empty()) {
    emit(o, {{"profiles", ids.size()}, {"output", l.config.output}},
         "wrote " + std::to_string(ids.size()) + " " + to_string(l.spec) + " profiles to " + l.config.output + "\n");
  }
  return 0;
}

int cmd_router_train(const Overrides& o, const std::string& kind_text, const std::string& new_model_file) {
  Loaded l = load_all(o);
  RouterKind kind = router_kind_from_string(kind_text);
  std::string excluded;
  if (!new_model_file.empty()) {
    excluded = nlohmann::json::parse(read_file(new_model_file)).at("id").get<std::string>();
  } else if (l.data.new_model) {
    excluded = l.data.new_model->id;
  }
  CandidatePool pool = build_pool(l.graph, l.spec, l.data.pool(), l.ctx);
  auto router = fit_router(kind, pool, l.data.interactions, l.data.train_queries, l.ctx.encoder,
                           eval_options(l.config, l.data), excluded);
  write_or_print(l.config.output, router->checkpoint().dump() + "\n");
  if (!l.config.output.empty()) {
    emit(o, {{"router", kind_text}, {"checksum", router->checksum()}, {"output", l.config.output}},
         "trained " + kind_text + " router, checksum " + router->checksum() + ", wrote " + l.config.output + "\n");
  }
  return 0;
}

std::unique_ptr<Router> load_router(const AppConfig& c) {
  if (c.router_checkpoint.empty()) return std::make_unique<SimRouter>();
  try {
    return router_from_checkpoint(nlohmann::json::parse(read_file(c.router_checkpoint)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, c.router_checkpoint + ": " + e.what());
  }
}

int cmd_route(const Overrides& o, const std::string& text, const std::string& task, const std::string& queries_file) {
  Loaded l = load_all(o);
  auto router = load_router(l.config);
  CandidatePool pool = build_pool(l.graph, l.spec, l.data.pool(), l.ctx);
  std::vector<EvalQuery> queries;
  if (!queries_file.empty()) {
    for (const auto& row : read_jsonl(queries_file)) queries.push_back(row.get<EvalQuery>());
  } else {
    if (text.empty()) throw Error(ErrorCode::Config, "route needs --query or --queries");
    queries.push_back({"query", text, task.empty() ? std::nullopt : std::optional<std::string>(task)});
  }
  nlohmann::json out = nlohmann::json::array();
  std::string lines;
  for (const auto& q : encode_queries(queries, *l.ctx.encoder)) {
    RoutingDecision d = router->route(q, pool);
    nlohmann::json scores = nlohmann::json::array();
    for (const auto& [id, s] : d.scores) {
      scores.push_back({{"model_id", id}, {"score", std::isfinite(s) ? nlohmann::json(s) : nlohmann::json()}});
    }
    out.push_back({{"query_id", d.query_id}, {"model_id", d.chosen}, {"scores", scores}});
    lines += d.query_id + " -> " + d.chosen + "\n";
  }
  emit(o, out, lines);
  return 0;
}

int cmd_eval(const Overrides& o, bool integration, const std::string& router_kind, const std::string& csv) {
  Loaded l = load_all(o);
  EvalOptions opt = eval_options(l.config, l.data);
  if (!integration) {
    auto pool = l.data.pool();
    EvalReport r = run_coldstart(l.graph, l.spec, pool, l.data.eval_queries, l.data.rewards, l.ctx, opt);
    write_report(o, l.config, r, l.data.rewards, csv);
    return 0;
  }
  if (!l.data.new_model) throw Error(ErrorCode::Config, "eval integrate needs new_model.json in the data directory");
  auto pool = l.data.pool();
  IntegrationInputs in;
  in.old_pool = pool;
  in.new_card = &*l.data.new_model;
  in.router = router_kind_from_string(router_kind.empty() ? l.config.router : router_kind);
  in.train_interactions = l.data.interactions;
  in.train_queries = l.data.train_queries;
  in.eval_queries = l.data.eval_queries;
  in.rewards = &l.data.rewards;
  EvalReport r = run_integration(l.graph, l.spec, in, l.ctx, opt);
  write_report(o, l.config, r, l.data.rewards, csv);
  return 0;
}

int cmd_integrate(const Overrides& o, const std::string& card_file) {
  Loaded l = load_all(o);
  ModelCard card;
  try {
    card = nlohmann::json::parse(read_file(card_file)).get<ModelCard>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, card_file + ": " + e.what());
  }
  auto router = load_router(l.config);
  CandidatePool pool = build_pool(l.graph, l.spec, l.data.pool(), l.ctx);
  std::string before = router->checksum();
  const Profile& p = integrate_new_model(*router, pool, l.graph, card, l.spec, l.ctx, l.data.benchmark_scales());
  nlohmann::json j = {{"added", card.id},
                      {"models", pool.ids()},
                      {"profile", p},
                      {"router_checksum_before", before},
                      {"router_checksum_after", router->checksum()}};
  if (!l.config.output.empty()) write_file(l.config.output, j.dump(2) + "\n");
  emit(o, j,
       "integrated " + card.id + "; pool now has " + std::to_string(pool.size()) + " models; router checksum " +
           router->checksum() + (before == router->checksum() ? " (unchanged)\n" : " (CHANGED)\n"));
  return 0;
}

int cmd_serve(const Overrides& o, std::optional<std::string> host, std::optional<int> port,
              std::optional<std::string> snapshot) {
  AppConfig c = resolve(o);
  if (host) c.host = *host;
  if (port) c.port = *port;
  if (snapshot) c.snapshot = *snapshot;
  auto providers = std::make_shared<Providers>(make_providers(c));
  auto service = RoutingService::from_config(c, providers);
  httplib::Server server;
  service->bind(server);
  std::cerr << "coldroute " << COLDROUTE_VERSION << " listening on " << c.host << ":" << c.port << "\n";
  if (!server.listen(c.host, c.port)) throw Error(ErrorCode::Config, "cannot listen on " + c.host + ":" + std::to_string(c.port));
  return 0;
}

int cmd_synth(const Overrides& o, const SynthWorldConfig& sc, const std::string& dir) {
  SynthWorld w = synth_world(sc);
  DataSet d;
  d.cards = w.cards;
  d.eval_queries = w.eval_queries;
  d.train_queries = w.train_queries;
  d.interactions = w.train_interactions;
  d.rewards = w.rewards;
  d.new_model = w.new_model;
  write_data_dir(dir, d);
  emit(o, {{"output", dir}, {"models", w.pool.size()}, {"eval_queries", w.eval_queries.size()}},
       "wrote synthetic world to " + dir + "\n");
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"coldroute: cold-start LLM routing from public-signal model profiles", "coldroute"};
  app.set_version_flag("--version", std::string(COLDROUTE_VERSION));
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  app.add_option("--config", o.config, "JSON configuration file (default: $RP_CONFIG)");
  app.add_option("--data", o.data, "data directory");
  app.add_option("--spec", o.spec, "profile spec: flat, text:K, emb:K or train:K");
  app.add_option("--seed", o.seed, "training / evaluation seed");
  app.add_option("--dim", o.dim, "embedding dimension for the offline embedder");
  app.add_option("--random-seeds", o.random_seeds, "seeds averaged by the random baseline");
  app.add_flag("--json", o.json, "machine-readable output on stdout");

  auto* graph = app.add_subcommand("graph", "build or validate the evidence graph");
  graph->require_subcommand(1);
  auto* graph_build = graph->add_subcommand("build", "encode the graph and write a JSON snapshot");
  graph_build->add_option("-o,--out", o.out, "output file");
  auto* graph_validate = graph->add_subcommand("validate", "check cards for consistency");

  std::string spec_arg;
  auto* profile = app.add_subcommand("profile", "compute pool profiles");
  profile->add_option("spec", spec_arg, "profile spec")->required();
  profile->add_option("-o,--out", o.out, "output file");

  std::string kind_arg, new_model_file;
  auto* router = app.add_subcommand("router", "router training");
  router->require_subcommand(1);
  auto* train = router->add_subcommand("train", "fit a router on the pool's interactions");
  train->add_option("kind", kind_arg, "sim, mlp or graph")->required();
  train->add_option("--new-model", new_model_file, "model card that must not appear in training data");
  train->add_option("-o,--out", o.out, "checkpoint file");

  std::string query_text, task_arg, queries_file;
  auto* route = app.add_subcommand("route", "route queries over the pool");
  route->add_option("--router", o.router_file, "router checkpoint (default: similarity router)");
  route->add_option("--query", query_text, "query text");
  route->add_option("--task", task_arg, "task id (graph router)");
  route->add_option("--queries", queries_file, "JSONL file of {id, text, task_id?}");

  std::string router_kind, csv_path;
  auto* eval = app.add_subcommand("eval", "run an evaluation protocol");
  eval->require_subcommand(1);
  auto* coldstart = eval->add_subcommand("coldstart", "similarity routing with profiles only");
  auto* integ = eval->add_subcommand("integrate", "train, freeze, integrate the new model, route");
  integ->add_option("--router-kind", router_kind, "sim, mlp or graph");
  for (auto* sub : {coldstart, integ}) {
    sub->add_option("-o,--out", o.out, "report JSON path");
    sub->add_option("--csv", csv_path, "per-query CSV path (default: next to the report)");
  }

  std::string card_file;
  auto* integrate = app.add_subcommand("integrate", "add a model card to the pool of a frozen router");
  integrate->add_option("card", card_file, "model card JSON")->required()->check(CLI::ExistingFile);
  integrate->add_option("--router", o.router_file, "router checkpoint");
  integrate->add_option("-o,--out", o.out, "output file");

  std::optional<std::string> host, snapshot;
  std::optional<int> port;
  auto* serve = app.add_subcommand("serve", "run the HTTP routing service");
  serve->add_option("--router", o.router_file, "router checkpoint");
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "bind port");
  serve->add_option("--snapshot", snapshot, "pool snapshot file");

  SynthWorldConfig sc;
  std::string synth_dir;
  auto* synth = app.add_subcommand("synth", "write a planted synthetic world as a data directory");
  synth->add_option("-o,--out", synth_dir, "output directory")->required();
  synth->add_option("--world-seed", sc.seed, "world seed");
  synth->add_option("--domains", sc.num_domains, "number of domains");
  synth->add_option("--models-per-domain", sc.models_per_specialty, "specialists per domain");
  synth->add_option("--queries-per-domain", sc.queries_per_domain, "evaluation queries per domain");
  synth->add_option("--noise", sc.noise, "reward flip probability");
  synth->add_flag("--new-model", sc.with_new_model, "hold out a new specialist model");

  for (auto* sub : {graph, graph_build, graph_validate, profile, router, train, route, eval, coldstart, integ,
                    integrate, serve, synth}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*graph_build) return cmd_graph(o, true);
    if (*graph_validate) return cmd_graph(o, false);
    if (*profile) return cmd_profile(o, spec_arg);
    if (*train) return cmd_router_train(o, kind_arg, new_model_file);
    if (*route) return cmd_route(o, query_text, task_arg, queries_file);
    if (*coldstart) return cmd_eval(o, false, "", csv_path);
    if (*integ) return cmd_eval(o, true, router_kind, csv_path);
    if (*integrate) return cmd_integrate(o, card_file);
    if (*serve) return cmd_serve(o, host, port, snapshot);
    if (*synth) return cmd_synth(o, sc, synth_dir);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: Parse: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << app.help();
  return 2;
}

}  // namespace coldroute
