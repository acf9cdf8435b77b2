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
#include <fstream>
#include <sstream>

#include "coldroute/app.hpp"
#include "coldroute/error.hpp"
#include "coldroute/remote.hpp"
#include "coldroute/textgnn.hpp"

namespace coldroute {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Config, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Config, "cannot write " + path.string());
  out << contents;
  if (!out) throw Error(ErrorCode::Config, "short write to " + path.string());
}

namespace {

nlohmann::json parse_json(const std::string& text, const std::string& where) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, where + ": " + e.what());
  }
}

template <typename T>
std::vector<T> convert_all(const std::vector<nlohmann::json>& rows, const std::string& where) {
  std::vector<T> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    try {
      out.push_back(rows[i].get<T>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Parse, where + " entry " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

std::vector<nlohmann::json> read_array(const fs::path& path) {
  if (!fs::exists(path)) return {};
  auto j = parse_json(read_file(path), path.string());
  if (!j.is_array()) throw Error(ErrorCode::Parse, path.string() + ": expected a JSON array");
  return {j.begin(), j.end()};
}

std::string jsonl(const std::vector<nlohmann::json>& rows) {
  std::string out;
  for (const auto& r : rows) out += r.dump() + "\n";
  return out;
}

template <typename T>
std::vector<nlohmann::json> to_rows(const std::vector<T>& items) {
  return {items.begin(), items.end()};
}

}  // namespace

std::vector<nlohmann::json> read_jsonl(const fs::path& path) {
  std::vector<nlohmann::json> rows;
  if (!fs::exists(path)) return rows;
  std::istringstream in(read_file(path));
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    rows.push_back(parse_json(line, path.string() + ":" + std::to_string(n)));
  }
  return rows;
}

void apply_config_json(AppConfig& c, const nlohmann::json& j) {
  try {
    if (j.contains("embed")) {
      const auto& e = j.at("embed");
      c.embed_url = e.value("url", c.embed_url);
      c.embed_model = e.value("model", c.embed_model);
      c.embed_dim = e.value("dim", c.embed_dim);
      c.embed_seed = e.value("seed", c.embed_seed);
    }
    if (j.contains("llm")) {
      const auto& l = j.at("llm");
      c.llm_url = l.value("url", c.llm_url);
      c.llm_model = l.value("model", c.llm_model);
    }
    c.api_key = j.value("api_key", c.api_key);
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    c.max_input_bytes = j.value("max_input_bytes", c.max_input_bytes);
    c.summarizer_threads = j.value("summarizer_threads", c.summarizer_threads);
    c.templates_dir = j.value("templates_dir", c.templates_dir);
    c.spec = j.value("spec", c.spec);
    c.data_dir = j.value("data_dir", c.data_dir);
    c.router = j.value("router", c.router);
    c.router_checkpoint = j.value("router_checkpoint", c.router_checkpoint);
    c.seed = j.value("seed", c.seed);
    c.random_seeds = j.value("random_seeds", c.random_seeds);
    c.output = j.value("output", c.output);
    c.snapshot = j.value("snapshot", c.snapshot);
    if (j.contains("bind")) {
      c.host = j.at("bind").value("host", c.host);
      c.port = j.at("bind").value("port", c.port);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, e.what());
  }
}

AppConfig load_config(const fs::path& path) {
  AppConfig c;
  auto j = parse_json(read_file(path), path.string());
  if (!j.is_object()) throw Error(ErrorCode::Config, path.string() + ": expected a JSON object");
  apply_config_json(c, j);
  return c;
}

void apply_env(AppConfig& c) {
  if (const char* v = std::getenv("RP_EMBED_URL")) c.embed_url = v;
  if (const char* v = std::getenv("RP_LLM_URL")) c.llm_url = v;
  if (const char* v = std::getenv("RP_API_KEY")) c.api_key = v;
}

Providers make_providers(const AppConfig& c) {
  Providers p;
  if (c.embed_url.empty()) {
    p.encoder = std::make_unique<DeterministicEmbedder>(c.embed_seed, c.embed_dim, c.max_input_bytes);
  } else {
    RemoteConfig rc;
    rc.url = c.embed_url;
    rc.model = c.embed_model;
    rc.api_key = c.api_key;
    rc.max_in_flight = c.max_in_flight;
    rc.max_input_bytes = c.max_input_bytes;
    p.encoder = std::make_unique<RemoteEncoder>(rc, c.embed_dim);
  }
  if (c.llm_url.empty()) {
    p.summarizer = std::make_unique<EchoSummarizer>();
  } else {
    RemoteConfig rc;
    rc.url = c.llm_url;
    rc.model = c.llm_model;
    rc.api_key = c.api_key;
    rc.max_in_flight = c.max_in_flight;
    p.summarizer = std::make_unique<RemoteSummarizer>(rc);
  }
  return p;
}

ProfileContext make_context(const AppConfig& c, const Providers& p) {
  ProfileContext ctx;
  ctx.encoder = p.encoder.get();
  ctx.summarizer = p.summarizer.get();
  if (!c.templates_dir.empty()) ctx.templates = PromptTemplates::load_dir(c.templates_dir);
  ctx.summarizer_threads = std::max<std::size_t>(c.summarizer_threads, 1);
  ctx.seed = c.seed;
  return ctx;
}

std::vector<std::string> DataSet::pool() const {
  std::vector<std::string> ids;
  for (const auto& m : cards.models) ids.push_back(m.id);
  return ids;
}

std::map<std::string, ScoreScale> DataSet::benchmark_scales() const {
  std::map<std::string, ScoreScale> out;
  for (const auto& b : cards.benchmarks) out[b.id] = b.score_scale;
  return out;
}

DataSet load_data_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::Config, "data directory not found: " + dir.string());
  DataSet d;
  d.cards.families = convert_all<FamilyCard>(read_array(dir / "families.json"), "families.json");
  d.cards.models = convert_all<ModelCard>(read_array(dir / "models.json"), "models.json");
  d.cards.benchmarks = convert_all<BenchmarkCard>(read_array(dir / "benchmarks.json"), "benchmarks.json");
  d.cards.domains = convert_all<DomainCard>(read_array(dir / "domains.json"), "domains.json");
  d.cards.queries = convert_all<QueryRecord>(read_jsonl(dir / "queries.jsonl"), "queries.jsonl");
  d.eval_queries = convert_all<EvalQuery>(read_jsonl(dir / "eval_queries.jsonl"), "eval_queries.jsonl");
  d.train_queries = convert_all<EvalQuery>(read_jsonl(dir / "train_queries.jsonl"), "train_queries.jsonl");
  d.interactions =
      convert_all<InteractionRecord>(read_jsonl(dir / "interactions.jsonl"), "interactions.jsonl");
  d.rewards = RewardTable::from_records(
      convert_all<InteractionRecord>(read_jsonl(dir / "rewards.jsonl"), "rewards.jsonl"));

  std::map<std::string, std::string> tasks;
  for (const auto& row : read_jsonl(dir / "tasks.jsonl")) {
    try {
      tasks[row.at("query_id").get<std::string>()] = row.at("task_id").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Parse, std::string("tasks.jsonl: ") + e.what());
    }
  }
  for (auto* list : {&d.eval_queries, &d.train_queries}) {
    for (auto& q : *list) {
      if (!q.task_id) {
        if (auto it = tasks.find(q.id); it != tasks.end()) q.task_id = it->second;
      }
    }
  }
  if (fs::exists(dir / "new_model.json")) {
    try {
      d.new_model = parse_json(read_file(dir / "new_model.json"), "new_model.json").get<ModelCard>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Parse, std::string("new_model.json: ") + e.what());
    }
  }
  return d;
}

void write_data_dir(const fs::path& dir, const DataSet& d) {
  fs::create_directories(dir);
  write_file(dir / "families.json", nlohmann::json(d.cards.families).dump(2) + "\n");
  write_file(dir / "models.json", nlohmann::json(d.cards.models).dump(2) + "\n");
  write_file(dir / "benchmarks.json", nlohmann::json(d.cards.benchmarks).dump(2) + "\n");
  write_file(dir / "domains.json", nlohmann::json(d.cards.domains).dump(2) + "\n");
  write_file(dir / "queries.jsonl", jsonl(to_rows(d.cards.queries)));
  write_file(dir / "eval_queries.jsonl", jsonl(to_rows(d.eval_queries)));
  write_file(dir / "train_queries.jsonl", jsonl(to_rows(d.train_queries)));
  write_file(dir / "interactions.jsonl", jsonl(to_rows(d.interactions)));
  write_file(dir / "rewards.jsonl", jsonl(to_rows(d.rewards.records())));
  if (d.new_model) write_file(dir / "new_model.json", nlohmann::json(*d.new_model).dump(2) + "\n");
}

}  // namespace coldroute
