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

#include "coldroute/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "coldroute/error.hpp"

namespace coldroute {

namespace {

bool edge_less(const Edge& a, const Edge& b) {
  return std::tie(a.src, a.dst, a.kind) < std::tie(b.src, b.dst, b.kind);
}

bool same_pair(const Edge& e, std::string_view u, std::string_view v) {
  return (e.src == u && e.dst == v) || (e.src == v && e.dst == u);
}

void check_finite(const Dense1& v, std::string_view id) {
  for (double x : v) {
    if (!std::isfinite(x)) throw Error(ErrorCode::InvalidGraph, "non-finite embedding on " + std::string(id));
  }
}

}  // namespace

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Model: return "Model";
    case NodeKind::ModelFamily: return "ModelFamily";
    case NodeKind::Benchmark: return "Benchmark";
    case NodeKind::Domain: return "Domain";
    case NodeKind::Query: return "Query";
  }
  return "?";
}

std::string_view to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::ModelFamilyLink: return "ModelFamilyLink";
    case EdgeKind::ModelBenchmarkScore: return "ModelBenchmarkScore";
    case EdgeKind::BenchmarkDomainLink: return "BenchmarkDomainLink";
    case EdgeKind::QueryBenchmarkLink: return "QueryBenchmarkLink";
  }
  return "?";
}

NodeKind node_kind_from_string(std::string_view s) {
  for (auto k : {NodeKind::Model, NodeKind::ModelFamily, NodeKind::Benchmark, NodeKind::Domain,
                 NodeKind::Query}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::Parse, "unknown node kind '" + std::string(s) + "'");
}

EdgeKind edge_kind_from_string(std::string_view s) {
  for (auto k : {EdgeKind::ModelFamilyLink, EdgeKind::ModelBenchmarkScore,
                 EdgeKind::BenchmarkDomainLink, EdgeKind::QueryBenchmarkLink}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::Parse, "unknown edge kind '" + std::string(s) + "'");
}

std::pair<NodeKind, NodeKind> endpoint_kinds(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::ModelFamilyLink: return {NodeKind::Model, NodeKind::ModelFamily};
    case EdgeKind::ModelBenchmarkScore: return {NodeKind::Model, NodeKind::Benchmark};
    case EdgeKind::BenchmarkDomainLink: return {NodeKind::Benchmark, NodeKind::Domain};
    case EdgeKind::QueryBenchmarkLink: return {NodeKind::Query, NodeKind::Benchmark};
  }
  return {NodeKind::Model, NodeKind::Model};
}

bool EvidenceGraph::contains(std::string_view id) const { return index_.find(id) != index_.end(); }

std::size_t EvidenceGraph::index_of(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error(ErrorCode::UnknownNode, std::string(id));
  return it->second;
}

const Node& EvidenceGraph::node(std::string_view id) const { return nodes_[index_of(id)]; }

void EvidenceGraph::set_embedding(std::size_t i, Dense1 embedding) {
  if (dim_ != 0 && embedding.size() != dim_) {
    throw Error(ErrorCode::DimensionMismatch,
                nodes_[i].id + ": expected " + std::to_string(dim_) + ", got " +
                    std::to_string(embedding.size()));
  }
  check_finite(embedding, nodes_[i].id);
  nodes_[i].embedding = std::move(embedding);
}

EvidenceGraph EvidenceGraph::from_parts(std::size_t dim, std::vector<Node> nodes,
                                       std::vector<Edge> edges) {
  EvidenceGraph g(dim);
  std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
  std::sort(edges.begin(), edges.end(), edge_less);
  g.nodes_ = std::move(nodes);
  g.edges_ = std::move(edges);
  for (std::size_t i = 0; i < g.nodes_.size(); ++i) {
    if (!g.index_.emplace(g.nodes_[i].id, i).second) throw Error(ErrorCode::DuplicateId, g.nodes_[i].id);
  }
  g.validate();
  g.rebuild_index();
  return g;
}

void EvidenceGraph::add_node(Node node) {
  if (contains(node.id)) throw Error(ErrorCode::DuplicateId, node.id);
  if (node.embedding) {
    if (node.embedding->size() != dim_) {
      throw Error(ErrorCode::DimensionMismatch, node.id);
    }
    check_finite(*node.embedding, node.id);
  }
  auto pos = std::lower_bound(nodes_.begin(), nodes_.end(), node.id,
                              [](const Node& n, const std::string& id) { return n.id < id; });
  nodes_.insert(pos, std::move(node));
  rebuild_index();
}

void EvidenceGraph::add_edge(Edge edge) {
  auto src = index_.find(edge.src);
  auto dst = index_.find(edge.dst);
  if (src == index_.end()) throw Error(ErrorCode::DanglingReference, edge.src);
  if (dst == index_.end()) throw Error(ErrorCode::DanglingReference, edge.dst);
  if (edge.src == edge.dst) throw Error(ErrorCode::InvalidGraph, "self edge on " + edge.src);

  auto [ka, kb] = endpoint_kinds(edge.kind);
  NodeKind ks = nodes_[src->second].kind;
  NodeKind kd = nodes_[dst->second].kind;
  if (!((ks == ka && kd == kb) || (ks == kb && kd == ka))) {
    throw Error(ErrorCode::InvalidGraph, std::string(to_string(edge.kind)) + " cannot join " +
                                             edge.src + " and " + edge.dst);
  }
  bool scored = edge.kind == EdgeKind::ModelBenchmarkScore;
  if (scored != edge.weight.has_value()) {
    throw Error(ErrorCode::InvalidGraph, "weight presence mismatch on " + edge.src + "-" + edge.dst);
  }
  if (edge.weight && !(*edge.weight >= 0.0 && *edge.weight <= 1.0)) {
    throw Error(ErrorCode::ScoreOutOfRange, edge.src + "-" + edge.dst);
  }
  for (const auto& e : edges_) {
    if (e.kind == edge.kind && same_pair(e, edge.src, edge.dst)) {
      throw Error(ErrorCode::DuplicateId, "edge " + edge.src + "-" + edge.dst);
    }
  }
  auto pos = std::lower_bound(edges_.begin(), edges_.end(), edge, edge_less);
  edges_.insert(pos, std::move(edge));
  rebuild_index();
}

void EvidenceGraph::remove_node(std::string_view id) {
  std::size_t i = index_of(id);
  std::erase_if(edges_, [&](const Edge& e) { return e.src == id || e.dst == id; });
  nodes_.erase(nodes_.begin() + static_cast<std::ptrdiff_t>(i));
  rebuild_index();
}

const Edge* EvidenceGraph::find_edge(std::string_view u, std::string_view v) const {
  for (const auto& e : edges_) {
    if (same_pair(e, u, v)) return &e;
  }
  return nullptr;
}

void EvidenceGraph::rebuild_index() {
  index_.clear();
  for (std::size_t i = 0; i < nodes_.size(); ++i) index_.emplace(nodes_[i].id, i);
  adjacency_.assign(nodes_.size(), {});
  for (const auto& e : edges_) {
    std::size_t a = index_.at(e.src);
    std::size_t b = index_.at(e.dst);
    double w = e.weight.value_or(1.0);
    adjacency_[a].push_back({b, w, e.weight.has_value()});
    adjacency_[b].push_back({a, w, e.weight.has_value()});
  }
  // Node indices follow id order, so sorting by index sorts by id.
  for (auto& adj : adjacency_) {
    std::sort(adj.begin(), adj.end(),
              [](const Neighbor& x, const Neighbor& y) { return x.index < y.index; });
  }
}

void EvidenceGraph::validate() const {
  std::set<std::string> seen;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (!seen.insert(n.id).second) throw Error(ErrorCode::DuplicateId, n.id);
    if (i > 0 && !(nodes_[i - 1].id < n.id)) throw Error(ErrorCode::InvalidGraph, "nodes not sorted");
    if (n.embedding) {
      if (n.embedding->size() != dim_) throw Error(ErrorCode::DimensionMismatch, n.id);
      check_finite(*n.embedding, n.id);
    }
  }
  std::set<std::tuple<std::string, std::string, EdgeKind>> pairs;
  for (const auto& e : edges_) {
    if (!contains(e.src)) throw Error(ErrorCode::DanglingReference, e.src);
    if (!contains(e.dst)) throw Error(ErrorCode::DanglingReference, e.dst);
    if (e.src == e.dst) throw Error(ErrorCode::InvalidGraph, "self edge on " + e.src);
    auto [ka, kb] = endpoint_kinds(e.kind);
    NodeKind ks = node(e.src).kind;
    NodeKind kd = node(e.dst).kind;
    if (!((ks == ka && kd == kb) || (ks == kb && kd == ka))) {
      throw Error(ErrorCode::InvalidGraph, "edge kind constraint violated: " + e.src + "-" + e.dst);
    }
    if ((e.kind == EdgeKind::ModelBenchmarkScore) != e.weight.has_value()) {
      throw Error(ErrorCode::InvalidGraph, "weight presence mismatch on " + e.src + "-" + e.dst);
    }
    if (e.weight && !(*e.weight >= 0.0 && *e.weight <= 1.0)) {
      throw Error(ErrorCode::ScoreOutOfRange, e.src + "-" + e.dst);
    }
    auto key = e.src < e.dst ? std::make_tuple(e.src, e.dst, e.kind)
                             : std::make_tuple(e.dst, e.src, e.kind);
    if (!pairs.insert(key).second) throw Error(ErrorCode::InvalidGraph, "multi-edge " + e.src + "-" + e.dst);
  }
}

std::vector<std::string> closed_neighborhood(const EvidenceGraph& graph, std::string_view v) {
  std::size_t i = graph.index_of(v);
  std::vector<std::string> out;
  bool self_placed = false;
  for (const auto& nb : graph.neighbors(i)) {
    if (!self_placed && nb.index > i) {
      out.push_back(graph.node_at(i).id);
      self_placed = true;
    }
    out.push_back(graph.node_at(nb.index).id);
  }
  if (!self_placed) out.push_back(graph.node_at(i).id);
  return out;
}

double propagation_coefficient(const EvidenceGraph& graph, std::string_view u, std::string_view v) {
  std::size_t iu = graph.index_of(u);
  std::size_t iv = graph.index_of(v);
  double w = 1.0;
  if (iu != iv) {
    const auto& adj = graph.neighbors(iv);
    auto it = std::lower_bound(adj.begin(), adj.end(), iu,
                               [](const Neighbor& n, std::size_t idx) { return n.index < idx; });
    if (it == adj.end() || it->index != iu) {
      throw Error(ErrorCode::NotAdjacent, std::string(u) + "," + std::string(v));
    }
    w = it->weight;
  }
  return w / std::sqrt(static_cast<double>(graph.closed_degree(iu)) *
                       static_cast<double>(graph.closed_degree(iv)));
}

double normalize_score(double raw, ScoreScale scale) {
  return scale == ScoreScale::Percent ? raw / 100.0 : raw;
}

namespace {

void check_score(const std::string& model, const std::string& bench, double raw, ScoreScale scale) {
  double hi = scale == ScoreScale::Percent ? 100.0 : 1.0;
  if (!(raw >= 0.0 && raw <= hi)) {
    throw Error(ErrorCode::ScoreOutOfRange,
                model + " on " + bench + " = " + std::to_string(raw));
  }
}

}  // namespace

EvidenceGraph build_graph(const CardSet& cards, std::size_t dim) {
  if (dim == 0) throw Error(ErrorCode::InvalidSpec, "embedding dimension must be positive");

  // Collect ids up front so duplicate and dangling references are reported
  // before any node is inserted.
  std::set<std::string> ids;
  auto claim = [&](const std::string& id) {
    if (!ids.insert(id).second) throw Error(ErrorCode::DuplicateId, id);
  };
  std::map<std::string, ScoreScale> scales;
  std::set<std::string> family_ids, domain_ids;
  for (const auto& f : cards.families) { claim(f.id); family_ids.insert(f.id); }
  for (const auto& d : cards.domains) { claim(d.id); domain_ids.insert(d.id); }
  for (const auto& b : cards.benchmarks) { claim(b.id); scales[b.id] = b.score_scale; }
  for (const auto& m : cards.models) claim(m.id);
  for (const auto& q : cards.queries) claim(q.id);

  for (const auto& b : cards.benchmarks) {
    if (!domain_ids.count(b.domain_id)) throw Error(ErrorCode::DanglingReference, b.domain_id);
  }
  for (const auto& m : cards.models) {
    if (!family_ids.count(m.family_id)) throw Error(ErrorCode::DanglingReference, m.family_id);
    for (const auto& [bench, raw] : m.scores) {
      auto it = scales.find(bench);
      if (it == scales.end()) throw Error(ErrorCode::DanglingReference, bench);
      check_score(m.id, bench, raw, it->second);
    }
  }
  for (const auto& q : cards.queries) {
    if (!scales.count(q.benchmark_id)) throw Error(ErrorCode::DanglingReference, q.benchmark_id);
  }

  // Nodes and edges are accumulated then sorted once; add_node/add_edge
  // would rebuild the index per insertion.
  std::vector<Node> nodes;
  for (const auto& f : cards.families) nodes.push_back({f.id, NodeKind::ModelFamily, f.description, {}});
  for (const auto& d : cards.domains) nodes.push_back({d.id, NodeKind::Domain, d.description, {}});
  for (const auto& b : cards.benchmarks) nodes.push_back({b.id, NodeKind::Benchmark, b.description, {}});
  for (const auto& m : cards.models) nodes.push_back({m.id, NodeKind::Model, m.description, {}});
  for (const auto& q : cards.queries) nodes.push_back({q.id, NodeKind::Query, q.text, {}});

  std::vector<Edge> edges;
  for (const auto& m : cards.models) {
    edges.push_back({m.id, m.family_id, EdgeKind::ModelFamilyLink, std::nullopt});
    for (const auto& [bench, raw] : m.scores) {
      edges.push_back({m.id, bench, EdgeKind::ModelBenchmarkScore,
                       normalize_score(raw, scales.at(bench))});
    }
  }
  for (const auto& b : cards.benchmarks) {
    edges.push_back({b.id, b.domain_id, EdgeKind::BenchmarkDomainLink, std::nullopt});
  }
  for (const auto& q : cards.queries) {
    edges.push_back({q.id, q.benchmark_id, EdgeKind::QueryBenchmarkLink, std::nullopt});
  }

  return EvidenceGraph::from_parts(dim, std::move(nodes), std::move(edges));
}

std::string add_model_node(EvidenceGraph& graph, const ModelCard& card,
                           const std::map<std::string, ScoreScale>& benchmark_scales) {
  if (graph.contains(card.id)) throw Error(ErrorCode::DuplicateId, card.id);
  if (!graph.contains(card.family_id) ||
      graph.node(card.family_id).kind != NodeKind::ModelFamily) {
    throw Error(ErrorCode::DanglingReference, card.family_id);
  }
  for (const auto& [bench, raw] : card.scores) {
    if (!graph.contains(bench) || graph.node(bench).kind != NodeKind::Benchmark) {
      throw Error(ErrorCode::DanglingReference, bench);
    }
    auto it = benchmark_scales.find(bench);
    check_score(card.id, bench, raw, it == benchmark_scales.end() ? ScoreScale::Unit : it->second);
  }
  graph.add_node({card.id, NodeKind::Model, card.description, {}});
  graph.add_edge({card.id, card.family_id, EdgeKind::ModelFamilyLink, std::nullopt});
  for (const auto& [bench, raw] : card.scores) {
    auto it = benchmark_scales.find(bench);
    ScoreScale scale = it == benchmark_scales.end() ? ScoreScale::Unit : it->second;
    graph.add_edge({card.id, bench, EdgeKind::ModelBenchmarkScore, normalize_score(raw, scale)});
  }
  return card.id;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

std::string scale_name(ScoreScale s) { return s == ScoreScale::Percent ? "percent" : "unit"; }

ScoreScale scale_from(const std::string& s) {
  if (s == "percent") return ScoreScale::Percent;
  if (s == "unit") return ScoreScale::Unit;
  throw Error(ErrorCode::Parse, "score_scale must be 'unit' or 'percent', got '" + s + "'");
}

}  // namespace

void to_json(nlohmann::json& j, const FamilyCard& c) {
  j = {{"id", c.id}, {"description", c.description}};
}
void from_json(const nlohmann::json& j, FamilyCard& c) {
  j.at("id").get_to(c.id);
  c.description = j.value("description", "");
}

void to_json(nlohmann::json& j, const ModelCard& c) {
  j = {{"id", c.id}, {"family_id", c.family_id}, {"description", c.description}, {"scores", c.scores}};
}
void from_json(const nlohmann::json& j, ModelCard& c) {
  j.at("id").get_to(c.id);
  j.at("family_id").get_to(c.family_id);
  c.description = j.value("description", "");
  c.scores.clear();
  if (j.contains("scores")) j.at("scores").get_to(c.scores);
}

void to_json(nlohmann::json& j, const BenchmarkCard& c) {
  j = {{"id", c.id},
       {"domain_id", c.domain_id},
       {"description", c.description},
       {"score_scale", scale_name(c.score_scale)}};
}
void from_json(const nlohmann::json& j, BenchmarkCard& c) {
  j.at("id").get_to(c.id);
  j.at("domain_id").get_to(c.domain_id);
  c.description = j.value("description", "");
  c.score_scale = scale_from(j.value("score_scale", "unit"));
}

void to_json(nlohmann::json& j, const DomainCard& c) {
  j = {{"id", c.id}, {"description", c.description}};
}
void from_json(const nlohmann::json& j, DomainCard& c) {
  j.at("id").get_to(c.id);
  c.description = j.value("description", "");
}

void to_json(nlohmann::json& j, const QueryRecord& c) {
  j = {{"id", c.id}, {"benchmark_id", c.benchmark_id}, {"text", c.text}};
}
void from_json(const nlohmann::json& j, QueryRecord& c) {
  j.at("id").get_to(c.id);
  j.at("benchmark_id").get_to(c.benchmark_id);
  j.at("text").get_to(c.text);
}

nlohmann::json graph_to_json(const EvidenceGraph& graph) {
  nlohmann::json j;
  j["dim"] = graph.dim();
  auto& nodes = j["nodes"] = nlohmann::json::array();
  for (const auto& n : graph.nodes()) {
    nlohmann::json x = {{"id", n.id}, {"kind", to_string(n.kind)}, {"text", n.text}};
    if (n.embedding) x["embedding"] = *n.embedding;
    nodes.push_back(std::move(x));
  }
  auto& edges = j["edges"] = nlohmann::json::array();
  for (const auto& e : graph.edges()) {
    nlohmann::json x = {{"src", e.src}, {"dst", e.dst}, {"kind", to_string(e.kind)}};
    if (e.weight) x["weight"] = *e.weight;
    edges.push_back(std::move(x));
  }
  return j;
}

EvidenceGraph graph_from_json(const nlohmann::json& j) {
  try {
    std::vector<Node> nodes;
    for (const auto& x : j.at("nodes")) {
      Node n{x.at("id").get<std::string>(), node_kind_from_string(x.at("kind").get<std::string>()),
             x.value("text", ""), std::nullopt};
      if (x.contains("embedding")) n.embedding = x.at("embedding").get<Dense1>();
      nodes.push_back(std::move(n));
    }
    std::vector<Edge> edges;
    for (const auto& x : j.at("edges")) {
      Edge e{x.at("src").get<std::string>(), x.at("dst").get<std::string>(),
             edge_kind_from_string(x.at("kind").get<std::string>()), std::nullopt};
      if (x.contains("weight")) e.weight = x.at("weight").get<double>();
      edges.push_back(std::move(e));
    }
    return EvidenceGraph::from_parts(j.at("dim").get<std::size_t>(), std::move(nodes),
                                     std::move(edges));
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::Parse, ex.what());
  }
}

}  // namespace coldroute
