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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace coldroute {

using Dense1 = std::vector<double>;

enum class NodeKind { Model, ModelFamily, Benchmark, Domain, Query };

enum class EdgeKind {
  ModelFamilyLink,
  ModelBenchmarkScore,
  BenchmarkDomainLink,
  QueryBenchmarkLink,
};

std::string_view to_string(NodeKind kind);
std::string_view to_string(EdgeKind kind);
NodeKind node_kind_from_string(std::string_view s);
EdgeKind edge_kind_from_string(std::string_view s);

// The unordered pair of node kinds an edge kind may connect.
std::pair<NodeKind, NodeKind> endpoint_kinds(EdgeKind kind);

struct Node {
  std::string id;
  NodeKind kind = NodeKind::Model;
  std::string text;
  std::optional<Dense1> embedding;

  bool operator==(const Node&) const = default;
};

struct Edge {
  std::string src;
  std::string dst;
  EdgeKind kind = EdgeKind::ModelFamilyLink;
  // Normalized benchmark score; present iff kind == ModelBenchmarkScore.
  std::optional<double> weight;

  bool operator==(const Edge&) const = default;
};

// Entry of the index-based adjacency. weight is w_uv (1 on unscored edges).
struct Neighbor {
  std::size_t index;
  double weight;
  bool scored;
};

// Typed heterogeneous graph of models, families, benchmarks, domains and
// queries. Nodes are kept sorted by id and edges by (src, dst, kind), so two
// graphs built from the same cards are identical regardless of input order.
//
// Mutation goes through add_node/add_edge/add_model_node/remove_node; each
// call validates kind constraints and rebuilds the adjacency index.
class EvidenceGraph {
 public:
  explicit EvidenceGraph(std::size_t dim = 0) : dim_(dim) {}

  // Bulk construction: sorts, indexes and validates in one pass.
  static EvidenceGraph from_parts(std::size_t dim, std::vector<Node> nodes, std::vector<Edge> edges);

  std::size_t dim() const { return dim_; }
  void set_dim(std::size_t dim) { dim_ = dim; }

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  bool contains(std::string_view id) const;
  std::size_t index_of(std::string_view id) const;  // throws UnknownNode
  const Node& node(std::string_view id) const;
  const Node& node_at(std::size_t i) const { return nodes_[i]; }
  void set_embedding(std::size_t i, Dense1 embedding);
  void set_text(std::size_t i, std::string text) { nodes_[i].text = std::move(text); }

  void add_node(Node node);
  void add_edge(Edge edge);
  // Removes the node and every incident edge.
  void remove_node(std::string_view id);

  // Open neighborhood by index, sorted by neighbor id; weight is w_uv.
  const std::vector<Neighbor>& neighbors(std::size_t i) const { return adjacency_[i]; }
  // |N(v) ∪ {v}|
  std::size_t closed_degree(std::size_t i) const { return adjacency_[i].size() + 1; }

  // The edge joining u and v, if any.
  const Edge* find_edge(std::string_view u, std::string_view v) const;

  // Full structural check; throws InvalidGraph / DanglingReference.
  void validate() const;

  bool operator==(const EvidenceGraph& other) const {
    return dim_ == other.dim_ && nodes_ == other.nodes_ && edges_ == other.edges_;
  }

 private:
  void rebuild_index();

  std::size_t dim_;
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

// All nodes sharing an edge with v plus v itself, sorted by id.
std::vector<std::string> closed_neighborhood(const EvidenceGraph& graph, std::string_view v);

// w_uv / sqrt(|N(v)∪{v}| |N(u)∪{u}|), with w_uv = 1 for the self term and
// unscored edges. Throws NotAdjacent when u != v and no edge joins them.
double propagation_coefficient(const EvidenceGraph& graph, std::string_view u,
                               std::string_view v);

// ---------------------------------------------------------------------------
// Card records (the ingest format).

enum class ScoreScale { Unit, Percent };

struct FamilyCard {
  std::string id;
  std::string description;
};

struct ModelCard {
  std::string id;
  std::string family_id;
  std::string description;
  std::map<std::string, double> scores;  // benchmark id -> raw score
};

struct BenchmarkCard {
  std::string id;
  std::string domain_id;
  std::string description;
  ScoreScale score_scale = ScoreScale::Unit;
};

struct DomainCard {
  std::string id;
  std::string description;
};

struct QueryRecord {
  std::string id;
  std::string benchmark_id;
  std::string text;
};

struct CardSet {
  std::vector<FamilyCard> families;
  std::vector<ModelCard> models;
  std::vector<BenchmarkCard> benchmarks;
  std::vector<DomainCard> domains;
  std::vector<QueryRecord> queries;
};

EvidenceGraph build_graph(const CardSet& cards, std::size_t dim);

// Inserts a Model node plus its family and score edges. Raw scores are
// normalized with benchmark_scales (unit scale when a benchmark is absent).
std::string add_model_node(EvidenceGraph& graph, const ModelCard& card,
                           const std::map<std::string, ScoreScale>& benchmark_scales = {});

double normalize_score(double raw, ScoreScale scale);

// JSON mapping for cards and graph snapshots.
void to_json(nlohmann::json& j, const FamilyCard& c);
void from_json(const nlohmann::json& j, FamilyCard& c);
void to_json(nlohmann::json& j, const ModelCard& c);
void from_json(const nlohmann::json& j, ModelCard& c);
void to_json(nlohmann::json& j, const BenchmarkCard& c);
void from_json(const nlohmann::json& j, BenchmarkCard& c);
void to_json(nlohmann::json& j, const DomainCard& c);
void from_json(const nlohmann::json& j, DomainCard& c);
void to_json(nlohmann::json& j, const QueryRecord& c);
void from_json(const nlohmann::json& j, QueryRecord& c);

nlohmann::json graph_to_json(const EvidenceGraph& graph);
EvidenceGraph graph_from_json(const nlohmann::json& j);

}  // namespace coldroute
