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

// Test-only helpers: graph generators and independent reference
// implementations used as oracles. Nothing here calls the code under test
// for the quantity being checked.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <queue>
#include <regex>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "coldroute/eval.hpp"
#include "coldroute/graph.hpp"
#include "coldroute/nn.hpp"
#include "coldroute/rng.hpp"
#include "coldroute/traingnn.hpp"

namespace testing {

using coldroute::Dense1;
using coldroute::Dense2;
using coldroute::Edge;
using coldroute::EdgeKind;
using coldroute::EvidenceGraph;
using coldroute::Node;
using coldroute::NodeKind;

using Matrix = std::vector<std::vector<double>>;

inline std::optional<EdgeKind> edge_kind_between(NodeKind a, NodeKind b) {
  auto is = [&](NodeKind x, NodeKind y) { return (a == x && b == y) || (a == y && b == x); };
  if (is(NodeKind::Model, NodeKind::ModelFamily)) return EdgeKind::ModelFamilyLink;
  if (is(NodeKind::Model, NodeKind::Benchmark)) return EdgeKind::ModelBenchmarkScore;
  if (is(NodeKind::Benchmark, NodeKind::Domain)) return EdgeKind::BenchmarkDomainLink;
  if (is(NodeKind::Query, NodeKind::Benchmark)) return EdgeKind::QueryBenchmarkLink;
  return std::nullopt;
}

inline Dense1 random_vector(coldroute::Rng& rng, std::size_t dim) {
  Dense1 v(dim);
  for (double& x : v) x = rng.normal();
  return v;
}

// Random kind-respecting graph with 1..max_nodes nodes, random embeddings and
// random [0,1] score weights.
inline EvidenceGraph random_graph(coldroute::Rng& rng, std::size_t max_nodes, std::size_t dim,
                                  double edge_prob = 0.5) {
  const NodeKind kinds[] = {NodeKind::Model, NodeKind::ModelFamily, NodeKind::Benchmark, NodeKind::Domain,
                            NodeKind::Query};
  std::size_t n = 1 + rng.below(max_nodes);
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < n; ++i) {
    Node node;
    node.id = "n" + std::to_string(i);
    node.kind = kinds[rng.below(5)];
    node.text = "node " + node.id;
    node.embedding = random_vector(rng, dim);
    nodes.push_back(node);
  }
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      auto kind = edge_kind_between(nodes[i].kind, nodes[j].kind);
      if (!kind || rng.uniform() >= edge_prob) continue;
      Edge e{nodes[i].id, nodes[j].id, *kind, std::nullopt};
      if (*kind == EdgeKind::ModelBenchmarkScore) e.weight = rng.uniform();
      edges.push_back(e);
    }
  }
  return EvidenceGraph::from_parts(dim, nodes, edges);
}

// Dense normalized adjacency with self-loops, built directly from the edge
// list: S[v][u] = w_uv / sqrt(deg(v) deg(u)), deg counting the node itself.
inline Matrix dense_propagation_matrix(const EvidenceGraph& g) {
  std::map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < g.nodes().size(); ++i) idx[g.nodes()[i].id] = i;
  const std::size_t n = g.nodes().size();
  std::vector<double> deg(n, 1.0);
  for (const auto& e : g.edges()) {
    deg[idx[e.src]] += 1.0;
    deg[idx[e.dst]] += 1.0;
  }
  Matrix s(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) s[i][i] = 1.0 / deg[i];
  for (const auto& e : g.edges()) {
    std::size_t a = idx[e.src], b = idx[e.dst];
    double w = e.weight.value_or(1.0);
    s[a][b] = w / std::sqrt(deg[a] * deg[b]);
    s[b][a] = s[a][b];
  }
  return s;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix c(a.size(), std::vector<double>(b.empty() ? 0 : b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < c[i].size(); ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline Matrix embeddings_of(const EvidenceGraph& g) {
  Matrix x;
  for (const auto& n : g.nodes()) x.push_back(*n.embedding);
  return x;
}

// S^K X via explicit matrix powers.
inline Matrix dense_power_apply(const Matrix& s, const Matrix& x, int k) {
  Matrix p = s;
  for (int i = 1; i < k; ++i) p = matmul(p, s);
  return matmul(p, x);
}

inline double max_abs_diff(const Matrix& a, const Dense2& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) m = std::max(m, std::abs(a[i][j] - b(i, j)));
  return m;
}

// Two clusters of models with disjoint benchmarks, domains and families.
// Embeddings are a per-cluster direction plus noise, unit-normalized.
inline EvidenceGraph two_cluster_graph(std::size_t dim, std::uint64_t seed) {
  coldroute::Rng rng(seed);
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  for (int c = 0; c < 2; ++c) {
    Dense1 centre = random_vector(rng, dim);
    auto feature = [&] {
      Dense1 v = centre;
      for (double& x : v) x += 0.5 * rng.normal();
      double norm = 0.0;
      for (double x : v) norm += x * x;
      for (double& x : v) x /= std::sqrt(norm);
      return v;
    };
    std::string p = "c" + std::to_string(c) + "-";
    nodes.push_back({p + "fam", NodeKind::ModelFamily, "family", feature()});
    nodes.push_back({p + "dom", NodeKind::Domain, "domain", feature()});
    for (int b = 0; b < 2; ++b) {
      std::string bid = p + "bench" + std::to_string(b);
      nodes.push_back({bid, NodeKind::Benchmark, "benchmark", feature()});
      edges.push_back({bid, p + "dom", EdgeKind::BenchmarkDomainLink, std::nullopt});
      for (int q = 0; q < 2; ++q) {
        std::string qid = p + "q" + std::to_string(b) + std::to_string(q);
        nodes.push_back({qid, NodeKind::Query, "query", feature()});
        edges.push_back({qid, bid, EdgeKind::QueryBenchmarkLink, std::nullopt});
      }
    }
    for (int m = 0; m < 3; ++m) {
      std::string mid = p + "model" + std::to_string(m);
      nodes.push_back({mid, NodeKind::Model, "model", feature()});
      edges.push_back({mid, p + "fam", EdgeKind::ModelFamilyLink, std::nullopt});
      for (int b = 0; b < 2; ++b) {
        edges.push_back({mid, p + "bench" + std::to_string(b), EdgeKind::ModelBenchmarkScore,
                         0.7 + 0.25 * rng.uniform()});
      }
    }
  }
  return EvidenceGraph::from_parts(dim, nodes, edges);
}

// Reward tables with rewards in quarters so every mean is exact in binary
// floating point; `quarters[q][m]` holds 4 * reward.
struct QuarterTable {
  std::vector<std::string> queries;
  std::vector<std::string> models;
  std::vector<std::vector<int>> quarters;
};

inline QuarterTable random_quarter_table(coldroute::Rng& rng, std::size_t max_q, std::size_t max_m,
                                         bool binary = false) {
  QuarterTable t;
  std::size_t nq = 1 + rng.below(max_q), nm = 1 + rng.below(max_m);
  for (std::size_t i = 0; i < nq; ++i) t.queries.push_back("q" + std::to_string(100 + i));
  for (std::size_t j = 0; j < nm; ++j) t.models.push_back("m" + std::to_string(j));
  for (std::size_t i = 0; i < nq; ++i) {
    std::vector<int> row;
    for (std::size_t j = 0; j < nm; ++j) row.push_back(binary ? 4 * static_cast<int>(rng.below(2)) : static_cast<int>(rng.below(5)));
    t.quarters.push_back(row);
  }
  return t;
}

inline coldroute::RewardTable to_reward_table(const QuarterTable& t) {
  coldroute::RewardTable r;
  for (std::size_t i = 0; i < t.queries.size(); ++i)
    for (std::size_t j = 0; j < t.models.size(); ++j) r.set(t.queries[i], t.models[j], t.quarters[i][j] / 4.0);
  return r;
}

// Decisions choosing model index choice[i] for query i.
inline std::vector<coldroute::RoutingDecision> decisions_for(const QuarterTable& t,
                                                             const std::vector<std::size_t>& choice) {
  std::vector<coldroute::RoutingDecision> out;
  for (std::size_t i = 0; i < t.queries.size(); ++i) out.push_back({t.queries[i], t.models[choice[i]], {}});
  return out;
}

// Brute-force metrics over integer quarter counts, rounded once at the end.
inline double bf_average(const QuarterTable& t, const std::vector<std::size_t>& choice) {
  long sum = 0;
  for (std::size_t i = 0; i < t.queries.size(); ++i) sum += t.quarters[i][choice[i]];
  return static_cast<double>(sum) / 4.0 / static_cast<double>(t.queries.size());
}

inline double bf_oracle(const QuarterTable& t) {
  long sum = 0;
  for (const auto& row : t.quarters) sum += *std::max_element(row.begin(), row.end());
  return static_cast<double>(sum) / 4.0 / static_cast<double>(t.queries.size());
}

inline std::pair<std::string, double> bf_single_best(const QuarterTable& t) {
  long best = -1;
  std::size_t arg = 0;
  for (std::size_t j = 0; j < t.models.size(); ++j) {
    long col = 0;
    for (const auto& row : t.quarters) col += row[j];
    if (col > best) {  // strict: the earliest (smallest) id keeps ties
      best = col;
      arg = j;
    }
  }
  return {t.models[arg], static_cast<double>(best) / 4.0 / static_cast<double>(t.queries.size())};
}

// Count of queries routed to model `m` whose reward is at least threshold_quarters / 4.
inline double bf_ncir(const QuarterTable& t, const std::vector<std::size_t>& choice, std::size_t m,
                      int threshold_quarters = 4) {
  long hits = 0;
  for (std::size_t i = 0; i < t.queries.size(); ++i) hits += choice[i] == m && t.quarters[i][m] >= threshold_quarters;
  return static_cast<double>(hits) / static_cast<double>(t.queries.size());
}

// Node ids within `k` hops of `start`, by breadth-first search over the edge list.
inline std::set<std::string> within_distance(const EvidenceGraph& g, const std::string& start, int k) {
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& e : g.edges()) {
    adj[e.src].push_back(e.dst);
    adj[e.dst].push_back(e.src);
  }
  std::map<std::string, int> dist{{start, 0}};
  std::queue<std::string> q;
  q.push(start);
  while (!q.empty()) {
    auto v = q.front();
    q.pop();
    if (dist[v] == k) continue;
    for (const auto& u : adj[v]) {
      if (!dist.count(u)) {
        dist[u] = dist[v] + 1;
        q.push(u);
      }
    }
  }
  std::set<std::string> out;
  for (const auto& [id, d] : dist) out.insert(id);
  return out;
}

// Ids appearing as "Node: <id>" or as a neighbor line "- <Kind> <id>".
inline std::set<std::string> ids_mentioned(const std::string& text) {
  static const std::regex re(R"((?:Node: |- (?:Model|ModelFamily|Benchmark|Domain|Query) )([^\s:\[]+))");
  std::set<std::string> out;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it) {
    out.insert((*it)[1]);
  }
  return out;
}

// Six nodes: two models sharing a family, two benchmarks, one domain, one query.
inline EvidenceGraph six_node_graph(std::uint64_t seed) {
  coldroute::Rng rng(seed);
  auto v = [&] { return random_vector(rng, 4); };
  std::vector<Node> nodes = {{"m1", NodeKind::Model, "m1", v()},       {"m2", NodeKind::Model, "m2", v()},
                             {"f", NodeKind::ModelFamily, "f", v()},     {"b1", NodeKind::Benchmark, "b1", v()},
                             {"b2", NodeKind::Benchmark, "b2", v()},     {"d", NodeKind::Domain, "d", v()}};
  std::vector<Edge> edges = {{"m1", "f", EdgeKind::ModelFamilyLink, std::nullopt},
                             {"m2", "f", EdgeKind::ModelFamilyLink, std::nullopt},
                             {"m1", "b1", EdgeKind::ModelBenchmarkScore, 0.9},
                             {"m1", "b2", EdgeKind::ModelBenchmarkScore, 0.2},
                             {"m2", "b2", EdgeKind::ModelBenchmarkScore, 0.7},
                             {"b1", "d", EdgeKind::BenchmarkDomainLink, std::nullopt},
                             {"b2", "d", EdgeKind::BenchmarkDomainLink, std::nullopt}};
  return EvidenceGraph::from_parts(4, nodes, edges);
}

// Relative gradient error of the full masked loss on a perturbed model.
inline double traingnn_gradient_error(std::uint64_t seed) {
  EvidenceGraph g = six_node_graph(seed);
  coldroute::Rng rng(seed + 100);
  coldroute::TrainGnnModel model = coldroute::TrainGnnModel::init(4, 2, coldroute::TrainGnnConfig{}, rng);
  // Move the hop layers off the identity so the check exercises them.
  for (auto& l : model.hop_layers) {
    for (double& w : l.weight.flat()) w += 0.3 * rng.normal();
    for (double& b : l.bias) b = 0.1 * rng.normal();
  }
  coldroute::MaskSample mask = coldroute::sample_mask(g, 0.4, rng);
  for (auto* l : model.layers()) l->zero_grad();
  coldroute::traingnn_loss(model, g, mask, mask.nodes, true);
  auto clayers = std::as_const(model).layers();
  Dense1 params = coldroute::flatten_params(clayers);
  Dense1 analytic = coldroute::flatten_grads(clayers);

  coldroute::TrainGnnModel probe = model;
  coldroute::LossFn loss = [&](std::span<const double> flat) {
    auto layers = probe.layers();
    coldroute::unflatten_params(layers, flat);
    return coldroute::traingnn_loss(probe, g, mask, mask.nodes, false).total();
  };
  return coldroute::finite_diff_check(loss, params, analytic);
}

}  // namespace testing
