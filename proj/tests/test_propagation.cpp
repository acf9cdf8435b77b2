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

#include <algorithm>
#include <cmath>

#include "coldroute/propagation.hpp"
#include "expect.hpp"
#include "support.hpp"

using namespace coldroute;

TEST_CASE("hop-K state matches explicit matrix powers") {
  Rng rng(21);
  for (int t = 0; t < 50; ++t) {
    EvidenceGraph g = testing::random_graph(rng, 12, 4);
    auto s = testing::dense_propagation_matrix(g);
    auto x = testing::embeddings_of(g);
    for (int k = 1; k <= 4; ++k) {
      CHECK(testing::max_abs_diff(testing::dense_power_apply(s, x, k), embgnn_propagate(g, k)) < 1e-9);
    }
  }
}

TEST_CASE("depth below one is rejected") {
  Rng rng(2);
  EvidenceGraph g = testing::random_graph(rng, 6, 3);
  CHECK_THROWS_CODE(embgnn_propagate(g, 0), ErrorCode::InvalidSpec);
}

TEST_CASE("edgeless graph keeps every embedding") {
  std::vector<Node> nodes = {{"a", NodeKind::Model, "a", Dense1{1.0, 2.0}},
                             {"b", NodeKind::Domain, "b", Dense1{-3.0, 0.5}}};
  EvidenceGraph g = EvidenceGraph::from_parts(2, nodes, {});
  Dense2 h = embgnn_propagate(g, 3);
  CHECK(h(0, 0) == 1.0);
  CHECK(h(0, 1) == 2.0);
  CHECK(h(1, 0) == -3.0);
  CHECK(h(1, 1) == 0.5);
}

TEST_CASE("two connected nodes average after one hop") {
  std::vector<Node> nodes = {{"m", NodeKind::Model, "m", Dense1{1.0, 0.0}},
                             {"f", NodeKind::ModelFamily, "f", Dense1{0.0, 1.0}}};
  std::vector<Edge> edges = {{"m", "f", EdgeKind::ModelFamilyLink, std::nullopt}};
  EvidenceGraph g = EvidenceGraph::from_parts(2, nodes, edges);
  Dense2 h = embgnn_propagate(g, 1);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 2; ++c) CHECK(h(r, c) == doctest::Approx(0.5));
}

TEST_CASE("relabelling nodes permutes the output rows") {
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    EvidenceGraph g = testing::random_graph(rng, 9, 3);
    // Rename n<i> to z<n-1-i>: node order reverses.
    auto rename = [&](const std::string& id) {
      return "z" + std::to_string(100 + g.node_count() - 1 - std::stoul(id.substr(1)));
    };
    std::vector<Node> nodes;
    for (Node n : g.nodes()) {
      n.id = rename(n.id);
      nodes.push_back(n);
    }
    std::vector<Edge> edges;
    for (Edge e : g.edges()) {
      e.src = rename(e.src);
      e.dst = rename(e.dst);
      edges.push_back(e);
    }
    EvidenceGraph h = EvidenceGraph::from_parts(g.dim(), nodes, edges);
    Dense2 a = embgnn_propagate(g, 2), b = embgnn_propagate(h, 2);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      std::size_t j = h.index_of(rename(g.node_at(i).id));
      for (std::size_t c = 0; c < g.dim(); ++c) CHECK(a(i, c) == doctest::Approx(b(j, c)).epsilon(1e-12));
    }
  }
}

TEST_CASE("overridden edge weights feed the operator") {
  std::vector<Node> nodes = {{"m", NodeKind::Model, "m", Dense1{1.0}}, {"b", NodeKind::Benchmark, "b", Dense1{2.0}}};
  std::vector<Edge> edges = {{"m", "b", EdgeKind::ModelBenchmarkScore, 0.8}};
  EvidenceGraph g = EvidenceGraph::from_parts(1, nodes, edges);
  Dense1 zero = {0.0};
  Propagator masked(g, zero);
  Dense2 out = masked.apply(embedding_matrix(g));
  // Closed degrees still count the edge; only its weight is dropped.
  CHECK(out(0, 0) == doctest::Approx(0.5 * 2.0));  // b sorts first
  CHECK(out(1, 0) == doctest::Approx(0.5 * 1.0));
}

TEST_CASE("missing embeddings are reported") {
  EvidenceGraph g(2);
  g.add_node({"a", NodeKind::Model, "a", std::nullopt});
  CHECK_THROWS_CODE(embgnn_propagate(g, 1), ErrorCode::UninitializedEmbedding);
}
