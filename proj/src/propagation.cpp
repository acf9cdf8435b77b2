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

#include "coldroute/propagation.hpp"

#include <cmath>

#include "coldroute/error.hpp"

namespace coldroute {

Propagator::Propagator(const EvidenceGraph& graph) {
  const std::size_t n = graph.node_count();
  rows_.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    const double dv = static_cast<double>(graph.closed_degree(v));
    auto& row = rows_[v];
    row.reserve(graph.neighbors(v).size() + 1);
    row.push_back({v, 1.0 / dv});
    for (const auto& nb : graph.neighbors(v)) {
      const double du = static_cast<double>(graph.closed_degree(nb.index));
      row.push_back({nb.index, nb.weight / std::sqrt(dv * du)});
    }
  }
}

Propagator::Propagator(const EvidenceGraph& graph, std::span<const double> edge_weights) {
  const auto& edges = graph.edges();
  if (edge_weights.size() != edges.size()) {
    throw Error(ErrorCode::ShapeMismatch, "one weight per edge expected");
  }
  const std::size_t n = graph.node_count();
  rows_.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    rows_[v].push_back({v, 1.0 / static_cast<double>(graph.closed_degree(v))});
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    std::size_t a = graph.index_of(edges[e].src);
    std::size_t b = graph.index_of(edges[e].dst);
    double c = edge_weights[e] / std::sqrt(static_cast<double>(graph.closed_degree(a)) *
                                           static_cast<double>(graph.closed_degree(b)));
    rows_[a].push_back({b, c});
    rows_[b].push_back({a, c});
  }
}

Dense2 Propagator::apply(const Dense2& x) const {
  if (x.rows() != rows_.size()) throw Error(ErrorCode::ShapeMismatch, "propagation input rows");
  Dense2 y(x.rows(), x.cols());
  for (std::size_t v = 0; v < rows_.size(); ++v) {
    auto yv = y.row(v);
    for (const auto& t : rows_[v]) {
      auto xu = x.row(t.col);
      for (std::size_t c = 0; c < xu.size(); ++c) yv[c] += t.coeff * xu[c];
    }
  }
  return y;
}

Dense2 embedding_matrix(const EvidenceGraph& graph) {
  Dense2 x(graph.node_count(), graph.dim());
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    const auto& n = graph.node_at(i);
    if (!n.embedding) throw Error(ErrorCode::UninitializedEmbedding, n.id);
    if (n.embedding->size() != graph.dim()) throw Error(ErrorCode::DimensionMismatch, n.id);
    std::copy(n.embedding->begin(), n.embedding->end(), x.row(i).begin());
  }
  return x;
}

Dense2 embgnn_propagate(const EvidenceGraph& graph, int depth) {
  if (depth < 1) throw Error(ErrorCode::InvalidSpec, "propagation depth must be at least 1");
  Dense2 x = embedding_matrix(graph);
  Propagator s(graph);
  for (int k = 0; k < depth; ++k) x = s.apply(x);
  return x;
}

}  // namespace coldroute
