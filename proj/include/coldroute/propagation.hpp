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
#include <span>
#include <vector>

#include "coldroute/graph.hpp"
#include "coldroute/nn.hpp"

namespace coldroute {

// Sparse normalized propagation operator S with
//   (S x)_v = sum_{u in N(v)∪{v}} w_uv / sqrt(|N(v)∪{v}| |N(u)∪{u}|) x_u.
// S is symmetric. Edge weights may be overridden (graph.edges() order), which
// TrainGNN uses for masked edges.
class Propagator {
 public:
  explicit Propagator(const EvidenceGraph& graph);
  Propagator(const EvidenceGraph& graph, std::span<const double> edge_weights);

  std::size_t size() const { return rows_.size(); }
  Dense2 apply(const Dense2& x) const;

 private:
  struct Term {
    std::size_t col;
    double coeff;
  };
  std::vector<std::vector<Term>> rows_;
};

// Node embeddings stacked in graph node order; throws UninitializedEmbedding.
Dense2 embedding_matrix(const EvidenceGraph& graph);

// K parameter-free propagation rounds; returns the hop-K state (graph node order).
Dense2 embgnn_propagate(const EvidenceGraph& graph, int depth);

}  // namespace coldroute
