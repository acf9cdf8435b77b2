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
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "coldroute/graph.hpp"
#include "coldroute/nn.hpp"
#include "coldroute/propagation.hpp"

namespace coldroute {

class Rng;

struct TrainGnnConfig {
  double mask_ratio = 0.3;
  int epochs = 100;
  double lr = 1e-3;
  std::size_t batch_size = 64;  // masked nodes per optimizer step
};

// Learnable propagation trained by masked reconstruction.
//
// Forward: X_k = act(S X_{k-1} W_k^T + b_k) for k = 1..K, act = ReLU except on
// the last hop, which is linear. Masked node features are reconstructed by
// node_head(X_K[v]); masked edge weights by edge_head([X_K[u]; X_K[v]]).
struct TrainGnnModel {
  std::size_t dim = 0;
  std::vector<AffineLayer> hop_layers;  // K layers, dim -> dim
  AffineLayer node_head;                // dim -> dim
  AffineLayer edge_head;                // 2 dim -> 1
  TrainGnnConfig config;
  std::vector<double> loss_trace;  // mean total loss per epoch

  int depth() const { return static_cast<int>(hop_layers.size()); }

  // Hop layers start at the identity (so an untrained model reduces to plain
  // propagation up to the ReLUs); heads are Glorot-initialized.
  static TrainGnnModel init(std::size_t dim, int depth, const TrainGnnConfig& config, Rng& rng);

  std::vector<AffineLayer*> layers();
  std::vector<const AffineLayer*> layers() const;

  bool operator==(const TrainGnnModel& o) const {
    return dim == o.dim && hop_layers == o.hop_layers && node_head == o.node_head &&
           edge_head == o.edge_head;
  }
};

// Indices into graph.nodes() and graph.edges(); masked edges are scored edges only.
struct MaskSample {
  std::vector<std::size_t> nodes;
  std::vector<std::size_t> edges;
};

MaskSample sample_mask(const EvidenceGraph& graph, double ratio, Rng& rng);

struct ReconstructionLoss {
  double node = 0.0;
  double edge = 0.0;
  double total() const { return node + edge; }
};

// Masked-reconstruction loss for one optimizer step. node_batch is the subset
// of mask.nodes scored by the node term; every masked edge is scored by the
// edge term. When accumulate is true, parameter gradients are added to the
// model's grad buffers.
ReconstructionLoss traingnn_loss(TrainGnnModel& model, const EvidenceGraph& graph, const MaskSample& mask,
                                 std::span<const std::size_t> node_batch, bool accumulate);

TrainGnnModel traingnn_fit(const EvidenceGraph& graph, int depth, const TrainGnnConfig& config,
                           std::uint64_t seed);

// Unmasked forward pass; hop-K states in graph node order.
Dense2 traingnn_forward(const TrainGnnModel& model, const EvidenceGraph& graph);

nlohmann::json traingnn_to_json(const TrainGnnModel& model);
TrainGnnModel traingnn_from_json(const nlohmann::json& j);

}  // namespace coldroute
