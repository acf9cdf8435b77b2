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

#include "coldroute/traingnn.hpp"

#include <algorithm>
#include <cmath>

#include "coldroute/error.hpp"
#include "coldroute/rng.hpp"

namespace coldroute {

namespace {

struct ForwardCache {
  std::vector<Dense2> propagated;  // H_k = S X_{k-1}
  std::vector<Dense2> pre;         // Z_k = H_k W_k^T + b_k
  Dense2 out;                      // X_K
};

ForwardCache forward(const TrainGnnModel& model, const Propagator& s, Dense2 x) {
  ForwardCache c;
  const int depth = model.depth();
  for (int k = 0; k < depth; ++k) {
    Dense2 h = s.apply(x);
    Dense2 z = model.hop_layers[k].forward_rows(h);
    x = z;
    if (k + 1 < depth) {
      for (double& v : x.flat()) v = relu(v);
    }
    c.propagated.push_back(std::move(h));
    c.pre.push_back(std::move(z));
  }
  c.out = std::move(x);
  return c;
}

std::size_t rounded_count(double ratio, std::size_t n) {
  return static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
}

std::vector<std::size_t> pick(std::size_t n, std::size_t count, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  // Partial Fisher-Yates: the first `count` slots are a uniform sample.
  for (std::size_t i = 0; i < count && i < n; ++i) {
    std::size_t j = i + rng.below(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(std::min(count, n));
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

TrainGnnModel TrainGnnModel::init(std::size_t dim, int depth, const TrainGnnConfig& config, Rng& rng) {
  if (depth < 1) throw Error(ErrorCode::InvalidSpec, "TrainGNN depth must be at least 1");
  if (!(config.mask_ratio > 0.0 && config.mask_ratio < 1.0)) {
    throw Error(ErrorCode::InvalidSpec, "mask ratio must lie in (0, 1)");
  }
  TrainGnnModel m;
  m.dim = dim;
  m.config = config;
  for (int k = 0; k < depth; ++k) {
    AffineLayer layer(dim, dim);
    layer.weight = Dense2::identity(dim);
    m.hop_layers.push_back(std::move(layer));
  }
  m.node_head = AffineLayer(dim, dim);
  m.node_head.init_glorot(rng);
  m.edge_head = AffineLayer(2 * dim, 1);
  m.edge_head.init_glorot(rng);
  return m;
}

std::vector<AffineLayer*> TrainGnnModel::layers() {
  std::vector<AffineLayer*> out;
  for (auto& l : hop_layers) out.push_back(&l);
  out.push_back(&node_head);
  out.push_back(&edge_head);
  return out;
}

std::vector<const AffineLayer*> TrainGnnModel::layers() const {
  std::vector<const AffineLayer*> out;
  for (const auto& l : hop_layers) out.push_back(&l);
  out.push_back(&node_head);
  out.push_back(&edge_head);
  return out;
}

MaskSample sample_mask(const EvidenceGraph& graph, double ratio, Rng& rng) {
  MaskSample m;
  m.nodes = pick(graph.node_count(), rounded_count(ratio, graph.node_count()), rng);
  std::vector<std::size_t> scored;
  const auto& edges = graph.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edges[e].weight) scored.push_back(e);
  }
  for (std::size_t i : pick(scored.size(), rounded_count(ratio, scored.size()), rng)) {
    m.edges.push_back(scored[i]);
  }
  return m;
}

ReconstructionLoss traingnn_loss(TrainGnnModel& model, const EvidenceGraph& graph, const MaskSample& mask,
                                 std::span<const std::size_t> node_batch, bool accumulate) {
  if (graph.dim() != model.dim) {
    throw Error(ErrorCode::DimensionMismatch,
                "model dim " + std::to_string(model.dim) + " vs graph dim " + std::to_string(graph.dim()));
  }
  const Dense2 original = embedding_matrix(graph);
  const auto& edges = graph.edges();
  const std::size_t d = model.dim;

  // Masked input: zeroed node rows, masked scored edges carry the mean weight.
  Dense2 x0 = original;
  for (std::size_t v : mask.nodes) std::fill(x0.row(v).begin(), x0.row(v).end(), 0.0);
  Dense1 weights(edges.size());
  double sum = 0.0;
  std::size_t scored = 0;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    weights[e] = edges[e].weight.value_or(1.0);
    if (edges[e].weight) {
      sum += *edges[e].weight;
      ++scored;
    }
  }
  const double mean_weight = scored ? sum / static_cast<double>(scored) : 0.0;
  for (std::size_t e : mask.edges) weights[e] = mean_weight;

  const Propagator s(graph, weights);
  ForwardCache cache = forward(model, s, std::move(x0));
  Dense2 grad_out(cache.out.rows(), cache.out.cols());

  ReconstructionLoss loss;
  if (!node_batch.empty()) {
    Dense2 states(node_batch.size(), d);
    Dense1 target;
    target.reserve(node_batch.size() * d);
    for (std::size_t r = 0; r < node_batch.size(); ++r) {
      auto src = cache.out.row(node_batch[r]);
      std::copy(src.begin(), src.end(), states.row(r).begin());
      auto t = original.row(node_batch[r]);
      target.insert(target.end(), t.begin(), t.end());
    }
    Dense2 pred = model.node_head.forward_rows(states);
    auto r = mse(pred.flat(), target);
    loss.node = r.loss;
    if (accumulate) {
      Dense2 dpred(pred.rows(), pred.cols());
      std::copy(r.grad.begin(), r.grad.end(), dpred.flat().begin());
      Dense2 dstates = model.node_head.backward_rows(states, dpred);
      for (std::size_t row = 0; row < node_batch.size(); ++row) {
        auto g = grad_out.row(node_batch[row]);
        auto ds = dstates.row(row);
        for (std::size_t c = 0; c < d; ++c) g[c] += ds[c];
      }
    }
  }

  if (!mask.edges.empty()) {
    Dense2 pairs(mask.edges.size(), 2 * d);
    Dense1 target(mask.edges.size());
    std::vector<std::pair<std::size_t, std::size_t>> ends;
    for (std::size_t r = 0; r < mask.edges.size(); ++r) {
      const Edge& e = edges[mask.edges[r]];
      std::size_t a = graph.index_of(e.src);
      std::size_t b = graph.index_of(e.dst);
      ends.emplace_back(a, b);
      auto row = pairs.row(r);
      auto xa = cache.out.row(a);
      auto xb = cache.out.row(b);
      std::copy(xa.begin(), xa.end(), row.begin());
      std::copy(xb.begin(), xb.end(), row.begin() + static_cast<std::ptrdiff_t>(d));
      target[r] = *e.weight;
    }
    Dense2 pred = model.edge_head.forward_rows(pairs);
    auto r = mse(pred.flat(), target);
    loss.edge = r.loss;
    if (accumulate) {
      Dense2 dpred(pred.rows(), 1);
      std::copy(r.grad.begin(), r.grad.end(), dpred.flat().begin());
      Dense2 dpairs = model.edge_head.backward_rows(pairs, dpred);
      for (std::size_t row = 0; row < ends.size(); ++row) {
        auto dp = dpairs.row(row);
        auto ga = grad_out.row(ends[row].first);
        auto gb = grad_out.row(ends[row].second);
        for (std::size_t c = 0; c < d; ++c) {
          ga[c] += dp[c];
          gb[c] += dp[d + c];
        }
      }
    }
  }

  if (accumulate && (!node_batch.empty() || !mask.edges.empty())) {
    Dense2 g = std::move(grad_out);
    for (int k = model.depth() - 1; k >= 0; --k) {
      if (k + 1 < model.depth()) {
        const auto z = cache.pre[k].flat();
        auto gf = g.flat();
        for (std::size_t i = 0; i < gf.size(); ++i) {
          if (z[i] <= 0.0) gf[i] = 0.0;
        }
      }
      Dense2 dh = model.hop_layers[k].backward_rows(cache.propagated[k], g);
      if (k > 0) g = s.apply(dh);  // S is symmetric, so S^T dh = S dh
    }
  }
  return loss;
}

TrainGnnModel traingnn_fit(const EvidenceGraph& graph, int depth, const TrainGnnConfig& config,
                           std::uint64_t seed) {
  Rng rng(seed);
  TrainGnnModel model = TrainGnnModel::init(graph.dim(), depth, config, rng);
  embedding_matrix(graph);  // fail fast on uninitialized features
  AdamState adam(config.lr);
  const std::size_t batch = std::max<std::size_t>(config.batch_size, 1);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    MaskSample mask = sample_mask(graph, config.mask_ratio, rng);
    std::vector<std::size_t> order = mask.nodes;
    rng.shuffle(order);
    std::size_t node_steps = (order.size() + batch - 1) / batch;
    std::size_t steps = std::max<std::size_t>(node_steps, mask.edges.empty() ? 0 : 1);

    double epoch_loss = 0.0;
    for (std::size_t step = 0; step < steps; ++step) {
      std::span<const std::size_t> nodes;
      if (step < node_steps) {
        std::size_t lo = step * batch;
        std::size_t hi = std::min(order.size(), lo + batch);
        nodes = std::span<const std::size_t>(order).subspan(lo, hi - lo);
      }
      for (auto* l : model.layers()) l->zero_grad();
      ReconstructionLoss l = traingnn_loss(model, graph, mask, nodes, true);
      if (!std::isfinite(l.total())) throw Error(ErrorCode::NonFiniteLoss, "epoch " + std::to_string(epoch));
      auto layers = model.layers();
      auto refs = param_refs(layers);
      adam.step(refs);
      epoch_loss += l.total();
    }
    model.loss_trace.push_back(steps ? epoch_loss / static_cast<double>(steps) : 0.0);
  }
  for (auto* l : model.layers()) l->zero_grad();
  return model;
}

Dense2 traingnn_forward(const TrainGnnModel& model, const EvidenceGraph& graph) {
  if (graph.dim() != model.dim) {
    throw Error(ErrorCode::DimensionMismatch,
                "model dim " + std::to_string(model.dim) + " vs graph dim " + std::to_string(graph.dim()));
  }
  Propagator s(graph);
  return forward(model, s, embedding_matrix(graph)).out;
}

nlohmann::json traingnn_to_json(const TrainGnnModel& model) {
  nlohmann::json hops = nlohmann::json::array();
  for (const auto& l : model.hop_layers) hops.push_back(layer_to_json(l));
  return {{"kind", "traingnn"},
          {"dim", model.dim},
          {"config",
           {{"mask_ratio", model.config.mask_ratio},
            {"epochs", model.config.epochs},
            {"lr", model.config.lr},
            {"batch_size", model.config.batch_size}}},
          {"hop_layers", hops},
          {"node_head", layer_to_json(model.node_head)},
          {"edge_head", layer_to_json(model.edge_head)},
          {"loss_trace", model.loss_trace}};
}

TrainGnnModel traingnn_from_json(const nlohmann::json& j) {
  try {
    TrainGnnModel m;
    m.dim = j.at("dim").get<std::size_t>();
    const auto& c = j.at("config");
    m.config.mask_ratio = c.at("mask_ratio").get<double>();
    m.config.epochs = c.at("epochs").get<int>();
    m.config.lr = c.at("lr").get<double>();
    m.config.batch_size = c.at("batch_size").get<std::size_t>();
    for (const auto& l : j.at("hop_layers")) m.hop_layers.push_back(layer_from_json(l));
    m.node_head = layer_from_json(j.at("node_head"));
    m.edge_head = layer_from_json(j.at("edge_head"));
    m.loss_trace = j.value("loss_trace", std::vector<double>{});
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, e.what());
  }
}

}  // namespace coldroute
