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

#include "coldroute/routing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "coldroute/error.hpp"
#include "coldroute/features.hpp"
#include "coldroute/rng.hpp"

namespace coldroute {

namespace {

constexpr double kUnrankable = -std::numeric_limits<double>::infinity();

void check_dim(std::size_t expected, std::size_t got, const std::string& what) {
  if (expected != got) {
    throw Error(ErrorCode::DimensionMismatch,
                what + ": expected " + std::to_string(expected) + ", got " + std::to_string(got));
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

void to_json(nlohmann::json& j, const InteractionRecord& r) {
  j = {{"query_id", r.query_id}, {"model_id", r.model_id}, {"reward", r.reward}};
}

void from_json(const nlohmann::json& j, InteractionRecord& r) {
  j.at("query_id").get_to(r.query_id);
  j.at("model_id").get_to(r.model_id);
  j.at("reward").get_to(r.reward);
  if (!(r.reward >= 0.0 && r.reward <= 1.0)) {
    throw Error(ErrorCode::Parse, "reward outside [0, 1] for " + r.query_id + "/" + r.model_id);
  }
}

void CandidatePool::add(Profile profile) {
  if (contains(profile.model_id)) throw Error(ErrorCode::DuplicateId, profile.model_id);
  if (!candidates_.empty()) check_dim(dim(), profile.vector.size(), "profile " + profile.model_id);
  for (double x : profile.vector) {
    if (!std::isfinite(x)) throw Error(ErrorCode::InvalidSpec, "non-finite profile for " + profile.model_id);
  }
  std::string id = profile.model_id;
  candidates_.push_back({std::move(id), std::move(profile)});
}

bool CandidatePool::contains(std::string_view id) const {
  return std::any_of(candidates_.begin(), candidates_.end(),
                     [&](const Candidate& c) { return c.model_id == id; });
}

const Profile& CandidatePool::profile(std::string_view id) const {
  for (const auto& c : candidates_) {
    if (c.model_id == id) return c.profile;
  }
  throw Error(ErrorCode::UnknownNode, std::string(id));
}

std::vector<std::string> CandidatePool::ids() const {
  std::vector<std::string> out;
  for (const auto& c : candidates_) out.push_back(c.model_id);
  return out;
}

RoutingDecision decide(std::string query_id, ScoreList scores) {
  if (scores.empty()) throw Error(ErrorCode::EmptyPool, query_id);
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    const auto& [id, s] = scores[i];
    const double b = scores[best].second;
    if (s > b || (s == b && id < scores[best].first)) best = i;
  }
  std::string chosen = scores[best].first;
  return {std::move(query_id), std::move(chosen), std::move(scores)};
}

double cosine(std::span<const double> a, std::span<const double> b) {
  check_dim(a.size(), b.size(), "cosine");
  double na = dot(a, a);
  double nb = dot(b, b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (std::sqrt(na) * std::sqrt(nb));
}

bool is_zero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

std::string_view to_string(RouterKind kind) {
  switch (kind) {
    case RouterKind::Sim: return "sim";
    case RouterKind::Mlp: return "mlp";
    case RouterKind::Graph: return "graph";
  }
  return "?";
}

RouterKind router_kind_from_string(std::string_view s) {
  if (s == "sim") return RouterKind::Sim;
  if (s == "mlp") return RouterKind::Mlp;
  if (s == "graph" || s == "graphrouter") return RouterKind::Graph;
  throw Error(ErrorCode::Config, "unknown router kind '" + std::string(s) + "' (sim, mlp, graph)");
}

std::string Router::checksum() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(checkpoint().dump())));
  return buf;
}

RoutingDecision sim_route(const RouteQuery& query, const CandidatePool& pool) {
  if (pool.empty()) throw Error(ErrorCode::EmptyPool, query.id);
  check_dim(pool.dim(), query.vector.size(), "query " + query.id);
  ScoreList scores;
  for (const auto& c : pool.candidates()) {
    double s = is_zero(c.profile.vector) ? kUnrankable : cosine(query.vector, c.profile.vector);
    scores.emplace_back(c.model_id, s);
  }
  return decide(query.id, std::move(scores));
}

// ---------------------------------------------------------------------------
// MLPRouter

namespace {

struct TowerPass {
  Dense1 hidden_pre;
  Dense1 hidden;
  Dense1 out;
};

TowerPass tower(const AffineLayer& in, const AffineLayer& out, std::span<const double> x) {
  TowerPass t;
  t.hidden_pre = in.forward(x);
  t.hidden = t.hidden_pre;
  for (double& v : t.hidden) v = relu(v);
  t.out = out.forward(t.hidden);
  return t;
}

void tower_backward(AffineLayer& in, AffineLayer& out, std::span<const double> x, const TowerPass& t,
                    std::span<const double> grad_out) {
  Dense1 dh = out.backward(t.hidden, grad_out);
  for (std::size_t i = 0; i < dh.size(); ++i) {
    if (t.hidden_pre[i] <= 0.0) dh[i] = 0.0;
  }
  in.backward(x, dh);
}

struct Sample {
  const Dense1* query;
  const Dense1* profile;
  double reward;
};

double mlp_full_loss(const MlpRouterModel& m, const std::vector<Sample>& samples) {
  double loss = 0.0;
  for (const auto& s : samples) {
    double d = m.predict(*s.query, *s.profile) - s.reward;
    loss += d * d;
  }
  return loss / static_cast<double>(samples.size());
}

}  // namespace

std::vector<AffineLayer*> MlpRouterModel::layers() { return {&query_in, &query_out, &profile_in, &profile_out}; }

double MlpRouterModel::predict(std::span<const double> query, std::span<const double> profile) const {
  auto q = tower(query_in, query_out, query);
  auto p = tower(profile_in, profile_out, profile);
  return sigmoid(dot(q.out, p.out));
}

MlpRouterModel mlp_fit(std::span<const InteractionRecord> interactions,
                       const std::map<std::string, Dense1>& query_vectors, const CandidatePool& pool,
                       const MlpRouterConfig& config, std::uint64_t seed) {
  if (pool.empty()) throw Error(ErrorCode::EmptyPool, "MLPRouter training pool");
  const std::size_t d = pool.dim();
  std::vector<Sample> samples;
  for (const auto& r : interactions) {
    if (!pool.contains(r.model_id)) throw Error(ErrorCode::UnknownModelInInteractions, r.model_id);
    auto q = query_vectors.find(r.query_id);
    if (q == query_vectors.end()) throw Error(ErrorCode::UnknownNode, "query " + r.query_id);
    check_dim(d, q->second.size(), "query " + r.query_id);
    samples.push_back({&q->second, &pool.profile(r.model_id).vector, r.reward});
  }

  Rng rng(seed);
  MlpRouterModel m;
  m.dim = d;
  m.config = config;
  m.query_in = AffineLayer(d, config.hidden);
  m.query_out = AffineLayer(config.hidden, config.hidden);
  m.profile_in = AffineLayer(d, config.hidden);
  m.profile_out = AffineLayer(config.hidden, config.hidden);
  for (auto* l : m.layers()) l->init_glorot(rng);
  if (samples.empty()) return m;

  AdamState adam(config.lr);
  const std::size_t batch = std::max<std::size_t>(config.batch_size, 1);
  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t lo = 0; lo < order.size(); lo += batch) {
      std::size_t hi = std::min(order.size(), lo + batch);
      const double inv = 1.0 / static_cast<double>(hi - lo);
      for (auto* l : m.layers()) l->zero_grad();
      for (std::size_t k = lo; k < hi; ++k) {
        const Sample& s = samples[order[k]];
        auto q = tower(m.query_in, m.query_out, *s.query);
        auto p = tower(m.profile_in, m.profile_out, *s.profile);
        double y = sigmoid(dot(q.out, p.out));
        double ds = 2.0 * (y - s.reward) * inv * y * (1.0 - y);
        Dense1 dq(q.out.size()), dp(p.out.size());
        for (std::size_t i = 0; i < dq.size(); ++i) {
          dq[i] = ds * p.out[i];
          dp[i] = ds * q.out[i];
        }
        tower_backward(m.query_in, m.query_out, *s.query, q, dq);
        tower_backward(m.profile_in, m.profile_out, *s.profile, p, dp);
      }
      auto layers = m.layers();
      adam.step(param_refs(layers));
    }
    double loss = mlp_full_loss(m, samples);
    if (!std::isfinite(loss)) throw Error(ErrorCode::NonFiniteLoss, "epoch " + std::to_string(epoch));
    m.loss_trace.push_back(loss);
  }
  for (auto* l : m.layers()) l->zero_grad();
  return m;
}

RoutingDecision mlp_route(const MlpRouterModel& model, const RouteQuery& query, const CandidatePool& pool) {
  if (pool.empty()) throw Error(ErrorCode::EmptyPool, query.id);
  check_dim(model.dim, query.vector.size(), "query " + query.id);
  check_dim(model.dim, pool.dim(), "pool profiles");
  auto q = tower(model.query_in, model.query_out, query.vector);
  ScoreList scores;
  for (const auto& c : pool.candidates()) {
    double s = kUnrankable;
    if (!is_zero(c.profile.vector)) {
      auto p = tower(model.profile_in, model.profile_out, c.profile.vector);
      s = sigmoid(dot(q.out, p.out));
    }
    scores.emplace_back(c.model_id, s);
  }
  return decide(query.id, std::move(scores));
}

nlohmann::json mlp_to_json(const MlpRouterModel& m) {
  return {{"kind", "mlp"},
          {"dim", m.dim},
          {"config",
           {{"hidden", m.config.hidden},
            {"epochs", m.config.epochs},
            {"lr", m.config.lr},
            {"batch_size", m.config.batch_size}}},
          {"query_in", layer_to_json(m.query_in)},
          {"query_out", layer_to_json(m.query_out)},
          {"profile_in", layer_to_json(m.profile_in)},
          {"profile_out", layer_to_json(m.profile_out)},
          {"loss_trace", m.loss_trace}};
}

MlpRouterModel mlp_from_json(const nlohmann::json& j) {
  try {
    MlpRouterModel m;
    m.dim = j.at("dim").get<std::size_t>();
    const auto& c = j.at("config");
    m.config.hidden = c.at("hidden").get<std::size_t>();
    m.config.epochs = c.at("epochs").get<int>();
    m.config.lr = c.at("lr").get<double>();
    m.config.batch_size = c.at("batch_size").get<std::size_t>();
    m.query_in = layer_from_json(j.at("query_in"));
    m.query_out = layer_from_json(j.at("query_out"));
    m.profile_in = layer_from_json(j.at("profile_in"));
    m.profile_out = layer_from_json(j.at("profile_out"));
    m.loss_trace = j.value("loss_trace", std::vector<double>{});
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, e.what());
  }
}

// ---------------------------------------------------------------------------
// GraphRouter-lite

namespace {

// Routing graph laid out as [tasks | training queries | pool models | extra query].
struct RoutingGraph {
  std::size_t task_base = 0, query_base = 0, model_base = 0, extra = SIZE_MAX;
  Dense2 features;
  struct Term {
    std::size_t col;
    double coeff;
  };
  std::vector<std::vector<Term>> rows;

  Dense2 apply(const Dense2& x) const {
    Dense2 y(x.rows(), x.cols());
    for (std::size_t v = 0; v < rows.size(); ++v) {
      auto yv = y.row(v);
      for (const auto& t : rows[v]) {
        auto xu = x.row(t.col);
        for (std::size_t c = 0; c < xu.size(); ++c) yv[c] += t.coeff * xu[c];
      }
    }
    return y;
  }
};

RoutingGraph build_routing_graph(const GraphRouterLiteModel& m, const CandidatePool& pool,
                                 const RouteQuery* extra) {
  RoutingGraph g;
  const std::size_t t = m.tasks.size(), q = m.queries.size(), p = pool.size();
  g.task_base = 0;
  g.query_base = t;
  g.model_base = t + q;
  std::size_t n = t + q + p + (extra ? 1 : 0);
  if (extra) g.extra = n - 1;
  g.features = Dense2(n, m.dim);

  struct Link {
    std::size_t a, b;
    double w;
  };
  std::vector<Link> links;
  std::vector<std::size_t> members(t, 0);
  for (std::size_t i = 0; i < q; ++i) {
    const auto& tq = m.queries[i];
    std::size_t task = static_cast<std::size_t>(
        std::lower_bound(m.tasks.begin(), m.tasks.end(), tq.task_id) - m.tasks.begin());
    std::copy(tq.vector.begin(), tq.vector.end(), g.features.row(g.query_base + i).begin());
    auto tf = g.features.row(task);
    for (std::size_t c = 0; c < m.dim; ++c) tf[c] += tq.vector[c];
    ++members[task];
    links.push_back({g.query_base + i, task, 1.0});
  }
  // Task feature: mean of its training queries.
  for (std::size_t k = 0; k < t; ++k) {
    if (members[k] == 0) continue;
    for (double& x : g.features.row(k)) x /= static_cast<double>(members[k]);
  }
  std::vector<std::size_t> pool_slot(m.models.size(), SIZE_MAX);
  for (std::size_t i = 0; i < p; ++i) {
    const auto& c = pool.candidates()[i];
    std::copy(c.profile.vector.begin(), c.profile.vector.end(), g.features.row(g.model_base + i).begin());
    auto it = std::lower_bound(m.models.begin(), m.models.end(), c.model_id);
    if (it != m.models.end() && *it == c.model_id) {
      pool_slot[static_cast<std::size_t>(it - m.models.begin())] = g.model_base + i;
    }
  }
  for (const auto& e : m.edges) {
    // Training-pool models absent from the current pool simply drop out.
    if (pool_slot[e.model] == SIZE_MAX) continue;
    links.push_back({g.query_base + e.query, pool_slot[e.model], e.reward});
  }
  if (extra) {
    auto it = std::lower_bound(m.tasks.begin(), m.tasks.end(), *extra->task_id);
    std::copy(extra->vector.begin(), extra->vector.end(), g.features.row(g.extra).begin());
    links.push_back({g.extra, static_cast<std::size_t>(it - m.tasks.begin()), 1.0});
  }

  std::vector<double> degree(n, 1.0);
  for (const auto& l : links) {
    degree[l.a] += 1.0;
    degree[l.b] += 1.0;
  }
  g.rows.resize(n);
  for (std::size_t v = 0; v < n; ++v) g.rows[v].push_back({v, 1.0 / degree[v]});
  for (const auto& l : links) {
    double c = l.w / std::sqrt(degree[l.a] * degree[l.b]);
    g.rows[l.a].push_back({l.b, c});
    g.rows[l.b].push_back({l.a, c});
  }
  return g;
}

struct GraphPass {
  Dense2 agg1, pre1, h1, agg2, pre2, h2;
};

GraphPass graph_forward(const GraphRouterLiteModel& m, const RoutingGraph& g) {
  GraphPass p;
  p.agg1 = g.apply(g.features);
  p.pre1 = m.round1.forward_rows(p.agg1);
  p.h1 = p.pre1;
  for (double& v : p.h1.flat()) v = relu(v);
  p.agg2 = g.apply(p.h1);
  p.pre2 = m.round2.forward_rows(p.agg2);
  p.h2 = p.pre2;
  for (double& v : p.h2.flat()) v = relu(v);
  return p;
}

Dense1 decoder_input(std::span<const double> q, std::span<const double> mdl) {
  const std::size_t h = q.size();
  Dense1 in(3 * h);
  for (std::size_t i = 0; i < h; ++i) {
    in[i] = q[i] * mdl[i];
    in[h + i] = q[i];
    in[2 * h + i] = mdl[i];
  }
  return in;
}

double graph_full_loss(const GraphRouterLiteModel& m, const GraphPass& p, const RoutingGraph& g) {
  double loss = 0.0;
  for (const auto& e : m.edges) {
    auto in = decoder_input(p.h2.row(g.query_base + e.query), p.h2.row(g.model_base + e.model));
    double d = sigmoid(m.decoder.forward(in)[0]) - e.reward;
    loss += d * d;
  }
  return loss / static_cast<double>(m.edges.size());
}

}  // namespace

std::vector<AffineLayer*> GraphRouterLiteModel::layers() { return {&round1, &round2, &decoder}; }

GraphRouterLiteModel graphrouter_fit(std::span<const TrainingQuery> queries,
                                     std::span<const InteractionRecord> interactions,
                                     const CandidatePool& pool, const GraphRouterConfig& config,
                                     std::uint64_t seed) {
  if (pool.empty()) throw Error(ErrorCode::EmptyPool, "GraphRouter-lite training pool");
  GraphRouterLiteModel m;
  m.dim = pool.dim();
  m.config = config;

  std::set<std::string> tasks;
  for (const auto& q : queries) {
    if (q.task_id.empty()) throw Error(ErrorCode::UnassignedQuery, q.id);
    check_dim(m.dim, q.vector.size(), "query " + q.id);
    tasks.insert(q.task_id);
    m.queries.push_back(q);
  }
  std::sort(m.queries.begin(), m.queries.end(),
            [](const TrainingQuery& a, const TrainingQuery& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < m.queries.size(); ++i) {
    if (m.queries[i].id == m.queries[i - 1].id) throw Error(ErrorCode::DuplicateId, m.queries[i].id);
  }
  m.tasks.assign(tasks.begin(), tasks.end());
  m.models = pool.ids();
  std::sort(m.models.begin(), m.models.end());

  // One edge per (query, model); ordered for reproducible minibatches.
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& r : interactions) {
    auto qi = std::lower_bound(m.queries.begin(), m.queries.end(), r.query_id,
                               [](const TrainingQuery& a, const std::string& id) { return a.id < id; });
    if (qi == m.queries.end() || qi->id != r.query_id) throw Error(ErrorCode::UnassignedQuery, r.query_id);
    auto mi = std::lower_bound(m.models.begin(), m.models.end(), r.model_id);
    if (mi == m.models.end() || *mi != r.model_id) throw Error(ErrorCode::UnknownModelInInteractions, r.model_id);
    std::size_t q = static_cast<std::size_t>(qi - m.queries.begin());
    std::size_t k = static_cast<std::size_t>(mi - m.models.begin());
    if (!seen.insert({q, k}).second) throw Error(ErrorCode::DuplicateId, r.query_id + "/" + r.model_id);
    m.edges.push_back({q, k, r.reward});
  }
  std::sort(m.edges.begin(), m.edges.end(), [](const auto& a, const auto& b) {
    return std::tie(a.query, a.model) < std::tie(b.query, b.model);
  });

  Rng rng(seed);
  const std::size_t h = config.hidden;
  // Similarity prior: both rounds start as (rectangular) identities and the
  // decoder as sigmoid(b + <q, m>), so the untrained router already ranks by
  // propagated similarity and training only has to learn corrections.
  m.round1 = AffineLayer(m.dim, h);
  m.round2 = AffineLayer(h, h);
  m.decoder = AffineLayer(3 * h, 1);
  for (std::size_t i = 0; i < std::min(m.dim, h); ++i) m.round1.weight(i, i) = 1.0;
  for (std::size_t i = 0; i < h; ++i) {
    m.round2.weight(i, i) = 1.0;
    m.decoder.weight(0, i) = 1.0;
  }
  if (m.edges.empty()) return m;

  // Bias at the base rate so early predictions are calibrated.
  double mean = 0.0;
  for (const auto& e : m.edges) mean += e.reward;
  mean = std::clamp(mean / static_cast<double>(m.edges.size()), 0.01, 0.99);
  m.decoder.bias[0] = std::log(mean / (1.0 - mean));

  // The training graph is the pool as given, laid out in sorted-model order.
  CandidatePool sorted_pool;
  for (const auto& id : m.models) sorted_pool.add(pool.profile(id));
  const RoutingGraph g = build_routing_graph(m, sorted_pool, nullptr);

  AdamState adam(config.lr);
  const std::size_t batch = std::max<std::size_t>(config.batch_size, 1);
  std::vector<std::size_t> order(m.edges.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t lo = 0; lo < order.size(); lo += batch) {
      std::size_t hi = std::min(order.size(), lo + batch);
      const double inv = 1.0 / static_cast<double>(hi - lo);
      for (auto* l : m.layers()) l->zero_grad();
      GraphPass p = graph_forward(m, g);
      Dense2 dh2(p.h2.rows(), h);
      for (std::size_t k = lo; k < hi; ++k) {
        const auto& e = m.edges[order[k]];
        std::size_t qn = g.query_base + e.query;
        std::size_t mn = g.model_base + e.model;
        auto qs = p.h2.row(qn);
        auto ms = p.h2.row(mn);
        Dense1 in = decoder_input(qs, ms);
        double y = sigmoid(m.decoder.forward(in)[0]);
        double dz = 2.0 * (y - e.reward) * inv * y * (1.0 - y);
        Dense1 din = m.decoder.backward(in, std::span<const double>(&dz, 1));
        auto dq = dh2.row(qn);
        auto dm = dh2.row(mn);
        for (std::size_t i = 0; i < h; ++i) {
          dq[i] += din[i] * ms[i] + din[h + i];
          dm[i] += din[i] * qs[i] + din[2 * h + i];
        }
      }
      auto z2 = p.pre2.flat();
      auto g2 = dh2.flat();
      for (std::size_t i = 0; i < g2.size(); ++i) {
        if (z2[i] <= 0.0) g2[i] = 0.0;
      }
      Dense2 dagg2 = m.round2.backward_rows(p.agg2, dh2);
      Dense2 dh1 = g.apply(dagg2);  // symmetric operator
      auto z1 = p.pre1.flat();
      auto g1 = dh1.flat();
      for (std::size_t i = 0; i < g1.size(); ++i) {
        if (z1[i] <= 0.0) g1[i] = 0.0;
      }
      m.round1.backward_rows(p.agg1, dh1);
      auto layers = m.layers();
      adam.step(param_refs(layers));
    }
    double loss = graph_full_loss(m, graph_forward(m, g), g);
    if (!std::isfinite(loss)) throw Error(ErrorCode::NonFiniteLoss, "epoch " + std::to_string(epoch));
    m.loss_trace.push_back(loss);
  }
  for (auto* l : m.layers()) l->zero_grad();
  return m;
}

RoutingDecision graphrouter_route(const GraphRouterLiteModel& model, const RouteQuery& query,
                                  const CandidatePool& pool) {
  if (pool.empty()) throw Error(ErrorCode::EmptyPool, query.id);
  if (!query.task_id || !std::binary_search(model.tasks.begin(), model.tasks.end(), *query.task_id)) {
    throw Error(ErrorCode::UnknownTask, query.task_id.value_or("<none>") + " for query " + query.id);
  }
  check_dim(model.dim, query.vector.size(), "query " + query.id);
  check_dim(model.dim, pool.dim(), "pool profiles");
  const RoutingGraph g = build_routing_graph(model, pool, &query);
  const GraphPass p = graph_forward(model, g);
  auto qs = p.h2.row(g.extra);
  ScoreList scores;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& c = pool.candidates()[i];
    double s = kUnrankable;
    if (!is_zero(c.profile.vector)) {
      s = sigmoid(model.decoder.forward(decoder_input(qs, p.h2.row(g.model_base + i)))[0]);
    }
    scores.emplace_back(c.model_id, s);
  }
  return decide(query.id, std::move(scores));
}

nlohmann::json graphrouter_to_json(const GraphRouterLiteModel& m) {
  nlohmann::json queries = nlohmann::json::array();
  for (const auto& q : m.queries) {
    queries.push_back({{"id", q.id}, {"task_id", q.task_id}, {"vector", encode_doubles(q.vector)}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : m.edges) edges.push_back({e.query, e.model, e.reward});
  return {{"kind", "graph"},
          {"dim", m.dim},
          {"config",
           {{"hidden", m.config.hidden},
            {"epochs", m.config.epochs},
            {"lr", m.config.lr},
            {"batch_size", m.config.batch_size}}},
          {"tasks", m.tasks},
          {"queries", queries},
          {"models", m.models},
          {"edges", edges},
          {"round1", layer_to_json(m.round1)},
          {"round2", layer_to_json(m.round2)},
          {"decoder", layer_to_json(m.decoder)},
          {"loss_trace", m.loss_trace}};
}

GraphRouterLiteModel graphrouter_from_json(const nlohmann::json& j) {
  try {
    GraphRouterLiteModel m;
    m.dim = j.at("dim").get<std::size_t>();
    const auto& c = j.at("config");
    m.config.hidden = c.at("hidden").get<std::size_t>();
    m.config.epochs = c.at("epochs").get<int>();
    m.config.lr = c.at("lr").get<double>();
    m.config.batch_size = c.at("batch_size").get<std::size_t>();
    m.tasks = j.at("tasks").get<std::vector<std::string>>();
    for (const auto& q : j.at("queries")) {
      m.queries.push_back({q.at("id").get<std::string>(), decode_doubles(q.at("vector").get<std::string>()),
                           q.at("task_id").get<std::string>()});
    }
    m.models = j.at("models").get<std::vector<std::string>>();
    for (const auto& e : j.at("edges")) {
      GraphRouterLiteModel::RewardEdge re{e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>(),
                                          e.at(2).get<double>()};
      if (re.query >= m.queries.size() || re.model >= m.models.size()) {
        throw Error(ErrorCode::Parse, "reward edge index out of range");
      }
      m.edges.push_back(re);
    }
    m.round1 = layer_from_json(j.at("round1"));
    m.round2 = layer_from_json(j.at("round2"));
    m.decoder = layer_from_json(j.at("decoder"));
    m.loss_trace = j.value("loss_trace", std::vector<double>{});
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, e.what());
  }
}

std::unique_ptr<Router> router_from_checkpoint(const nlohmann::json& j) {
  std::string kind = j.value("kind", "");
  switch (router_kind_from_string(kind)) {
    case RouterKind::Sim: return std::make_unique<SimRouter>();
    case RouterKind::Mlp: return std::make_unique<MlpRouter>(mlp_from_json(j));
    case RouterKind::Graph: return std::make_unique<GraphRouterLite>(graphrouter_from_json(j));
  }
  throw Error(ErrorCode::Parse, "unknown checkpoint kind");
}

const Profile& integrate_new_model([[maybe_unused]] const Router& router, CandidatePool& pool,
                                   EvidenceGraph& graph, const ModelCard& card, const ProfileSpec& spec,
                                   ProfileContext& ctx,
                                   const std::map<std::string, ScoreScale>& benchmark_scales) {
  if (pool.contains(card.id)) throw Error(ErrorCode::DuplicateId, card.id);
  spec.validate();
  add_model_node(graph, card, benchmark_scales);
  try {
    if (ctx.encoder && !graph.node(card.id).embedding) {
      graph.set_embedding(graph.index_of(card.id), ctx.encoder->encode(card.description));
    }
    std::vector<std::string> ids{card.id};
    auto profiles = make_profiles(graph, spec, ids, ctx);
    pool.add(std::move(profiles.at(card.id)));
  } catch (...) {
    graph.remove_node(card.id);
    throw;
  }
  return pool.candidates().back().profile;
}

}  // namespace coldroute
