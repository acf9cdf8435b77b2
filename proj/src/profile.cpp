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

#include "coldroute/profile.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "coldroute/error.hpp"

namespace coldroute {

void ProfileSpec::validate() const {
  auto bad = [&](const std::string& why) {
    throw Error(ErrorCode::InvalidSpec, to_string(*this) + ": " + why);
  };
  if (depth < 0 || depth > 4) bad("depth must lie in [0, 4]");
  if (form == Form::Flat) {
    if (depth != 0) bad("flat profiles have depth 0");
    if (learning != Learning::TrainingFree) bad("flat profiles are training-free");
    if (representation != Representation::Text) bad("flat profiles are textual");
  } else if (depth < 1) {
    bad("structured profiles need depth >= 1");
  }
  if (learning == Learning::Trainable &&
      (representation != Representation::Embedding || form != Form::Structured)) {
    bad("trainable aggregation requires a structured embedding profile");
  }
}

std::string to_string(const ProfileSpec& spec) {
  if (spec == ProfileSpec::flat()) return "flat";
  std::string k = std::to_string(spec.depth);
  if (spec.form == Form::Structured && spec.learning == Learning::TrainingFree) {
    return (spec.representation == Representation::Text ? "text:" : "emb:") + k;
  }
  if (spec.form == Form::Structured && spec.representation == Representation::Embedding) {
    return "train:" + k;
  }
  // Invalid combinations still need a readable name for error messages.
  return std::string(spec.form == Form::Flat ? "Flat" : "Structured") + "/" +
         (spec.representation == Representation::Text ? "Text" : "Embedding") + "/" + k + "/" +
         (spec.learning == Learning::Trainable ? "Trainable" : "TrainingFree");
}

ProfileSpec parse_spec(std::string_view s) {
  if (s == "flat") return ProfileSpec::flat();
  auto colon = s.find(':');
  if (colon == std::string_view::npos) throw Error(ErrorCode::InvalidSpec, "unrecognized spec '" + std::string(s) + "'");
  std::string_view head = s.substr(0, colon);
  std::string_view tail = s.substr(colon + 1);
  int k = -1;
  auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), k);
  if (ec != std::errc() || ptr != tail.data() + tail.size()) {
    throw Error(ErrorCode::InvalidSpec, "bad depth in spec '" + std::string(s) + "'");
  }
  ProfileSpec spec;
  if (head == "text") spec = ProfileSpec::text_gnn(k);
  else if (head == "emb") spec = ProfileSpec::emb_gnn(k);
  else if (head == "train") spec = ProfileSpec::train_gnn(k);
  else throw Error(ErrorCode::InvalidSpec, "unrecognized spec '" + std::string(s) + "'");
  spec.validate();
  return spec;
}

void to_json(nlohmann::json& j, const ProfileSpec& s) {
  j = {{"form", s.form == Form::Flat ? "Flat" : "Structured"},
       {"representation", s.representation == Representation::Text ? "Text" : "Embedding"},
       {"depth", s.depth},
       {"learning", s.learning == Learning::Trainable ? "Trainable" : "TrainingFree"}};
}

void from_json(const nlohmann::json& j, ProfileSpec& s) {
  if (j.is_string()) {
    s = parse_spec(j.get<std::string>());
    return;
  }
  auto pick = [&](const char* key, const char* a, const char* b) {
    std::string v = j.at(key).get<std::string>();
    if (v == a) return false;
    if (v == b) return true;
    throw Error(ErrorCode::InvalidSpec, std::string(key) + " must be " + a + " or " + b);
  };
  s.form = pick("form", "Flat", "Structured") ? Form::Structured : Form::Flat;
  s.representation = pick("representation", "Text", "Embedding") ? Representation::Embedding
                                                                   : Representation::Text;
  s.depth = j.at("depth").get<int>();
  s.learning = pick("learning", "TrainingFree", "Trainable") ? Learning::Trainable : Learning::TrainingFree;
}

void to_json(nlohmann::json& j, const Profile& p) {
  j = {{"model_id", p.model_id}, {"spec", to_string(p.spec)}, {"vector", p.vector}};
  if (p.text) j["text"] = *p.text;
}

void from_json(const nlohmann::json& j, Profile& p) {
  j.at("model_id").get_to(p.model_id);
  p.spec = j.at("spec").get<ProfileSpec>();
  p.vector = j.at("vector").get<Dense1>();
  p.text.reset();
  if (j.contains("text")) p.text = j.at("text").get<std::string>();
}

std::string flat_profile_text(const EvidenceGraph& graph, std::string_view model_id) {
  std::size_t v = graph.index_of(model_id);
  const Node& model = graph.node_at(v);
  if (model.kind != NodeKind::Model) throw Error(ErrorCode::UnknownNode, std::string(model_id) + " is not a model");

  std::string family;
  std::vector<std::string> lines;
  for (const auto& nb : graph.neighbors(v)) {
    const Node& u = graph.node_at(nb.index);
    if (u.kind == NodeKind::ModelFamily) {
      family = u.text;
    } else if (u.kind == NodeKind::Benchmark) {
      std::string domain;
      for (const auto& nb2 : graph.neighbors(nb.index)) {
        const Node& w = graph.node_at(nb2.index);
        if (w.kind == NodeKind::Domain) domain = w.id;
      }
      char score[32];
      std::snprintf(score, sizeof score, "%.3f", nb.weight);
      lines.push_back(u.id + " — " + domain + " — " + score);
    }
  }
  // Neighbors are already sorted by id, so lines are too.
  std::string text = family;
  if (!text.empty()) text += '\n';
  text += model.text;
  for (const auto& l : lines) text += '\n' + l;
  return text;
}

Profile flat_profile(const EvidenceGraph& graph, std::string_view model_id, const TextEncoder& encoder) {
  Profile p;
  p.model_id = std::string(model_id);
  p.spec = ProfileSpec::flat();
  p.text = flat_profile_text(graph, model_id);
  p.vector = encoder.encode(*p.text);
  return p;
}

Profile traingnn_profile(const TrainGnnModel& model, const EvidenceGraph& graph, std::string_view model_id) {
  std::size_t v = graph.index_of(model_id);
  Dense2 states = traingnn_forward(model, graph);
  auto row = states.row(v);
  return {std::string(model_id), Dense1(row.begin(), row.end()), std::nullopt,
          ProfileSpec::train_gnn(model.depth())};
}

Profile textgnn_profile(const EvidenceGraph& graph, std::string_view model_id, int depth,
                        const LlmSummarizer& summarizer, const TextEncoder& encoder,
                        const PromptTemplates& templates) {
  ProfileSpec spec = ProfileSpec::text_gnn(depth);
  spec.validate();
  std::size_t v = graph.index_of(model_id);
  auto states = textgnn_propagate(graph, depth, summarizer, templates);
  Profile p{std::string(model_id), {}, states[v], spec};
  p.vector = encoder.encode(*p.text);
  return p;
}

std::map<std::string, Profile> make_profiles(const EvidenceGraph& graph, const ProfileSpec& spec,
                                             std::span<const std::string> pool, ProfileContext& ctx) {
  spec.validate();
  for (const auto& id : pool) {
    if (graph.node(id).kind != NodeKind::Model) throw Error(ErrorCode::UnknownNode, id + " is not a model");
  }
  std::map<std::string, Profile> out;
  auto need_encoder = [&] {
    if (!ctx.encoder) throw Error(ErrorCode::Config, "text profiles need a text encoder");
  };

  if (spec.form == Form::Flat) {
    need_encoder();
    for (const auto& id : pool) out[id] = flat_profile(graph, id, *ctx.encoder);
    return out;
  }

  if (spec.representation == Representation::Text) {
    need_encoder();
    if (!ctx.summarizer) throw Error(ErrorCode::Config, "text message passing needs a summarizer");
    auto states = textgnn_propagate(graph, spec.depth, *ctx.summarizer, ctx.templates, ctx.summarizer_threads);
    for (const auto& id : pool) {
      Profile p{id, {}, states[graph.index_of(id)], spec};
      p.vector = ctx.encoder->encode(*p.text);
      out[id] = std::move(p);
    }
    return out;
  }

  Dense2 states;
  if (spec.learning == Learning::TrainingFree) {
    states = embgnn_propagate(graph, spec.depth);
  } else {
    if (!ctx.trained || ctx.trained->depth() != spec.depth) {
      ctx.trained = std::make_shared<const TrainGnnModel>(
          traingnn_fit(graph, spec.depth, ctx.train_config, ctx.seed));
    }
    states = traingnn_forward(*ctx.trained, graph);
  }
  for (const auto& id : pool) {
    auto row = states.row(graph.index_of(id));
    out[id] = Profile{id, Dense1(row.begin(), row.end()), std::nullopt, spec};
  }
  return out;
}

}  // namespace coldroute
