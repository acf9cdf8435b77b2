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
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "coldroute/features.hpp"
#include "coldroute/graph.hpp"
#include "coldroute/nn.hpp"
#include "coldroute/propagation.hpp"
#include "coldroute/textgnn.hpp"
#include "coldroute/traingnn.hpp"

namespace coldroute {

enum class Form { Flat, Structured };
enum class Representation { Text, Embedding };
enum class Learning { TrainingFree, Trainable };

// A point (form, representation, depth, learning) in the profile design space.
struct ProfileSpec {
  Form form = Form::Flat;
  Representation representation = Representation::Text;
  int depth = 0;
  Learning learning = Learning::TrainingFree;

  // Throws InvalidSpec unless the combination is one of the admissible ones.
  void validate() const;

  static ProfileSpec flat() { return {Form::Flat, Representation::Text, 0, Learning::TrainingFree}; }
  static ProfileSpec text_gnn(int k) {
    return {Form::Structured, Representation::Text, k, Learning::TrainingFree};
  }
  static ProfileSpec emb_gnn(int k) {
    return {Form::Structured, Representation::Embedding, k, Learning::TrainingFree};
  }
  static ProfileSpec train_gnn(int k) {
    return {Form::Structured, Representation::Embedding, k, Learning::Trainable};
  }

  bool operator==(const ProfileSpec&) const = default;
};

// Short forms: "flat", "text:K", "emb:K", "train:K".
ProfileSpec parse_spec(std::string_view s);
std::string to_string(const ProfileSpec& spec);
void to_json(nlohmann::json& j, const ProfileSpec& s);
void from_json(const nlohmann::json& j, ProfileSpec& s);

struct Profile {
  std::string model_id;
  Dense1 vector;
  std::optional<std::string> text;
  ProfileSpec spec;

  bool operator==(const Profile&) const = default;
};

void to_json(nlohmann::json& j, const Profile& p);
void from_json(const nlohmann::json& j, Profile& p);

// Deterministic concatenation of family description, model description and
// one "benchmark — domain — score" line per scored benchmark (sorted by id).
std::string flat_profile_text(const EvidenceGraph& graph, std::string_view model_id);
Profile flat_profile(const EvidenceGraph& graph, std::string_view model_id, const TextEncoder& encoder);

// Forward pass of a fitted TrainGNN without masking; vector = hop-K state.
Profile traingnn_profile(const TrainGnnModel& model, const EvidenceGraph& graph,
                         std::string_view model_id);

Profile textgnn_profile(const EvidenceGraph& graph, std::string_view model_id, int depth,
                        const LlmSummarizer& summarizer, const TextEncoder& encoder,
                        const PromptTemplates& templates = PromptTemplates::defaults());

// Providers and state shared across profile construction.
struct ProfileContext {
  const TextEncoder* encoder = nullptr;
  const LlmSummarizer* summarizer = nullptr;
  PromptTemplates templates = PromptTemplates::defaults();
  std::size_t summarizer_threads = 1;
  TrainGnnConfig train_config;
  std::uint64_t seed = 0;
  // Fitted on first Trainable request and reused afterwards (frozen).
  std::shared_ptr<const TrainGnnModel> trained;
};

// Dispatches to the four instantiations; result keyed by model id.
std::map<std::string, Profile> make_profiles(const EvidenceGraph& graph, const ProfileSpec& spec,
                                             std::span<const std::string> pool, ProfileContext& ctx);

}  // namespace coldroute
