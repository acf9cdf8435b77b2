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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coldroute/eval.hpp"
#include "coldroute/graph.hpp"

namespace coldroute {

// Small planted worlds for end-to-end checks. Each domain owns a vocabulary of
// pseudo-words; benchmark descriptions and queries of a domain draw from it,
// while model and family descriptions are generic boilerplate. Every model
// specializes in one domain and scores high only on that domain's benchmarks.
struct SynthWorldConfig {
  std::uint64_t seed = 0;
  int num_domains = 2;
  int models_per_specialty = 2;
  int queries_per_domain = 50;  // evaluation queries
  double noise = 0.0;           // reward flip probability, in [0, 1)
  int train_queries_per_domain = 20;
  int benchmarks_per_domain = 2;
  int evidence_queries_per_benchmark = 2;
  int vocab_per_domain = 40;
  int words_per_text = 8;
  // Adds one more domain whose only specialist is a new model kept out of the
  // initial pool and out of every training interaction.
  bool with_new_model = false;

  void validate() const;  // InvalidSpec
};

struct SynthWorld {
  CardSet cards;                          // initial pool only
  std::vector<std::string> pool;          // initial model ids
  std::optional<ModelCard> new_model;
  std::map<std::string, std::string> specialty;  // model id -> domain id
  std::vector<EvalQuery> eval_queries;   // task_id = domain id
  std::vector<EvalQuery> train_queries;  // task_id = domain id
  std::vector<InteractionRecord> train_interactions;  // train queries x initial pool
  RewardTable rewards;                   // eval queries x (pool + new model)
};

SynthWorld synth_world(const SynthWorldConfig& config);

}  // namespace coldroute
