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
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "coldroute/features.hpp"
#include "coldroute/graph.hpp"

namespace coldroute {

// Per-node-kind prompt templates for text message passing. Placeholders:
//   {{kind}} {{node_id}} {{hop}} {{self_text}} {{neighbors}}
// {{neighbors}} expands to one line per neighbor, sorted by id:
//   - <Kind> <id> [score 0.850]: <text>
class PromptTemplates {
 public:
  static const PromptTemplates& defaults();
  // Reads <dir>/<Kind>.txt for each non-Query kind; missing files keep the default.
  static PromptTemplates load_dir(const std::filesystem::path& dir);

  const std::string& for_kind(NodeKind kind) const;
  void set(NodeKind kind, std::string body) { bodies_[kind] = std::move(body); }

 private:
  std::map<NodeKind, std::string> bodies_;
};

// Renders the hop-`hop` prompt for node v from the hop-1 states of v and its
// neighbors. `states` is indexed in graph node order.
std::string render_prompt(const EvidenceGraph& graph, std::span<const std::string> states, std::size_t v,
                          int hop, const PromptTemplates& templates);

// One update of node v. Query nodes keep their raw text and are rejected.
std::string textgnn_step(const EvidenceGraph& graph, std::span<const std::string> states, std::size_t v,
                         int hop, const LlmSummarizer& summarizer, const PromptTemplates& templates);

// K synchronous rounds over all non-Query nodes; hop-0 states are the node
// texts. Updates within a round may run on `threads` workers; results are
// merged by node index so output does not depend on scheduling.
std::vector<std::string> textgnn_propagate(const EvidenceGraph& graph, int depth,
                                           const LlmSummarizer& summarizer,
                                           const PromptTemplates& templates, std::size_t threads = 1);

}  // namespace coldroute
