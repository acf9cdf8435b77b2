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

#include "coldroute/textgnn.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "coldroute/error.hpp"

namespace coldroute {

namespace {

std::string builtin(NodeKind kind) {
  const std::string head =
      "You are refining the description of a {{kind}} node in a graph of language models, "
      "model families, benchmarks and capability domains (propagation hop {{hop}}).\n\n"
      "Node: {{node_id}}\n"
      "Current description:\n{{self_text}}\n\n"
      "Connected nodes:\n{{neighbors}}\n\n";
  switch (kind) {
    case NodeKind::Model:
      return head +
             "Context to use: the model family, the benchmark scores grouped by domain, and the "
             "example queries attached to the benchmarks.\n"
             "Task: merge this context into one capability profile of the model that covers its "
             "architecture, how it performs in each domain and which queries it is suited to.\n"
             "Reply with 3 to 5 sentences.";
    case NodeKind::Benchmark:
      return head +
             "Context to use: the parent domain, the models evaluated with their scores, and "
             "example queries from the benchmark.\n"
             "Task: state what capability the benchmark measures, which models do well or badly on "
             "it, and what kinds of queries it contains.\n"
             "Reply with 2 to 4 sentences.";
    case NodeKind::Domain:
      return head +
             "Context to use: every benchmark that belongs to this domain.\n"
             "Task: characterize the capability area and give an overview of its benchmarks.\n"
             "Reply with 2 to 4 sentences.";
    case NodeKind::ModelFamily:
      return head +
             "Context to use: every model built on this architecture.\n"
             "Task: describe the main design traits of the architecture and the capabilities "
             "typical of its models.\n"
             "Reply with 2 to 4 sentences.";
    case NodeKind::Query:
      break;
  }
  return {};
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

constexpr NodeKind kUpdatable[] = {NodeKind::Model, NodeKind::ModelFamily, NodeKind::Benchmark,
                                   NodeKind::Domain};

}  // namespace

const PromptTemplates& PromptTemplates::defaults() {
  static const PromptTemplates t = [] {
    PromptTemplates p;
    for (auto k : kUpdatable) p.bodies_[k] = builtin(k);
    return p;
  }();
  return t;
}

PromptTemplates PromptTemplates::load_dir(const std::filesystem::path& dir) {
  PromptTemplates t = defaults();
  for (auto k : kUpdatable) {
    auto path = dir / (std::string(to_string(k)) + ".txt");
    std::ifstream in(path);
    if (!in) continue;
    std::stringstream ss;
    ss << in.rdbuf();
    t.bodies_[k] = ss.str();
  }
  return t;
}

const std::string& PromptTemplates::for_kind(NodeKind kind) const {
  auto it = bodies_.find(kind);
  if (it == bodies_.end()) throw Error(ErrorCode::QueryNodeUpdateAttempt, "no template for Query nodes");
  return it->second;
}

std::string render_prompt(const EvidenceGraph& graph, std::span<const std::string> states, std::size_t v,
                          int hop, const PromptTemplates& templates) {
  const Node& self = graph.node_at(v);
  std::string neighbors;
  for (const auto& nb : graph.neighbors(v)) {
    const Node& u = graph.node_at(nb.index);
    neighbors += "- ";
    neighbors += to_string(u.kind);
    neighbors += ' ';
    neighbors += u.id;
    if (nb.scored) {
      char buf[32];
      std::snprintf(buf, sizeof buf, " [score %.3f]", nb.weight);
      neighbors += buf;
    }
    neighbors += ": ";
    neighbors += states[nb.index];
    neighbors += '\n';
  }
  if (neighbors.empty()) neighbors = "(none)\n";
  neighbors.pop_back();

  std::string prompt = templates.for_kind(self.kind);
  // Substitute the free-text slots last so placeholder-like text inside a
  // node description is never expanded.
  replace_all(prompt, "{{kind}}", to_string(self.kind));
  replace_all(prompt, "{{node_id}}", self.id);
  replace_all(prompt, "{{hop}}", std::to_string(hop));
  const std::string self_marker = "\x01self\x01";
  const std::string nb_marker = "\x01neighbors\x01";
  replace_all(prompt, "{{self_text}}", self_marker);
  replace_all(prompt, "{{neighbors}}", nb_marker);
  std::string out;
  out.reserve(prompt.size() + neighbors.size() + states[v].size());
  for (std::size_t pos = 0; pos < prompt.size();) {
    if (prompt.compare(pos, self_marker.size(), self_marker) == 0) {
      out += states[v];
      pos += self_marker.size();
    } else if (prompt.compare(pos, nb_marker.size(), nb_marker) == 0) {
      out += neighbors;
      pos += nb_marker.size();
    } else {
      out += prompt[pos++];
    }
  }
  return out;
}

std::string textgnn_step(const EvidenceGraph& graph, std::span<const std::string> states, std::size_t v,
                         int hop, const LlmSummarizer& summarizer, const PromptTemplates& templates) {
  const Node& node = graph.node_at(v);
  if (node.kind == NodeKind::Query) throw Error(ErrorCode::QueryNodeUpdateAttempt, node.id);
  std::string prompt = render_prompt(graph, states, v, hop, templates);
  try {
    return summarizer.summarize(prompt);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SummarizerFailure) throw;
    throw Error(ErrorCode::SummarizerFailure, node.id + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::SummarizerFailure, node.id + ": " + e.what());
  }
}

std::vector<std::string> textgnn_propagate(const EvidenceGraph& graph, int depth,
                                           const LlmSummarizer& summarizer,
                                           const PromptTemplates& templates, std::size_t threads) {
  const std::size_t n = graph.node_count();
  std::vector<std::string> states(n);
  for (std::size_t i = 0; i < n; ++i) states[i] = graph.node_at(i).text;

  std::vector<std::size_t> work;
  for (std::size_t i = 0; i < n; ++i) {
    if (graph.node_at(i).kind != NodeKind::Query) work.push_back(i);
  }
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(work.size(), 1));

  for (int hop = 1; hop <= depth; ++hop) {
    std::vector<std::string> next = states;
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> cursor{0};
    auto worker = [&] {
      for (std::size_t k = cursor++; k < work.size(); k = cursor++) {
        std::size_t v = work[k];
        try {
          next[v] = textgnn_step(graph, states, v, hop, summarizer, templates);
        } catch (...) {
          errors[v] = std::current_exception();
        }
      }
    };
    if (threads == 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    // Report the lowest-index failure so errors are reproducible too.
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    states = std::move(next);
  }
  return states;
}

}  // namespace coldroute
