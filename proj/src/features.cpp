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

#include "coldroute/features.hpp"

#include <cctype>
#include <cmath>
#include <map>

#include "coldroute/error.hpp"
#include "coldroute/rng.hpp"

namespace coldroute {

std::vector<Dense1> TextEncoder::encode_batch(std::span<const std::string> texts) const {
  std::vector<Dense1> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(encode(t));
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void l2_normalize(Dense1& v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  if (sq == 0.0) return;
  double inv = 1.0 / std::sqrt(sq);
  for (double& x : v) x *= inv;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    // Trailing punctuation such as a sentence-ending '.' is not part of the token.
    while (!cur.empty() && (cur.back() == '.' || cur.back() == '-' || cur.back() == '_')) cur.pop_back();
    if (!cur.empty()) tokens.push_back(cur);
    cur.clear();
  };
  for (unsigned char c : text) {
    if (std::isalnum(c) || c >= 0x80 || ((c == '-' || c == '_' || c == '.') && !cur.empty())) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::string_view truncate_utf8(std::string_view text, std::size_t max_bytes) {
  if (max_bytes == 0 || text.size() <= max_bytes) return text;
  std::size_t cut = max_bytes;
  // Back off continuation bytes (10xxxxxx).
  while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
  return text.substr(0, cut);
}

DeterministicEmbedder::DeterministicEmbedder(std::uint64_t seed, std::size_t dim,
                                             std::size_t max_input_bytes)
    : seed_(seed), dim_(dim), max_input_bytes_(max_input_bytes) {
  if (dim == 0) throw Error(ErrorCode::InvalidSpec, "embedder dimension must be positive");
}

Dense1 DeterministicEmbedder::encode(std::string_view text) const {
  Dense1 out(dim_, 0.0);
  text = truncate_utf8(text, max_input_bytes_);
  if (text.empty()) return out;

  auto tokens = tokenize(text);
  if (tokens.empty()) tokens.emplace_back(text);  // punctuation-only input
  std::map<std::string, int> counts;
  for (auto& t : tokens) ++counts[t];

  std::uint64_t basis = fnv1a64("seed:" + std::to_string(seed_));
  for (const auto& [token, count] : counts) {
    Rng rng(fnv1a64(token, basis));
    for (std::size_t i = 0; i < dim_; ++i) out[i] += count * rng.normal();
  }
  l2_normalize(out);
  return out;
}

void encode_all(EvidenceGraph& graph, const TextEncoder& encoder) {
  graph.set_dim(encoder.dim());
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    const auto& n = graph.node_at(i);
    if (n.kind != NodeKind::Query && n.text.empty()) throw Error(ErrorCode::EmptyText, n.id);
  }
  std::vector<std::string> texts;
  texts.reserve(graph.node_count());
  for (const auto& n : graph.nodes()) texts.push_back(n.text);
  std::vector<Dense1> vecs;
  try {
    vecs = encoder.encode_batch(texts);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DimensionMismatch || e.code() == ErrorCode::Transport ||
        e.code() == ErrorCode::Timeout) {
      throw;
    }
    throw Error(ErrorCode::EncoderFailure, e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::EncoderFailure, e.what());
  }
  if (vecs.size() != graph.node_count()) {
    throw Error(ErrorCode::EncoderFailure, "encoder returned " + std::to_string(vecs.size()) +
                                               " vectors for " + std::to_string(graph.node_count()) + " nodes");
  }
  for (std::size_t i = 0; i < vecs.size(); ++i) {
    if (vecs[i].size() != encoder.dim()) {
      throw Error(ErrorCode::EncoderFailure, graph.node_at(i).id + ": wrong dimension");
    }
    graph.set_embedding(i, std::move(vecs[i]));
  }
}

}  // namespace coldroute
