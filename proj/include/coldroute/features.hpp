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
#include <string>
#include <string_view>
#include <vector>

#include "coldroute/graph.hpp"

namespace coldroute {

// encode(text) -> unit-norm vector of dim() entries (zero vector for empty
// text). Implementations must be deterministic and safe for concurrent use.
class TextEncoder {
 public:
  virtual ~TextEncoder() = default;
  virtual std::size_t dim() const = 0;
  virtual Dense1 encode(std::string_view text) const = 0;
  virtual std::vector<Dense1> encode_batch(std::span<const std::string> texts) const;
};

class LlmSummarizer {
 public:
  virtual ~LlmSummarizer() = default;
  virtual std::string summarize(std::string_view prompt) const = 0;
};

// Offline encoder: token counts projected through per-token pseudorandom
// Gaussian directions derived from hash(seed, token), then L2-normalized.
class DeterministicEmbedder final : public TextEncoder {
 public:
  DeterministicEmbedder(std::uint64_t seed, std::size_t dim, std::size_t max_input_bytes = 0);

  std::size_t dim() const override { return dim_; }
  Dense1 encode(std::string_view text) const override;

 private:
  std::uint64_t seed_;
  std::size_t dim_;
  std::size_t max_input_bytes_;
};

// Returns its prompt verbatim; a test double for text message passing.
class EchoSummarizer final : public LlmSummarizer {
 public:
  std::string summarize(std::string_view prompt) const override { return std::string(prompt); }
};

// Scales v to unit L2 norm in place; zero vectors are left as is.
void l2_normalize(Dense1& v);

// Lowercased alphanumeric tokens ('-', '_' and '.' stay inside a token).
std::vector<std::string> tokenize(std::string_view text);

// Truncates at max_bytes without splitting a UTF-8 sequence (0 = no cap).
std::string_view truncate_utf8(std::string_view text, std::size_t max_bytes);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

// Sets every node embedding from encoder.encode(text) and records the
// encoder's dimension on the graph. Non-Query nodes must carry text.
void encode_all(EvidenceGraph& graph, const TextEncoder& encoder);

}  // namespace coldroute
