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

#include "coldroute/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "coldroute/error.hpp"
#include "coldroute/rng.hpp"

namespace coldroute {

void SynthWorldConfig::validate() const {
  auto bad = [](const std::string& why) { throw Error(ErrorCode::InvalidSpec, "synth world: " + why); };
  if (num_domains < 1 || models_per_specialty < 1 || queries_per_domain < 1 || train_queries_per_domain < 1 ||
      benchmarks_per_domain < 1 || evidence_queries_per_benchmark < 0 || vocab_per_domain < 1 ||
      words_per_text < 1) {
    bad("all counts must be at least 1");
  }
  if (!(noise >= 0.0 && noise < 1.0)) bad("noise must lie in [0, 1)");
}

namespace {

const char* const kConsonants = "bdfgklmnprstvz";
const char* const kVowels = "aeiou";

std::string pseudo_word(Rng& rng) {
  std::string w;
  int syllables = 2 + static_cast<int>(rng.below(2));
  for (int i = 0; i < syllables; ++i) {
    w += kConsonants[rng.below(14)];
    w += kVowels[rng.below(5)];
  }
  return w;
}

std::string sentence(const std::vector<std::string>& vocab, int words, Rng& rng) {
  std::string s;
  for (int i = 0; i < words; ++i) {
    if (i) s += ' ';
    s += vocab[rng.below(vocab.size())];
  }
  return s;
}

std::string pad(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03d", i);
  return buf;
}

}  // namespace

SynthWorld synth_world(const SynthWorldConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  SynthWorld w;
  const int domains = cfg.num_domains + (cfg.with_new_model ? 1 : 0);

  // Disjoint vocabularies.
  std::set<std::string> used;
  std::vector<std::vector<std::string>> vocab(static_cast<std::size_t>(domains));
  for (auto& v : vocab) {
    while (static_cast<int>(v.size()) < cfg.vocab_per_domain) {
      std::string word = pseudo_word(rng);
      if (used.insert(word).second) v.push_back(word);
    }
  }

  std::vector<std::string> domain_ids;
  std::vector<std::vector<std::string>> bench_of(static_cast<std::size_t>(domains));
  for (int d = 0; d < domains; ++d) {
    std::string id = "dom-" + pad(d);
    domain_ids.push_back(id);
    w.cards.domains.push_back({id, sentence(vocab[d], cfg.words_per_text, rng)});
    for (int b = 0; b < cfg.benchmarks_per_domain; ++b) {
      std::string bid = "bench-" + pad(d) + "-" + pad(b);
      bench_of[d].push_back(bid);
      w.cards.benchmarks.push_back({bid, id, "benchmark " + sentence(vocab[d], cfg.words_per_text, rng)});
      for (int q = 0; q < cfg.evidence_queries_per_benchmark; ++q) {
        w.cards.queries.push_back(
            {"evq-" + pad(d) + "-" + pad(b) + "-" + pad(q), bid, sentence(vocab[d], cfg.words_per_text, rng)});
      }
    }
  }

  w.cards.families = {{"fam-000", "family of general purpose transformer language models"},
                      {"fam-001", "family of general purpose transformer language models"}};

  auto make_card = [&](const std::string& id, int specialty, int ordinal) {
    ModelCard card;
    card.id = id;
    card.family_id = w.cards.families[static_cast<std::size_t>(ordinal) % 2].id;
    card.description = "general purpose instruction tuned assistant model";
    for (int d = 0; d < domains; ++d) {
      for (const auto& b : bench_of[d]) {
        double s = 0.3 + (d == specialty ? 0.55 : 0.0) + 0.05 * rng.normal();
        card.scores[b] = std::clamp(s, 0.0, 1.0);
      }
    }
    w.specialty[id] = domain_ids[specialty];
    return card;
  };

  int ordinal = 0;
  for (int d = 0; d < cfg.num_domains; ++d) {
    for (int k = 0; k < cfg.models_per_specialty; ++k, ++ordinal) {
      std::string id = "llm-" + pad(ordinal);
      w.cards.models.push_back(make_card(id, d, ordinal));
      w.pool.push_back(id);
    }
  }
  if (cfg.with_new_model) w.new_model = make_card("llm-new", cfg.num_domains, ordinal);

  auto reward = [&](const std::string& model, int domain) {
    double r = w.specialty.at(model) == domain_ids[domain] ? 1.0 : 0.0;
    if (cfg.noise > 0.0 && rng.uniform() < cfg.noise) r = 1.0 - r;
    return r;
  };

  for (int d = 0; d < domains; ++d) {
    for (int i = 0; i < cfg.train_queries_per_domain; ++i) {
      std::string id = "trq-" + pad(d) + "-" + pad(i);
      w.train_queries.push_back({id, sentence(vocab[d], cfg.words_per_text, rng), domain_ids[d]});
      for (const auto& m : w.pool) w.train_interactions.push_back({id, m, reward(m, d)});
    }
  }
  for (int d = 0; d < domains; ++d) {
    for (int i = 0; i < cfg.queries_per_domain; ++i) {
      std::string id = "evl-" + pad(d) + "-" + pad(i);
      w.eval_queries.push_back({id, sentence(vocab[d], cfg.words_per_text, rng), domain_ids[d]});
      for (const auto& m : w.pool) w.rewards.set(id, m, reward(m, d));
      if (w.new_model) w.rewards.set(id, w.new_model->id, reward(w.new_model->id, d));
    }
  }
  return w;
}

}  // namespace coldroute
