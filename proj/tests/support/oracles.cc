// Copyright 2026 The Morphtag Authors. All Rights Reserved.
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

#include "support/oracles.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace morphtag::testing {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string TagName(std::size_t i) { return "T" + std::to_string(i); }

}  // namespace

void ForEachSequence(std::size_t length, std::size_t num_tags,
                     const std::function<void(const std::vector<TagId>&)>& visit) {
  std::vector<TagId> seq(length, 0);
  while (true) {
    visit(seq);
    std::size_t i = length;
    while (i > 0) {
      --i;
      if (static_cast<std::size_t>(++seq[i]) < num_tags) break;
      seq[i] = 0;
      if (i == 0) return;
    }
    if (length == 0) return;
  }
}

double FeatureSumScore(const AnalyzedToken& word, std::span<const TagId> tags,
                       const crf::CrfModel& model) {
  double score = 0.0;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    std::optional<TagId> prev;
    if (i > 0) prev = tags[i - 1];
    for (crf::FeatureId f :
         crf::ExtractFeatures(word, i, tags[i], prev, model.templates, model.index)) {
      score += model.weights[static_cast<std::size_t>(f)];
    }
  }
  return score;
}

CrfBruteForce EnumerateCrf(const AnalyzedToken& word, const crf::CrfModel& model) {
  std::vector<double> scores;
  std::vector<std::vector<TagId>> sequences;
  ForEachSequence(word.morphemes.size(), model.morph_tags.size(),
                  [&](const std::vector<TagId>& seq) {
                    scores.push_back(FeatureSumScore(word, seq, model));
                    sequences.push_back(seq);
                  });
  CrfBruteForce result;
  result.max_score = kNegInf;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    if (scores[k] > result.max_score) {
      result.max_score = scores[k];
      result.argmax = sequences[k];
    }
  }
  double sum = 0.0;
  for (double s : scores) sum += std::exp(s - result.max_score);
  result.log_z = result.max_score + std::log(sum);
  for (double s : scores) result.total_probability += std::exp(s - result.log_z);
  return result;
}

RandomCrfInstance MakeRandomCrfInstance(std::mt19937_64& rng, std::size_t length,
                                        std::size_t num_tags, double weight_range) {
  static const char* kPieces[] = {"ev", "le", "la", "di", "m", "lar", "gel", "yle", "a"};
  std::uniform_int_distribution<std::size_t> piece(0, std::size(kPieces) - 1);
  std::uniform_real_distribution<double> weight(-weight_range, weight_range);
  std::bernoulli_distribution keep(0.85);

  RandomCrfInstance inst;
  for (std::size_t i = 0; i < length; ++i) {
    inst.word.morphemes.push_back({kPieces[piece(rng)], std::nullopt});
    inst.word.surface += inst.word.morphemes.back().surface;
  }
  for (std::size_t t = 0; t < num_tags; ++t) inst.model.morph_tags.Add(TagName(t));

  auto& index = inst.model.index;
  const auto& templates = inst.model.templates;
  for (std::size_t i = 0; i < length; ++i) {
    for (const auto& obs : crf::ExtractObservations(templates, inst.word, i, false)) {
      int o = index.AddObservation(obs.template_id, obs.value);
      for (std::size_t t = 0; t < num_tags; ++t) {
        if (keep(rng)) index.Add(o, static_cast<TagId>(t), crf::kNoPrevTag);
      }
    }
    for (const auto& obs : crf::ExtractObservations(templates, inst.word, i, true)) {
      int o = index.AddObservation(obs.template_id, obs.value);
      for (std::size_t p = 0; p < num_tags; ++p) {
        for (std::size_t t = 0; t < num_tags; ++t) {
          if (keep(rng)) index.Add(o, static_cast<TagId>(t), static_cast<TagId>(p));
        }
      }
    }
  }
  index.Freeze();
  inst.model.weights.resize(index.size());
  for (double& w : inst.model.weights) w = weight(rng);
  return inst;
}

Corpus MakeRandomTaggedCorpus(std::mt19937_64& rng, std::size_t words, std::size_t num_tags,
                              std::size_t max_morphemes) {
  static const char* kPieces[] = {"ev", "le", "la", "di", "m", "lar"};
  std::uniform_int_distribution<std::size_t> piece(0, std::size(kPieces) - 1);
  std::uniform_int_distribution<std::size_t> tag(0, num_tags - 1);
  std::uniform_int_distribution<std::size_t> len(1, max_morphemes);

  Corpus corpus;
  for (std::size_t t = 0; t < num_tags; ++t) corpus.morph_tags.Add(TagName(t));
  corpus.pos_tags.Add("Noun");
  Sentence sentence;
  for (std::size_t w = 0; w < words; ++w) {
    AnalyzedToken token;
    std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) {
      token.morphemes.push_back({kPieces[piece(rng)], static_cast<TagId>(tag(rng))});
      token.surface += token.morphemes.back().surface;
    }
    token.pos = 0;
    sentence.tokens.push_back(std::move(token));
  }
  corpus.sentences.push_back(std::move(sentence));
  return corpus;
}

double CentralDifference(const std::function<double(const std::vector<double>&)>& f,
                         std::vector<double> x, std::size_t i, double eps) {
  const double x0 = x[i];
  x[i] = x0 + eps;
  const double up = f(x);
  x[i] = x0 - eps;
  const double down = f(x);
  return (up - down) / (2.0 * eps);
}

double RelativeError(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

double ReferenceTransition(const hmm::CountsTable& counts, const hmm::SmoothingConfig& smoothing,
                           std::size_t prev2, std::size_t prev1, std::size_t t) {
  const std::size_t T = counts.num_tags;
  std::uint64_t h3 = 0, h2 = 0, h1 = 0;
  for (std::size_t u = 0; u < T; ++u) {
    h3 += counts.Trigram(prev2, prev1, u);
    h2 += counts.Bigram(prev1, u);
    h1 += counts.unigram[u];
  }
  double b3 = smoothing.beta_trigram[0];
  double b2 = smoothing.beta_trigram[1];
  double b1 = smoothing.beta_trigram[2];
  double p3 = h3 ? static_cast<double>(counts.Trigram(prev2, prev1, t)) / h3 : 0.0;
  double p2 = h2 ? static_cast<double>(counts.Bigram(prev1, t)) / h2 : 0.0;
  double p1 = h1 ? static_cast<double>(counts.unigram[t]) / h1 : 1.0 / T;
  if (h3 == 0) b2 += b3, b3 = 0.0;
  if (h2 == 0) b1 += b2, b2 = 0.0;
  return b3 * p3 + b2 * p2 + b1 * p1;
}

std::vector<TagId> EnumerateHmm(std::span<const AnalyzedToken> tokens,
                                const TagInventory& morph_tags, const hmm::HmmModel& model) {
  const std::size_t T = model.num_tags();
  std::vector<double> scores;
  std::vector<std::vector<TagId>> sequences;
  ForEachSequence(tokens.size(), T, [&](const std::vector<TagId>& seq) {
    double score = 0.0;
    std::size_t prev2 = model.bos(), prev1 = model.bos();
    for (std::size_t i = 0; i < seq.size(); ++i) {
      auto t = static_cast<std::size_t>(seq[i]);
      score += std::log(model.TransitionProb(prev2, prev1, t));
      score += std::log(model.EmissionProb(tokens[i], morph_tags, t));
      prev2 = prev1;
      prev1 = t;
    }
    scores.push_back(score);
    sequences.push_back(seq);
  });
  double best = *std::max_element(scores.begin(), scores.end());
  double threshold = std::isfinite(best) ? best - 1e-9 * std::max(1.0, std::abs(best)) : best;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    if (scores[k] >= threshold) return sequences[k];
  }
  return sequences.front();
}

RandomHmmInstance MakeRandomHmmInstance(std::mt19937_64& rng, std::size_t num_tags,
                                        std::size_t max_tokens) {
  const std::size_t T = num_tags;
  std::uniform_int_distribution<int> small(0, 4);
  std::bernoulli_distribution empty_history(0.3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  hmm::CountsTable counts(T);
  for (std::size_t a = 0; a <= T; ++a) {
    for (std::size_t b = 0; b <= T; ++b) {
      if (empty_history(rng)) continue;
      for (std::size_t t = 0; t < T; ++t) counts.Trigram(a, b, t) = small(rng);
    }
  }
  for (std::size_t b = 0; b <= T; ++b) {
    if (empty_history(rng)) continue;
    for (std::size_t t = 0; t < T; ++t) counts.Bigram(b, t) = small(rng);
  }
  for (std::size_t t = 0; t < T; ++t) counts.unigram[t] = small(rng) + (t == 0 ? 1 : 0);

  std::vector<std::string> words = {"ev", "gel", "bu", "ve", "kitap", "oku"};
  for (std::size_t w = 0; w < words.size(); ++w) {
    if (w < 4) {
      auto& row = counts.word_emissions[words[w]];
      row.resize(T);
      for (auto& c : row) c = small(rng);
    }
    counts.word_freq[words[w]] = 1 + small(rng);
  }
  for (const char* tag : {"M0", "M1", "M2"}) {
    auto& row = counts.tag_emissions[tag];
    row.resize(T);
    for (auto& c : row) c = small(rng);
  }
  counts.vocabulary_size = counts.word_freq.size();
  for (const auto& [w, f] : counts.word_freq) counts.total_tokens += f;

  hmm::SmoothingConfig smoothing;
  double r[3] = {unit(rng) + 0.01, unit(rng) + 0.01, unit(rng) + 0.01};
  double sum = r[0] + r[1] + r[2];
  smoothing.beta_trigram = {r[0] / sum, r[1] / sum, 1.0 - r[0] / sum - r[1] / sum};
  smoothing.alpha = std::bernoulli_distribution(0.1)(rng) ? 1.0 : 0.5 + 0.49 * unit(rng);

  hmm::EmissionMode mode = std::bernoulli_distribution(0.5)(rng)
                               ? hmm::EmissionMode::LastMorphTag()
                               : hmm::EmissionMode::Word();
  TagInventory pos_tags(TagKind::kPos);
  for (std::size_t t = 0; t < T; ++t) pos_tags.Add(TagName(t));

  RandomHmmInstance inst{hmm::HmmModel(std::move(counts), smoothing, mode,
                                       hmm::HmmScope::kPerSentence, pos_tags),
                         Corpus{}};
  for (const char* tag : {"M0", "M1", "M2", "M3"}) inst.test.morph_tags.Add(tag);
  std::uniform_int_distribution<std::size_t> length(1, max_tokens);
  std::uniform_int_distribution<std::size_t> word(0, words.size());  // last = unseen
  std::uniform_int_distribution<TagId> mtag(0, 3);
  Sentence sentence;
  std::size_t n = length(rng);
  for (std::size_t i = 0; i < n; ++i) {
    AnalyzedToken token;
    std::size_t w = word(rng);
    token.surface = w < words.size() ? words[w] : "yeni";
    token.morphemes.push_back({token.surface, 0});
    if (std::bernoulli_distribution(0.5)(rng)) {
      token.morphemes.push_back({"ler", mtag(rng)});
      token.surface += "ler";
    }
    sentence.tokens.push_back(std::move(token));
  }
  inst.test.sentences.push_back(std::move(sentence));
  return inst;
}

}  // namespace morphtag::testing
