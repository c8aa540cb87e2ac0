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

// Supervised second-order HMM PoS tagger.
//
// Transitions are flat linear interpolations of trigram, bigram and unigram
// relative frequencies. A history never seen in training hands its
// coefficient down to the next lower order, so every conditional
// distribution sums to one.
//
// Each state emits one symbol per token, selected by the emission mode: the
// word, its last morpheme, its last k letters, or the tag of its last
// morpheme. Word symbols and morpheme-tag symbols live in separate tables.
// Word-symbol emissions are smoothed with
//
//   alpha * P(s|t) + (1 - alpha) * max(f(w), 1) / N
//
// where f(w) is the training frequency of the token's surface word and N the
// training vocabulary size. Tag-symbol emissions use the relative frequency,
// floored at `tag_emission_floor`.
//
// Every chain starts with two BOS states; there is no end state.

#ifndef MORPHTAG_HMM_H_
#define MORPHTAG_HMM_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "morphtag/corpus.h"

namespace morphtag::hmm {

enum class EmissionKind { kWord, kLastSuffix, kLastMorphTag, kLastKLetters };

struct EmissionMode {
  EmissionKind kind = EmissionKind::kWord;
  int k = 5;                       // kLastKLetters only
  int min_morphemes_for_tag = 2;   // kLastMorphTag only

  static EmissionMode Word() { return {EmissionKind::kWord}; }
  static EmissionMode LastSuffix() { return {EmissionKind::kLastSuffix}; }
  static EmissionMode LastMorphTag(int min_morphemes = 2) {
    return {EmissionKind::kLastMorphTag, 5, min_morphemes};
  }
  static EmissionMode LastKLetters(int k) { return {EmissionKind::kLastKLetters, k}; }

  // "word", "suffix", "morphtag" (or "morphtag:N" for a non-default
  // threshold), "lastk:K".
  std::string Name() const;
  static EmissionMode Parse(std::string_view name);
  void Validate() const;

  bool operator==(const EmissionMode& other) const {
    return Name() == other.Name();
  }
};

enum class HmmScope { kPerSentence, kSingleChain };

std::string_view ToString(HmmScope scope);
// Accepts "sentence" and "single".
HmmScope ParseHmmScope(std::string_view name);

struct SmoothingConfig {
  double alpha = 0.9;
  std::array<double, 2> beta_bigram{0.6, 0.4};
  std::array<double, 3> beta_trigram{0.5, 0.3, 0.2};
  double tag_emission_floor = 1e-9;

  // Coefficients must lie in [0,1] and each beta tuple must sum to 1 within
  // 1e-9. Throws ConfigError.
  void Validate() const;
};

enum class SymbolKind { kWord, kMorphTag };

struct EmissionSymbol {
  SymbolKind kind = SymbolKind::kWord;
  std::string text;

  bool operator==(const EmissionSymbol&) const = default;
};

// Throws DataError when kLastMorphTag needs a tag the token lacks.
EmissionSymbol GetEmissionSymbol(const AnalyzedToken& token, const EmissionMode& mode,
                                 const TagInventory& morph_tags);

// Raw training counts. Tag indices run over [0, T); index T is BOS and only
// appears in history positions.
struct CountsTable {
  std::size_t num_tags = 0;
  std::vector<std::uint64_t> trigram;  // (T+1) x (T+1) x T
  std::vector<std::uint64_t> bigram;   // (T+1) x T
  std::vector<std::uint64_t> unigram;  // T
  std::unordered_map<std::string, std::vector<std::uint64_t>> word_emissions;
  std::unordered_map<std::string, std::vector<std::uint64_t>> tag_emissions;
  std::unordered_map<std::string, std::uint64_t> word_freq;
  std::uint64_t vocabulary_size = 0;
  std::uint64_t total_tokens = 0;

  explicit CountsTable(std::size_t tags = 0);

  std::size_t bos() const { return num_tags; }
  std::uint64_t& Trigram(std::size_t a, std::size_t b, std::size_t t) {
    return trigram[(a * (num_tags + 1) + b) * num_tags + t];
  }
  std::uint64_t Trigram(std::size_t a, std::size_t b, std::size_t t) const {
    return trigram[(a * (num_tags + 1) + b) * num_tags + t];
  }
  std::uint64_t& Bigram(std::size_t b, std::size_t t) { return bigram[b * num_tags + t]; }
  std::uint64_t Bigram(std::size_t b, std::size_t t) const { return bigram[b * num_tags + t]; }

  // Checks that trigram counts sum to bigram counts over the oldest history
  // tag, bigram counts to unigram counts, and word frequencies to the token
  // total.
  bool IsConsistent() const;
};

class HmmModel {
 public:
  // Throws ConfigError for invalid smoothing or mode, DataError when the
  // count shapes disagree with the inventory.
  HmmModel(CountsTable counts, SmoothingConfig smoothing, EmissionMode mode,
           HmmScope scope, TagInventory pos_tags);

  const CountsTable& counts() const { return counts_; }
  const SmoothingConfig& smoothing() const { return smoothing_; }
  const EmissionMode& emission_mode() const { return mode_; }
  HmmScope scope() const { return scope_; }
  const TagInventory& pos_tags() const { return pos_tags_; }
  std::size_t num_tags() const { return counts_.num_tags; }
  std::size_t bos() const { return counts_.num_tags; }

  // P(t | prev2, prev1); history indices may be bos().
  double TransitionProb(std::size_t prev2, std::size_t prev1, std::size_t t) const;
  // Bigram interpolation with beta_bigram.
  double BigramTransitionProb(std::size_t prev1, std::size_t t) const;

  double EmissionProb(const EmissionSymbol& symbol, std::string_view surface,
                      std::size_t t) const;
  double EmissionProb(const AnalyzedToken& token, const TagInventory& morph_tags,
                      std::size_t t) const;

  // log P(t | prev2, prev1), precomputed.
  double LogTransition(std::size_t prev2, std::size_t prev1, std::size_t t) const {
    return log_transition_[(prev2 * (num_tags() + 1) + prev1) * num_tags() + t];
  }

 private:
  double Relative(std::uint64_t count, std::uint64_t total) const {
    return total == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(total);
  }

  CountsTable counts_;
  SmoothingConfig smoothing_;
  EmissionMode mode_;
  HmmScope scope_;
  TagInventory pos_tags_;

  std::vector<std::uint64_t> trigram_history_;  // (T+1) x (T+1)
  std::vector<std::uint64_t> bigram_history_;   // T+1
  std::uint64_t unigram_total_ = 0;
  std::vector<std::uint64_t> emission_total_;  // per tag, both symbol kinds
  std::vector<double> log_transition_;
};

// Counts transitions and emissions in one pass. kPerSentence pads each
// sentence with two BOS states; kSingleChain pads only the corpus start.
// Throws DataError for an empty corpus or a token without a PoS tag.
HmmModel TrainHmm(const Corpus& corpus, const EmissionMode& mode,
                  const SmoothingConfig& smoothing, HmmScope scope);

// Exact argmax over tag sequences given per-position emission log
// probabilities (`log_emissions[i * T + t]`). Ties within a relative
// tolerance of 1e-9 resolve to the lexicographically smallest tag sequence.
std::vector<TagId> DecodeTrigram(const HmmModel& model,
                                 std::span<const double> log_emissions);

// Decodes one chain of tokens. Returned ids index model.pos_tags(). Throws
// DataError for an empty sequence or missing annotations.
std::vector<TagId> ViterbiTrigram(std::span<const AnalyzedToken> tokens,
                                  const TagInventory& morph_tags,
                                  const HmmModel& model);

// Assigns a PoS tag to every token: per sentence for kPerSentence, one chain
// over the whole corpus for kSingleChain.
Corpus TagPos(const Corpus& corpus, const HmmModel& model);

void SaveHmmModel(const HmmModel& model, std::ostream& out);
HmmModel LoadHmmModel(std::istream& in);
void SaveHmmModelFile(const HmmModel& model, const std::filesystem::path& path);
HmmModel LoadHmmModelFile(const std::filesystem::path& path);

}  // namespace morphtag::hmm

#endif  // MORPHTAG_HMM_H_
