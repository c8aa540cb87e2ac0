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

// Scoring and the experiment grid runner.

#ifndef MORPHTAG_EVAL_H_
#define MORPHTAG_EVAL_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "morphtag/corpus.h"
#include "morphtag/crf.h"
#include "morphtag/hmm.h"

namespace morphtag::eval {

enum class Task { kMorphTag, kPosTag };

std::string_view ToString(Task task);

// Precision is correct / predicted items and recall is correct / gold items;
// with one prediction per gold item both equal accuracy, and so does F1.
struct ScoreReport {
  Task task = Task::kPosTag;
  std::size_t correct = 0;
  std::size_t total = 0;
  std::size_t predicted = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Per-morpheme exact match of tag names. The corpora must have identical
// sentences, token surfaces and segmentations; otherwise throws DataError
// naming the first divergent token. Also throws on an empty gold corpus.
ScoreReport ScoreMorph(const Corpus& gold, const Corpus& pred);

// Per-token exact match of PoS tag names. Same alignment rules.
ScoreReport ScorePos(const Corpus& gold, const Corpus& pred);

enum class MorphSource { kGold, kCrf };

std::string_view ToString(MorphSource source);
MorphSource ParseMorphSource(std::string_view name);

struct ExperimentGrid {
  std::vector<std::size_t> train_sizes;
  std::vector<hmm::EmissionMode> emission_modes;
  std::vector<hmm::HmmScope> scopes{hmm::HmmScope::kPerSentence};
  std::vector<PunctuationPolicy> punctuation_policies{PunctuationPolicy::kKeepTerminalOnly};
  std::vector<std::uint64_t> seeds;
  // Caps the test side at the first sentences reaching this many tokens.
  std::optional<std::size_t> test_size;
  // Where morphtag-mode runs get the test side's morpheme tags.
  MorphSource morph_source = MorphSource::kCrf;
  // Adds one morpheme-tagging row per trained CRF.
  bool score_morph = false;
  int num_threads = 1;

  // Throws ConfigError when a list is empty.
  void Validate() const;
  std::size_t CellCount() const;
};

// Grid description as JSON:
//   {"train_sizes": [500, 1000], "emission_modes": ["word", "morphtag"],
//    "scopes": ["sentence", "single"], "punctuation": ["terminal", "strip"],
//    "seeds": [1, 2, 3], "test_size": 1000, "morph_source": "crf",
//    "score_morph": false, "threads": 1}
// `scopes` and `punctuation` are optional. Throws ConfigError.
ExperimentGrid ParseGrid(std::string_view json_text);
ExperimentGrid ReadGridFile(const std::filesystem::path& path);

struct ExperimentRow {
  Task task = Task::kPosTag;
  std::size_t train_size = 0;    // requested
  std::size_t train_tokens = 0;  // actual
  std::size_t test_size = 0;     // actual test tokens
  std::string mode;
  std::string scope;
  std::string punct;
  std::uint64_t seed = 0;
  std::optional<ScoreReport> score;  // empty for failed cells
  std::string error;
};

struct ExperimentSettings {
  crf::CrfTrainConfig crf;
  crf::FeatureTemplateSet templates = crf::FeatureTemplateSet::Default();
  hmm::SmoothingConfig smoothing;
};

// Runs every grid cell: punctuation filter, seeded split, optional CRF
// training and test-side morpheme tagging, HMM training on the gold train
// side, decoding and scoring. Rows come back in grid order (punctuation,
// train size, seed, scope, mode); a failing cell yields an error row.
std::vector<ExperimentRow> RunExperiment(const Corpus& corpus, const ExperimentGrid& grid,
                                         const ExperimentSettings& settings);

// "# alpha=... beta_bigram=...,... beta_trigram=...,...,..."
std::string SettingsComment(const ExperimentSettings& settings);

// Fixed header: task,train_size,test_size,mode,scope,punct,seed,accuracy,
// precision,recall,f1. Metrics print with 6 decimals, "nan" for failed
// cells; each failure is also listed as a trailing "# error" comment.
void WriteCsv(const std::vector<ExperimentRow>& rows, std::ostream& out,
              const std::string& comment = "");
std::string FormatTable(const std::vector<ExperimentRow>& rows);

struct CellSummary {
  Task task = Task::kPosTag;
  std::size_t train_size = 0;
  std::string mode;
  std::string scope;
  std::string punct;
  std::size_t runs = 0;      // successful seeds
  double mean_accuracy = 0.0;
  double pooled_accuracy = 0.0;  // sum(correct) / sum(total)
};

// Groups rows over seeds, keeping first-appearance order.
std::vector<CellSummary> SummarizeOverSeeds(const std::vector<ExperimentRow>& rows);

}  // namespace morphtag::eval

#endif  // MORPHTAG_EVAL_H_
