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

// Linear-chain CRF over the morphemes of a single word.
//
// Each word is an independent chain m_0 .. m_{n-1}. Features are strictly
// word-internal: state features pair an observation extracted at position i
// with the tag at i; transition features pair an observation with the tag
// bigram (y_{i-1}, y_i). Position 0 has no transition features.

#ifndef MORPHTAG_CRF_H_
#define MORPHTAG_CRF_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "morphtag/corpus.h"

namespace morphtag::crf {

enum class TemplateKind {
  kSurface,           // "surf"        morpheme surface identity
  kLowercase,         // "lower"       lowercased surface
  kPrefix,            // "prefix:k"    first k characters
  kSuffix,            // "suffix:k"    last k characters
  kPosition,          // "position"    first / last / interior / only
  kLengthBucket,      // "length"      1, 2, 3, 4, 5+
  kPrevMorpheme,      // "prev"        previous morpheme in the word or <w>
  kNextMorpheme,      // "next"        next morpheme in the word or </w>
  kTagBigram,         // "trans"       tag bigram alone
  kTagBigramSurface,  // "trans+surf"  tag bigram conjoined with surface
};

struct FeatureTemplate {
  TemplateKind kind = TemplateKind::kSurface;
  int length = 0;  // prefix / suffix length, 0 otherwise

  bool IsTransition() const {
    return kind == TemplateKind::kTagBigram ||
           kind == TemplateKind::kTagBigramSurface;
  }
  std::string Name() const;
  // Throws ConfigError on an unknown name.
  static FeatureTemplate Parse(std::string_view name);

  bool operator==(const FeatureTemplate&) const = default;
};

class FeatureTemplateSet {
 public:
  // Throws ConfigError unless there is at least one state and one
  // transition template.
  explicit FeatureTemplateSet(std::vector<FeatureTemplate> templates);

  // surf, lower, prefix:1-3, suffix:1-3, position, length, prev, next,
  // trans, trans+surf.
  static FeatureTemplateSet Default();
  // Comma-separated template names, e.g. "surf,suffix:2,trans".
  static FeatureTemplateSet Parse(std::string_view names);

  const std::vector<FeatureTemplate>& templates() const { return templates_; }
  std::size_t size() const { return templates_.size(); }
  std::string ToString() const;

  bool operator==(const FeatureTemplateSet&) const = default;

 private:
  std::vector<FeatureTemplate> templates_;
};

// One extracted observation: which template fired and the string it produced.
struct Observation {
  int template_id = 0;
  std::string value;
};

// Observations fired at `position` by state templates (`transition` false)
// or by transition templates (`transition` true, empty at position 0).
std::vector<Observation> ExtractObservations(const FeatureTemplateSet& templates,
                                             const AnalyzedToken& word,
                                             std::size_t position,
                                             bool transition);

using FeatureId = int;
inline constexpr TagId kNoPrevTag = -1;

// Maps (template, observation string, tag[, previous tag]) to dense feature
// ids 0..F-1 in insertion order. After Freeze() lookups of unseen keys report
// absence and Add* throws.
class FeatureIndex {
 public:
  struct Entry {
    TagId tag;
    TagId prev;  // kNoPrevTag for state features
    FeatureId id;
  };
  struct Key {
    int observation;
    TagId tag;
    TagId prev;
  };

  std::optional<int> FindObservation(int template_id,
                                     std::string_view value) const;
  int AddObservation(int template_id, std::string_view value);

  std::optional<FeatureId> Find(int observation, TagId tag, TagId prev) const;
  FeatureId Add(int observation, TagId tag, TagId prev);

  std::span<const Entry> FeaturesOf(int observation) const {
    return features_[static_cast<std::size_t>(observation)];
  }

  std::size_t size() const { return keys_.size(); }
  std::size_t num_observations() const { return observations_.size(); }
  const Observation& observation(int id) const {
    return observations_[static_cast<std::size_t>(id)];
  }
  const Key& key(FeatureId id) const {
    return keys_[static_cast<std::size_t>(id)];
  }

  void Freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

 private:
  static std::string ObservationKey(int template_id, std::string_view value);

  std::unordered_map<std::string, int> observation_ids_;
  std::vector<Observation> observations_;
  std::vector<std::vector<Entry>> features_;
  std::vector<Key> keys_;
  bool frozen_ = false;
};

// Ids of every feature firing at (position, tag), plus transition features
// for (prev_tag, tag) when prev_tag is given. Unknown features are skipped.
// Tag ids are in the model's inventory.
std::vector<FeatureId> ExtractFeatures(const AnalyzedToken& word,
                                       std::size_t position, TagId tag,
                                       std::optional<TagId> prev_tag,
                                       const FeatureTemplateSet& templates,
                                       const FeatureIndex& index);

struct CrfModel {
  FeatureTemplateSet templates = FeatureTemplateSet::Default();
  FeatureIndex index;
  TagInventory morph_tags{TagKind::kMorph};
  std::vector<double> weights;
};

// Dense score lattice of shape length x (T+1) x T. Entry (i, r, y) scores
// tag y at position i after previous tag r; row T is the BOS row, used only
// at position 0. Unused entries are 0.
class Lattice {
 public:
  Lattice(std::size_t length, std::size_t num_tags)
      : length_(length),
        num_tags_(num_tags),
        data_(length * (num_tags + 1) * num_tags, 0.0) {}

  std::size_t length() const { return length_; }
  std::size_t num_tags() const { return num_tags_; }
  std::size_t bos_row() const { return num_tags_; }

  double& at(std::size_t i, std::size_t row, std::size_t tag) {
    return data_[(i * (num_tags_ + 1) + row) * num_tags_ + tag];
  }
  double at(std::size_t i, std::size_t row, std::size_t tag) const {
    return data_[(i * (num_tags_ + 1) + row) * num_tags_ + tag];
  }
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t length_;
  std::size_t num_tags_;
  std::vector<double> data_;
};

// Sum of lattice entries along `tags` (BOS row at position 0).
double PathScore(const Lattice& lattice, std::span<const TagId> tags);

// Log potentials of `word` under `model`.
Lattice LogPotentials(const AnalyzedToken& word, const CrfModel& model);

struct Marginals {
  double log_z = 0.0;
  // unary[i * T + y]
  std::vector<double> unary;
  // pairwise.at(i, r, y) = P(y_{i-1} = r, y_i = y); at i = 0 only the BOS
  // row is populated.
  Lattice pairwise{0, 0};

  double Unary(std::size_t i, std::size_t y) const {
    return unary[i * pairwise.num_tags() + y];
  }
};

// Log-space forward-backward.
Marginals ForwardBackward(const Lattice& lattice);

// Argmax path. Ties go to the lowest tag id at each backtrack step.
std::vector<TagId> ViterbiDecode(const Lattice& lattice);
std::vector<TagId> ViterbiDecodeWord(const AnalyzedToken& word,
                                     const CrfModel& model);

enum class Optimizer { kLbfgs, kGradientDescent };

struct CrfTrainConfig {
  double l2_sigma = 10.0;
  int max_iterations = 200;
  // Training stops once the relative NLL decrease of an accepted step falls
  // below this value.
  double convergence_tol = 1e-6;
  Optimizer optimizer = Optimizer::kLbfgs;
  int lbfgs_memory = 10;
  double initial_step = 1.0;
  int max_line_search = 40;
  double armijo_c1 = 1e-4;
  int num_threads = 1;

  // Throws ConfigError.
  void Validate() const;
};

struct Objective {
  double nll = 0.0;
  std::vector<double> gradient;
};

// Regularized negative conditional log-likelihood of the gold morpheme tags
// and its gradient. Tag ids in `batch` index `batch_tags`; they are mapped to
// the model inventory by name. Throws DataError for untagged morphemes or
// tags unknown to the model.
Objective NllAndGradient(std::span<const AnalyzedToken> batch,
                         const TagInventory& batch_tags, const CrfModel& model,
                         const CrfTrainConfig& config);

struct TrainingTrace {
  // NLL at initialization followed by the NLL after each accepted iteration.
  std::vector<double> nll;
  int iterations = 0;
  bool converged = false;
};

// Builds the feature index from the gold tags of `corpus` (tags observed in
// training only), freezes it, and minimizes the objective from zero weights.
// Throws DataError for an empty corpus or untagged morphemes.
CrfModel TrainCrf(const Corpus& corpus, const FeatureTemplateSet& templates,
                  const CrfTrainConfig& config, TrainingTrace* trace = nullptr);

// Returns a copy of `corpus` with every morpheme tagged by `model`. Words are
// decoded independently.
Corpus TagCorpusMorph(const Corpus& corpus, const CrfModel& model);

void SaveCrfModel(const CrfModel& model, std::ostream& out);
CrfModel LoadCrfModel(std::istream& in);
void SaveCrfModelFile(const CrfModel& model, const std::filesystem::path& path);
CrfModel LoadCrfModelFile(const std::filesystem::path& path);

}  // namespace morphtag::crf

#endif  // MORPHTAG_CRF_H_
