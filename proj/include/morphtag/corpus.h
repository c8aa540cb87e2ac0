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

// Data model for segmented, tagged text and its tab-separated interchange
// format:
//
//   <surface> TAB <m1>/<TAG1>+<m2>/<TAG2>+... TAB <POS>
//
// one token per line, a blank line between sentences. A morph field of `_`
// means the word is unsegmented; a PoS field of `_` means untagged. A
// morpheme without `/TAG` is untagged. Lines starting with `#` that are not
// three-field token lines are comments.

#ifndef MORPHTAG_CORPUS_H_
#define MORPHTAG_CORPUS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace morphtag {

using TagId = int;

enum class TagKind { kMorph, kPos };

// Ordered set of tag strings with a dense id for each. Ids are assigned in
// insertion order starting at 0.
class TagInventory {
 public:
  explicit TagInventory(TagKind kind = TagKind::kPos) : kind_(kind) {}

  // The 13 coarse PoS tags used for Turkish.
  static TagInventory StandardPosTags();

  TagKind kind() const { return kind_; }
  std::size_t size() const { return tags_.size(); }
  bool empty() const { return tags_.empty(); }
  const std::vector<std::string>& tags() const { return tags_; }

  // Returns the id of `tag`, inserting it if new. Throws ConfigError for an
  // empty tag or when inserting into a frozen inventory.
  TagId Add(std::string_view tag);

  std::optional<TagId> Find(std::string_view tag) const;
  // Like Find but throws DataError for unknown tags.
  TagId Id(std::string_view tag) const;
  const std::string& Name(TagId id) const;
  bool Contains(TagId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < tags_.size();
  }

  void Freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  bool operator==(const TagInventory& other) const {
    return kind_ == other.kind_ && tags_ == other.tags_;
  }

 private:
  TagKind kind_;
  std::vector<std::string> tags_;
  std::unordered_map<std::string, TagId> ids_;
  bool frozen_ = false;
};

struct Morpheme {
  std::string surface;
  std::optional<TagId> tag;
};

struct AnalyzedToken {
  std::string surface;
  // First element is the stem. Never empty. The concatenated surfaces may
  // differ from `surface`.
  std::vector<Morpheme> morphemes;
  std::optional<TagId> pos;
  bool is_terminal_punct = false;
  // False when the morph field was `_`; `morphemes` then holds the whole
  // surface as a single pseudo-morpheme.
  bool segmented = true;
};

struct Sentence {
  std::vector<AnalyzedToken> tokens;
};

struct Corpus {
  std::vector<Sentence> sentences;
  TagInventory morph_tags{TagKind::kMorph};
  TagInventory pos_tags{TagKind::kPos};

  std::size_t TokenCount() const;
  bool empty() const { return sentences.empty(); }
};

// Exactly ".", "?" and "!".
bool IsTerminalPunctuation(std::string_view surface);

Corpus ParseCorpus(std::istream& in);
Corpus ParseCorpus(std::string_view text);
// Throws DataError naming the path when the file cannot be opened.
Corpus ReadCorpusFile(const std::filesystem::path& path);

void WriteCorpus(const Corpus& corpus, std::ostream& out);
std::string SerializeCorpus(const Corpus& corpus);
void WriteCorpusFile(const Corpus& corpus, const std::filesystem::path& path);

// Formats one token line (without the trailing newline).
std::string FormatToken(const AnalyzedToken& token, const Corpus& corpus);

enum class PunctuationPolicy { kStripAll, kKeepTerminalOnly };

std::string_view ToString(PunctuationPolicy policy);
// Accepts "strip" and "terminal".
PunctuationPolicy ParsePunctuationPolicy(std::string_view name);

// kStripAll drops every punctuation-only token; kKeepTerminalOnly keeps the
// terminal ones. Sentences left empty are dropped.
Corpus ApplyPunctuationPolicy(const Corpus& corpus, PunctuationPolicy policy);

struct TrainTestSplit {
  Corpus train;
  Corpus test;
};

// Shuffles sentence order with `seed`, then moves sentences to the train side
// until it first holds at least `train_tokens` tokens. Both sides keep the
// original relative sentence order and share the input inventories.
TrainTestSplit SplitTrainTest(const Corpus& corpus, std::size_t train_tokens,
                              std::uint64_t seed);

}  // namespace morphtag

#endif  // MORPHTAG_CORPUS_H_
