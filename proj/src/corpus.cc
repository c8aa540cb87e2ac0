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

#include "morphtag/corpus.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <random>
#include <sstream>

#include "morphtag/errors.h"
#include "morphtag/utf8.h"

namespace morphtag {

TagInventory TagInventory::StandardPosTags() {
  TagInventory inventory(TagKind::kPos);
  for (const char* tag : {"Adj", "Adv", "Conj", "Det", "Interj", "Noun", "Num",
                          "Postp", "Pron", "Punc", "Verb", "Ques", "Dup"}) {
    inventory.Add(tag);
  }
  return inventory;
}

TagId TagInventory::Add(std::string_view tag) {
  if (tag.empty()) throw ConfigError("empty tag string");
  auto it = ids_.find(std::string(tag));
  if (it != ids_.end()) return it->second;
  if (frozen_) {
    throw ConfigError("tag inventory is frozen; cannot add '" +
                      std::string(tag) + "'");
  }
  TagId id = static_cast<TagId>(tags_.size());
  tags_.emplace_back(tag);
  ids_.emplace(tags_.back(), id);
  return id;
}

std::optional<TagId> TagInventory::Find(std::string_view tag) const {
  auto it = ids_.find(std::string(tag));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

TagId TagInventory::Id(std::string_view tag) const {
  auto id = Find(tag);
  if (!id) throw DataError("unknown tag '" + std::string(tag) + "'");
  return *id;
}

const std::string& TagInventory::Name(TagId id) const {
  if (!Contains(id)) {
    throw DataError("tag id " + std::to_string(id) + " out of range");
  }
  return tags_[static_cast<std::size_t>(id)];
}

std::size_t Corpus::TokenCount() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.tokens.size();
  return n;
}

bool IsTerminalPunctuation(std::string_view surface) {
  return surface == "." || surface == "?" || surface == "!";
}

namespace {

std::vector<std::string_view> SplitOn(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

AnalyzedToken ParseTokenLine(std::size_t line_no,
                             const std::vector<std::string_view>& fields,
                             Corpus& corpus) {
  AnalyzedToken token;
  if (fields[0].empty()) throw ParseError(line_no, "empty surface");
  token.surface = std::string(fields[0]);
  token.is_terminal_punct = IsTerminalPunctuation(token.surface);

  std::string_view morph_field = fields[1];
  if (morph_field == "_") {
    token.segmented = false;
    token.morphemes.push_back({token.surface, std::nullopt});
  } else {
    for (std::string_view piece : SplitOn(morph_field, '+')) {
      Morpheme m;
      std::size_t slash = piece.rfind('/');
      std::string_view surface = piece;
      if (slash != std::string_view::npos) {
        surface = piece.substr(0, slash);
        std::string_view tag = piece.substr(slash + 1);
        if (tag.empty()) throw ParseError(line_no, "empty morpheme tag");
        m.tag = corpus.morph_tags.Add(tag);
      }
      if (surface.empty()) throw ParseError(line_no, "empty morpheme surface");
      m.surface = std::string(surface);
      token.morphemes.push_back(std::move(m));
    }
  }

  std::string_view pos_field = fields[2];
  if (pos_field.empty()) throw ParseError(line_no, "empty PoS field");
  if (pos_field != "_") token.pos = corpus.pos_tags.Add(pos_field);
  return token;
}

}  // namespace

Corpus ParseCorpus(std::istream& in) {
  Corpus corpus;
  Sentence current;
  std::string line;
  std::size_t line_no = 0;
  auto flush = [&] {
    if (!current.tokens.empty()) {
      corpus.sentences.push_back(std::move(current));
      current = Sentence{};
    }
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    auto fields = SplitOn(line, '\t');
    if (line.front() == '#' && fields.size() != 3) continue;
    if (fields.size() != 3) {
      throw ParseError(line_no, "expected 3 tab-separated fields, got " +
                                    std::to_string(fields.size()));
    }
    current.tokens.push_back(ParseTokenLine(line_no, fields, corpus));
  }
  flush();
  return corpus;
}

Corpus ParseCorpus(std::string_view text) {
  std::istringstream in{std::string(text)};
  return ParseCorpus(in);
}

Corpus ReadCorpusFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file '" + path.string() + "'");
  try {
    return ParseCorpus(in);
  } catch (const ParseError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string FormatToken(const AnalyzedToken& token, const Corpus& corpus) {
  std::string out = token.surface;
  out += '\t';
  if (!token.segmented) {
    out += '_';
  } else {
    for (std::size_t i = 0; i < token.morphemes.size(); ++i) {
      if (i > 0) out += '+';
      out += token.morphemes[i].surface;
      if (token.morphemes[i].tag) {
        out += '/';
        out += corpus.morph_tags.Name(*token.morphemes[i].tag);
      }
    }
  }
  out += '\t';
  out += token.pos ? corpus.pos_tags.Name(*token.pos) : std::string("_");
  return out;
}

void WriteCorpus(const Corpus& corpus, std::ostream& out) {
  for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
    if (s > 0) out << '\n';
    for (const auto& token : corpus.sentences[s].tokens) {
      out << FormatToken(token, corpus) << '\n';
    }
  }
}

std::string SerializeCorpus(const Corpus& corpus) {
  std::ostringstream out;
  WriteCorpus(corpus, out);
  return out.str();
}

void WriteCorpusFile(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write corpus file '" + path.string() + "'");
  WriteCorpus(corpus, out);
}

std::string_view ToString(PunctuationPolicy policy) {
  return policy == PunctuationPolicy::kStripAll ? "strip" : "terminal";
}

PunctuationPolicy ParsePunctuationPolicy(std::string_view name) {
  if (name == "strip") return PunctuationPolicy::kStripAll;
  if (name == "terminal") return PunctuationPolicy::kKeepTerminalOnly;
  throw ConfigError("unknown punctuation policy '" + std::string(name) +
                    "' (expected strip|terminal)");
}

Corpus ApplyPunctuationPolicy(const Corpus& corpus, PunctuationPolicy policy) {
  Corpus out;
  out.morph_tags = corpus.morph_tags;
  out.pos_tags = corpus.pos_tags;
  for (const auto& sentence : corpus.sentences) {
    Sentence kept;
    for (const auto& token : sentence.tokens) {
      bool punct = utf8::IsPunctuation(token.surface);
      bool keep = !punct || (policy == PunctuationPolicy::kKeepTerminalOnly &&
                             token.is_terminal_punct);
      if (keep) kept.tokens.push_back(token);
    }
    if (!kept.tokens.empty()) out.sentences.push_back(std::move(kept));
  }
  return out;
}

TrainTestSplit SplitTrainTest(const Corpus& corpus, std::size_t train_tokens,
                              std::uint64_t seed) {
  std::size_t total = corpus.TokenCount();
  if (train_tokens > total) {
    throw DataError("requested " + std::to_string(train_tokens) +
                    " training tokens but corpus has only " +
                    std::to_string(total));
  }
  std::vector<std::size_t> order(corpus.sentences.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Fisher-Yates with a fixed engine so splits match across standard
  // libraries (std::shuffle's draw sequence is implementation-defined).
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }

  std::vector<bool> in_train(corpus.sentences.size(), false);
  std::size_t taken = 0;
  for (std::size_t idx : order) {
    if (taken >= train_tokens) break;
    in_train[idx] = true;
    taken += corpus.sentences[idx].tokens.size();
  }

  TrainTestSplit split;
  split.train.morph_tags = split.test.morph_tags = corpus.morph_tags;
  split.train.pos_tags = split.test.pos_tags = corpus.pos_tags;
  for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
    (in_train[i] ? split.train : split.test)
        .sentences.push_back(corpus.sentences[i]);
  }
  return split;
}

}  // namespace morphtag
