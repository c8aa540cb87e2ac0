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

#include "morphtag/hmm.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "morphtag/errors.h"
#include "morphtag/utf8.h"

namespace morphtag::hmm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

int ParsePositiveInt(std::string_view digits, std::string_view context) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || value < 1) {
    throw ConfigError("bad number in '" + std::string(context) + "'");
  }
  return value;
}

}  // namespace

std::string EmissionMode::Name() const {
  switch (kind) {
    case EmissionKind::kWord: return "word";
    case EmissionKind::kLastSuffix: return "suffix";
    case EmissionKind::kLastMorphTag:
      return min_morphemes_for_tag == 2
                 ? "morphtag"
                 : "morphtag:" + std::to_string(min_morphemes_for_tag);
    case EmissionKind::kLastKLetters: return "lastk:" + std::to_string(k);
  }
  return "?";
}

EmissionMode EmissionMode::Parse(std::string_view name) {
  if (name == "word") return Word();
  if (name == "suffix") return LastSuffix();
  if (name == "morphtag") return LastMorphTag();
  if (name.starts_with("morphtag:")) {
    return LastMorphTag(ParsePositiveInt(name.substr(9), name));
  }
  if (name.starts_with("lastk:")) {
    return LastKLetters(ParsePositiveInt(name.substr(6), name));
  }
  throw ConfigError("unknown emission mode '" + std::string(name) +
                    "' (expected word|suffix|morphtag|lastk:K)");
}

void EmissionMode::Validate() const {
  if (kind == EmissionKind::kLastKLetters && k < 1) {
    throw ConfigError("lastk needs k >= 1");
  }
  if (kind == EmissionKind::kLastMorphTag && min_morphemes_for_tag < 1) {
    throw ConfigError("morphtag threshold must be >= 1");
  }
}

std::string_view ToString(HmmScope scope) {
  return scope == HmmScope::kPerSentence ? "sentence" : "single";
}

HmmScope ParseHmmScope(std::string_view name) {
  if (name == "sentence") return HmmScope::kPerSentence;
  if (name == "single") return HmmScope::kSingleChain;
  throw ConfigError("unknown HMM scope '" + std::string(name) +
                    "' (expected sentence|single)");
}

void SmoothingConfig::Validate() const {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(alpha)) throw ConfigError("alpha must lie in [0,1]");
  double sum2 = 0.0;
  for (double b : beta_bigram) {
    if (!in_unit(b)) throw ConfigError("bigram betas must lie in [0,1]");
    sum2 += b;
  }
  double sum3 = 0.0;
  for (double b : beta_trigram) {
    if (!in_unit(b)) throw ConfigError("trigram betas must lie in [0,1]");
    sum3 += b;
  }
  if (std::abs(sum2 - 1.0) > 1e-9) throw ConfigError("bigram betas must sum to 1");
  if (std::abs(sum3 - 1.0) > 1e-9) throw ConfigError("trigram betas must sum to 1");
  if (!(tag_emission_floor >= 0.0 && tag_emission_floor < 1.0)) {
    throw ConfigError("tag emission floor must lie in [0,1)");
  }
}

EmissionSymbol GetEmissionSymbol(const AnalyzedToken& token, const EmissionMode& mode,
                                 const TagInventory& morph_tags) {
  switch (mode.kind) {
    case EmissionKind::kWord:
      return {SymbolKind::kWord, token.surface};
    case EmissionKind::kLastSuffix:
      return {SymbolKind::kWord, token.morphemes.back().surface};
    case EmissionKind::kLastKLetters:
      return {SymbolKind::kWord, utf8::Suffix(token.surface, static_cast<std::size_t>(mode.k))};
    case EmissionKind::kLastMorphTag: {
      bool use_tag = token.segmented &&
                     token.morphemes.size() >= static_cast<std::size_t>(mode.min_morphemes_for_tag);
      if (!use_tag) return {SymbolKind::kWord, token.surface};
      const Morpheme& last = token.morphemes.back();
      if (!last.tag) {
        throw DataError("word '" + token.surface +
                        "' needs a tag on its last morpheme for morphtag emission");
      }
      return {SymbolKind::kMorphTag, morph_tags.Name(*last.tag)};
    }
  }
  throw ConfigError("unknown emission mode");
}

CountsTable::CountsTable(std::size_t tags)
    : num_tags(tags),
      trigram((tags + 1) * (tags + 1) * tags, 0),
      bigram((tags + 1) * tags, 0),
      unigram(tags, 0) {}

bool CountsTable::IsConsistent() const {
  const std::size_t T = num_tags;
  for (std::size_t b = 0; b <= T; ++b) {
    for (std::size_t t = 0; t < T; ++t) {
      std::uint64_t sum = 0;
      for (std::size_t a = 0; a <= T; ++a) sum += Trigram(a, b, t);
      if (sum != Bigram(b, t)) return false;
    }
  }
  for (std::size_t t = 0; t < T; ++t) {
    std::uint64_t sum = 0;
    for (std::size_t b = 0; b <= T; ++b) sum += Bigram(b, t);
    if (sum != unigram[t]) return false;
  }
  std::uint64_t freq = 0;
  for (const auto& [w, f] : word_freq) freq += f;
  return freq == total_tokens;
}

HmmModel::HmmModel(CountsTable counts, SmoothingConfig smoothing, EmissionMode mode,
                   HmmScope scope, TagInventory pos_tags)
    : counts_(std::move(counts)),
      smoothing_(smoothing),
      mode_(mode),
      scope_(scope),
      pos_tags_(std::move(pos_tags)) {
  smoothing_.Validate();
  mode_.Validate();
  const std::size_t T = counts_.num_tags;
  if (T == 0) throw DataError("HMM needs at least one PoS tag");
  if (pos_tags_.size() != T) throw DataError("PoS inventory size does not match counts");
  if (counts_.trigram.size() != (T + 1) * (T + 1) * T || counts_.bigram.size() != (T + 1) * T ||
      counts_.unigram.size() != T) {
    throw DataError("count table shapes do not match the tag count");
  }
  pos_tags_.Freeze();

  trigram_history_.assign((T + 1) * (T + 1), 0);
  bigram_history_.assign(T + 1, 0);
  for (std::size_t a = 0; a <= T; ++a) {
    for (std::size_t b = 0; b <= T; ++b) {
      for (std::size_t t = 0; t < T; ++t) {
        trigram_history_[a * (T + 1) + b] += counts_.Trigram(a, b, t);
      }
    }
  }
  for (std::size_t b = 0; b <= T; ++b) {
    for (std::size_t t = 0; t < T; ++t) bigram_history_[b] += counts_.Bigram(b, t);
  }
  for (std::uint64_t c : counts_.unigram) unigram_total_ += c;

  emission_total_.assign(T, 0);
  for (const auto* table : {&counts_.word_emissions, &counts_.tag_emissions}) {
    for (const auto& [symbol, per_tag] : *table) {
      if (per_tag.size() != T) throw DataError("emission count row has wrong length");
      for (std::size_t t = 0; t < T; ++t) emission_total_[t] += per_tag[t];
    }
  }

  log_transition_.resize((T + 1) * (T + 1) * T);
  for (std::size_t a = 0; a <= T; ++a) {
    for (std::size_t b = 0; b <= T; ++b) {
      for (std::size_t t = 0; t < T; ++t) {
        log_transition_[(a * (T + 1) + b) * T + t] = std::log(TransitionProb(a, b, t));
      }
    }
  }
}

double HmmModel::TransitionProb(std::size_t prev2, std::size_t prev1, std::size_t t) const {
  const std::size_t T = num_tags();
  double c3 = smoothing_.beta_trigram[0];
  double c2 = smoothing_.beta_trigram[1];
  double c1 = smoothing_.beta_trigram[2];
  std::uint64_t h3 = trigram_history_[prev2 * (T + 1) + prev1];
  std::uint64_t h2 = bigram_history_[prev1];
  if (h3 == 0) {
    c2 += c3;
    c3 = 0.0;
  }
  if (h2 == 0) {
    c1 += c2;
    c2 = 0.0;
  }
  double p3 = Relative(counts_.Trigram(prev2, prev1, t), h3);
  double p2 = Relative(counts_.Bigram(prev1, t), h2);
  double p1 = unigram_total_ == 0 ? 1.0 / static_cast<double>(T)
                                  : Relative(counts_.unigram[t], unigram_total_);
  return c3 * p3 + c2 * p2 + c1 * p1;
}

double HmmModel::BigramTransitionProb(std::size_t prev1, std::size_t t) const {
  const std::size_t T = num_tags();
  double c2 = smoothing_.beta_bigram[0];
  double c1 = smoothing_.beta_bigram[1];
  std::uint64_t h2 = bigram_history_[prev1];
  if (h2 == 0) {
    c1 += c2;
    c2 = 0.0;
  }
  double p2 = Relative(counts_.Bigram(prev1, t), h2);
  double p1 = unigram_total_ == 0 ? 1.0 / static_cast<double>(T)
                                  : Relative(counts_.unigram[t], unigram_total_);
  return c2 * p2 + c1 * p1;
}

double HmmModel::EmissionProb(const EmissionSymbol& symbol, std::string_view surface,
                              std::size_t t) const {
  const auto& table =
      symbol.kind == SymbolKind::kWord ? counts_.word_emissions : counts_.tag_emissions;
  auto it = table.find(symbol.text);
  double mle = it == table.end() ? 0.0 : Relative(it->second[t], emission_total_[t]);
  if (symbol.kind == SymbolKind::kMorphTag) {
    return std::max(mle, smoothing_.tag_emission_floor);
  }
  double backoff = 0.0;
  if (counts_.vocabulary_size > 0) {
    auto f = counts_.word_freq.find(std::string(surface));
    std::uint64_t freq = f == counts_.word_freq.end() ? 0 : f->second;
    backoff = static_cast<double>(std::max<std::uint64_t>(freq, 1)) /
              static_cast<double>(counts_.vocabulary_size);
  }
  const double alpha = smoothing_.alpha;
  return alpha * mle + (1.0 - alpha) * backoff;
}

double HmmModel::EmissionProb(const AnalyzedToken& token, const TagInventory& morph_tags,
                              std::size_t t) const {
  return EmissionProb(GetEmissionSymbol(token, mode_, morph_tags), token.surface, t);
}

HmmModel TrainHmm(const Corpus& corpus, const EmissionMode& mode,
                  const SmoothingConfig& smoothing, HmmScope scope) {
  mode.Validate();
  smoothing.Validate();
  if (corpus.TokenCount() == 0) throw DataError("cannot train an HMM on an empty corpus");
  if (corpus.pos_tags.empty()) throw DataError("corpus has no PoS tags");

  const std::size_t T = corpus.pos_tags.size();
  CountsTable counts(T);
  const std::size_t bos = counts.bos();
  std::size_t prev2 = bos, prev1 = bos;
  for (const auto& sentence : corpus.sentences) {
    if (scope == HmmScope::kPerSentence) prev2 = prev1 = bos;
    for (const auto& token : sentence.tokens) {
      if (!token.pos) throw DataError("token '" + token.surface + "' has no PoS tag");
      auto t = static_cast<std::size_t>(*token.pos);
      ++counts.Trigram(prev2, prev1, t);
      ++counts.Bigram(prev1, t);
      ++counts.unigram[t];

      EmissionSymbol symbol = GetEmissionSymbol(token, mode, corpus.morph_tags);
      auto& table = symbol.kind == SymbolKind::kWord ? counts.word_emissions
                                                     : counts.tag_emissions;
      auto& row = table[symbol.text];
      if (row.empty()) row.assign(T, 0);
      ++row[t];
      ++counts.word_freq[token.surface];
      ++counts.total_tokens;

      prev2 = prev1;
      prev1 = t;
    }
  }
  counts.vocabulary_size = counts.word_freq.size();
  return HmmModel(std::move(counts), smoothing, mode, scope, corpus.pos_tags);
}

std::vector<TagId> DecodeTrigram(const HmmModel& model, std::span<const double> log_emissions) {
  const std::size_t T = model.num_tags();
  const std::size_t S = T + 1;
  const std::size_t bos = model.bos();
  if (log_emissions.empty() || log_emissions.size() % T != 0) {
    throw DataError("cannot decode an empty sequence");
  }
  const std::size_t n = log_emissions.size() / T;
  auto emit = [&](std::size_t i, std::size_t t) { return log_emissions[i * T + t]; };

  // best_suffix[i][u][v]: best score of positions i+1..n-1 given tag u at
  // i-1 (or BOS) and tag v at i.
  std::vector<double> best_suffix(n * S * T, 0.0);
  auto suffix_at = [&](std::size_t i, std::size_t u, std::size_t v) -> double& {
    return best_suffix[(i * S + u) * T + v];
  };
  for (std::size_t i = n - 1; i-- > 0;) {
    for (std::size_t u = 0; u < S; ++u) {
      for (std::size_t v = 0; v < T; ++v) {
        double best = kNegInf;
        for (std::size_t w = 0; w < T; ++w) {
          double s = model.LogTransition(u, v, w) + emit(i + 1, w) + suffix_at(i + 1, v, w);
          if (s > best) best = s;
        }
        suffix_at(i, u, v) = best;
      }
    }
  }

  double total = kNegInf;
  for (std::size_t v = 0; v < T; ++v) {
    total = std::max(total, model.LogTransition(bos, bos, v) + emit(0, v) + suffix_at(0, bos, v));
  }
  const double threshold =
      std::isfinite(total) ? total - 1e-9 * std::max(1.0, std::abs(total)) : total;

  // Forward pass: smallest tag that still admits a completion reaching the
  // optimum.
  std::vector<TagId> path(n);
  double prefix = 0.0;
  std::size_t u2 = bos, u1 = bos;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t chosen = 0;
    double chosen_step = kNegInf;
    bool found = false;
    for (std::size_t v = 0; v < T; ++v) {
      double step = model.LogTransition(u2, u1, v) + emit(i, v);
      if (prefix + step + suffix_at(i, u1, v) >= threshold) {
        chosen = v;
        chosen_step = step;
        found = true;
        break;
      }
    }
    if (!found) {
      // Only reachable through rounding at the threshold; fall back to the
      // local best completion.
      double best = kNegInf;
      for (std::size_t v = 0; v < T; ++v) {
        double step = model.LogTransition(u2, u1, v) + emit(i, v);
        double s = step + suffix_at(i, u1, v);
        if (s > best) {
          best = s;
          chosen = v;
          chosen_step = step;
        }
      }
    }
    path[i] = static_cast<TagId>(chosen);
    prefix += chosen_step;
    u2 = u1;
    u1 = chosen;
  }
  return path;
}

std::vector<TagId> ViterbiTrigram(std::span<const AnalyzedToken> tokens,
                                  const TagInventory& morph_tags, const HmmModel& model) {
  if (tokens.empty()) throw DataError("cannot decode an empty sequence");
  const std::size_t T = model.num_tags();
  std::vector<double> log_emissions(tokens.size() * T);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    EmissionSymbol symbol = GetEmissionSymbol(tokens[i], model.emission_mode(), morph_tags);
    for (std::size_t t = 0; t < T; ++t) {
      log_emissions[i * T + t] = std::log(model.EmissionProb(symbol, tokens[i].surface, t));
    }
  }
  return DecodeTrigram(model, log_emissions);
}

Corpus TagPos(const Corpus& corpus, const HmmModel& model) {
  Corpus out;
  out.sentences = corpus.sentences;
  out.morph_tags = corpus.morph_tags;
  for (const auto& tag : corpus.pos_tags.tags()) out.pos_tags.Add(tag);
  std::vector<TagId> remap(model.num_tags());
  for (std::size_t t = 0; t < remap.size(); ++t) {
    remap[t] = out.pos_tags.Add(model.pos_tags().Name(static_cast<TagId>(t)));
  }

  if (model.scope() == HmmScope::kPerSentence) {
    for (auto& sentence : out.sentences) {
      auto path = ViterbiTrigram(sentence.tokens, corpus.morph_tags, model);
      for (std::size_t i = 0; i < path.size(); ++i) {
        sentence.tokens[i].pos = remap[static_cast<std::size_t>(path[i])];
      }
    }
    return out;
  }

  std::vector<AnalyzedToken> chain;
  chain.reserve(corpus.TokenCount());
  for (const auto& sentence : corpus.sentences) {
    chain.insert(chain.end(), sentence.tokens.begin(), sentence.tokens.end());
  }
  if (chain.empty()) return out;
  auto path = ViterbiTrigram(chain, corpus.morph_tags, model);
  std::size_t k = 0;
  for (auto& sentence : out.sentences) {
    for (auto& token : sentence.tokens) {
      token.pos = remap[static_cast<std::size_t>(path[k++])];
    }
  }
  return out;
}

namespace {

using nlohmann::json;

constexpr const char* kHmmFormat = "morphtag-hmm";

}  // namespace

void SaveHmmModel(const HmmModel& model, std::ostream& out) {
  const CountsTable& c = model.counts();
  const SmoothingConfig& s = model.smoothing();
  json j;
  j["format"] = kHmmFormat;
  j["version"] = 1;
  j["emission_mode"] = model.emission_mode().Name();
  j["scope"] = std::string(ToString(model.scope()));
  j["alpha"] = s.alpha;
  j["beta_bigram"] = s.beta_bigram;
  j["beta_trigram"] = s.beta_trigram;
  j["tag_emission_floor"] = s.tag_emission_floor;
  j["pos_tags"] = model.pos_tags().tags();
  j["trigram"] = c.trigram;
  j["bigram"] = c.bigram;
  j["unigram"] = c.unigram;
  j["word_emissions"] = c.word_emissions;
  j["tag_emissions"] = c.tag_emissions;
  j["word_freq"] = c.word_freq;
  j["vocabulary_size"] = c.vocabulary_size;
  j["total_tokens"] = c.total_tokens;
  out << j.dump() << '\n';
}

HmmModel LoadHmmModel(std::istream& in) {
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed HMM model: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != kHmmFormat) {
    throw DataError("not an HMM model file");
  }
  try {
    TagInventory tags(TagKind::kPos);
    for (const auto& t : j.at("pos_tags")) tags.Add(t.get<std::string>());
    CountsTable c(tags.size());
    c.trigram = j.at("trigram").get<std::vector<std::uint64_t>>();
    c.bigram = j.at("bigram").get<std::vector<std::uint64_t>>();
    c.unigram = j.at("unigram").get<std::vector<std::uint64_t>>();
    c.word_emissions =
        j.at("word_emissions").get<std::unordered_map<std::string, std::vector<std::uint64_t>>>();
    c.tag_emissions =
        j.at("tag_emissions").get<std::unordered_map<std::string, std::vector<std::uint64_t>>>();
    c.word_freq = j.at("word_freq").get<std::unordered_map<std::string, std::uint64_t>>();
    c.vocabulary_size = j.at("vocabulary_size").get<std::uint64_t>();
    c.total_tokens = j.at("total_tokens").get<std::uint64_t>();
    SmoothingConfig s;
    s.alpha = j.at("alpha").get<double>();
    s.beta_bigram = j.at("beta_bigram").get<std::array<double, 2>>();
    s.beta_trigram = j.at("beta_trigram").get<std::array<double, 3>>();
    s.tag_emission_floor = j.at("tag_emission_floor").get<double>();
    return HmmModel(std::move(c), s, EmissionMode::Parse(j.at("emission_mode").get<std::string>()),
                    ParseHmmScope(j.at("scope").get<std::string>()), std::move(tags));
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed HMM model: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("malformed HMM model: ") + e.what());
  }
}

void SaveHmmModelFile(const HmmModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file '" + path.string() + "'");
  SaveHmmModel(model, out);
}

HmmModel LoadHmmModelFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file '" + path.string() + "'");
  return LoadHmmModel(in);
}

}  // namespace morphtag::hmm
