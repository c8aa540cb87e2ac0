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

#include <charconv>

#include "morphtag/crf.h"
#include "morphtag/errors.h"
#include "morphtag/utf8.h"

namespace morphtag::crf {

std::string FeatureTemplate::Name() const {
  switch (kind) {
    case TemplateKind::kSurface: return "surf";
    case TemplateKind::kLowercase: return "lower";
    case TemplateKind::kPrefix: return "prefix:" + std::to_string(length);
    case TemplateKind::kSuffix: return "suffix:" + std::to_string(length);
    case TemplateKind::kPosition: return "position";
    case TemplateKind::kLengthBucket: return "length";
    case TemplateKind::kPrevMorpheme: return "prev";
    case TemplateKind::kNextMorpheme: return "next";
    case TemplateKind::kTagBigram: return "trans";
    case TemplateKind::kTagBigramSurface: return "trans+surf";
  }
  return "?";
}

FeatureTemplate FeatureTemplate::Parse(std::string_view name) {
  static const std::pair<std::string_view, TemplateKind> kSimple[] = {
      {"surf", TemplateKind::kSurface},
      {"lower", TemplateKind::kLowercase},
      {"position", TemplateKind::kPosition},
      {"length", TemplateKind::kLengthBucket},
      {"prev", TemplateKind::kPrevMorpheme},
      {"next", TemplateKind::kNextMorpheme},
      {"trans", TemplateKind::kTagBigram},
      {"trans+surf", TemplateKind::kTagBigramSurface},
  };
  for (const auto& [text, kind] : kSimple) {
    if (name == text) return {kind, 0};
  }
  for (auto [text, kind] : {std::pair{std::string_view("prefix:"), TemplateKind::kPrefix},
                            std::pair{std::string_view("suffix:"), TemplateKind::kSuffix}}) {
    if (name.substr(0, text.size()) != text) continue;
    std::string_view digits = name.substr(text.size());
    int k = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || k < 1) {
      throw ConfigError("bad length in feature template '" + std::string(name) + "'");
    }
    return {kind, k};
  }
  throw ConfigError("unknown feature template '" + std::string(name) + "'");
}

FeatureTemplateSet::FeatureTemplateSet(std::vector<FeatureTemplate> templates)
    : templates_(std::move(templates)) {
  bool has_state = false;
  bool has_transition = false;
  for (const auto& t : templates_) {
    (t.IsTransition() ? has_transition : has_state) = true;
  }
  if (!has_state || !has_transition) {
    throw ConfigError(
        "feature templates need at least one state and one transition template");
  }
}

FeatureTemplateSet FeatureTemplateSet::Default() {
  return Parse(
      "surf,lower,prefix:1,prefix:2,prefix:3,suffix:1,suffix:2,suffix:3,"
      "position,length,prev,next,trans,trans+surf");
}

FeatureTemplateSet FeatureTemplateSet::Parse(std::string_view names) {
  std::vector<FeatureTemplate> templates;
  std::size_t start = 0;
  while (start <= names.size()) {
    std::size_t comma = names.find(',', start);
    if (comma == std::string_view::npos) comma = names.size();
    std::string_view name = names.substr(start, comma - start);
    if (!name.empty()) templates.push_back(FeatureTemplate::Parse(name));
    start = comma + 1;
  }
  return FeatureTemplateSet(std::move(templates));
}

std::string FeatureTemplateSet::ToString() const {
  std::string out;
  for (const auto& t : templates_) {
    if (!out.empty()) out += ',';
    out += t.Name();
  }
  return out;
}

namespace {

std::string PositionClass(std::size_t position, std::size_t count) {
  if (count == 1) return "only";
  if (position == 0) return "first";
  if (position + 1 == count) return "last";
  return "interior";
}

std::string LengthBucket(std::string_view surface) {
  std::size_t n = utf8::Length(surface);
  return n >= 5 ? "5+" : std::to_string(n);
}

}  // namespace

std::vector<Observation> ExtractObservations(const FeatureTemplateSet& templates,
                                             const AnalyzedToken& word,
                                             std::size_t position,
                                             bool transition) {
  std::vector<Observation> out;
  if (transition && position == 0) return out;
  const auto& morphemes = word.morphemes;
  const std::string& surface = morphemes[position].surface;
  for (std::size_t t = 0; t < templates.size(); ++t) {
    const FeatureTemplate& tmpl = templates.templates()[t];
    if (tmpl.IsTransition() != transition) continue;
    int id = static_cast<int>(t);
    switch (tmpl.kind) {
      case TemplateKind::kSurface:
      case TemplateKind::kTagBigramSurface:
        out.push_back({id, surface});
        break;
      case TemplateKind::kLowercase:
        out.push_back({id, utf8::ToLower(surface)});
        break;
      case TemplateKind::kPrefix:
        if (utf8::Length(surface) >= static_cast<std::size_t>(tmpl.length)) {
          out.push_back({id, utf8::Prefix(surface, static_cast<std::size_t>(tmpl.length))});
        }
        break;
      case TemplateKind::kSuffix:
        if (utf8::Length(surface) >= static_cast<std::size_t>(tmpl.length)) {
          out.push_back({id, utf8::Suffix(surface, static_cast<std::size_t>(tmpl.length))});
        }
        break;
      case TemplateKind::kPosition:
        out.push_back({id, PositionClass(position, morphemes.size())});
        break;
      case TemplateKind::kLengthBucket:
        out.push_back({id, LengthBucket(surface)});
        break;
      case TemplateKind::kPrevMorpheme:
        out.push_back({id, position == 0 ? std::string("<w>")
                                         : morphemes[position - 1].surface});
        break;
      case TemplateKind::kNextMorpheme:
        out.push_back({id, position + 1 == morphemes.size()
                               ? std::string("</w>")
                               : morphemes[position + 1].surface});
        break;
      case TemplateKind::kTagBigram:
        out.push_back({id, std::string()});
        break;
    }
  }
  return out;
}

std::string FeatureIndex::ObservationKey(int template_id, std::string_view value) {
  std::string key = std::to_string(template_id);
  key += '\x1f';
  key += value;
  return key;
}

std::optional<int> FeatureIndex::FindObservation(int template_id,
                                                 std::string_view value) const {
  auto it = observation_ids_.find(ObservationKey(template_id, value));
  if (it == observation_ids_.end()) return std::nullopt;
  return it->second;
}

int FeatureIndex::AddObservation(int template_id, std::string_view value) {
  std::string key = ObservationKey(template_id, value);
  auto it = observation_ids_.find(key);
  if (it != observation_ids_.end()) return it->second;
  if (frozen_) throw ConfigError("feature index is frozen");
  int id = static_cast<int>(observations_.size());
  observations_.push_back({template_id, std::string(value)});
  features_.emplace_back();
  observation_ids_.emplace(std::move(key), id);
  return id;
}

std::optional<FeatureId> FeatureIndex::Find(int observation, TagId tag,
                                            TagId prev) const {
  if (observation < 0 || static_cast<std::size_t>(observation) >= features_.size()) {
    return std::nullopt;
  }
  for (const Entry& e : features_[static_cast<std::size_t>(observation)]) {
    if (e.tag == tag && e.prev == prev) return e.id;
  }
  return std::nullopt;
}

FeatureId FeatureIndex::Add(int observation, TagId tag, TagId prev) {
  if (auto id = Find(observation, tag, prev)) return *id;
  if (frozen_) throw ConfigError("feature index is frozen");
  if (observation < 0 || static_cast<std::size_t>(observation) >= features_.size()) {
    throw ConfigError("unknown observation id " + std::to_string(observation));
  }
  FeatureId id = static_cast<FeatureId>(keys_.size());
  features_[static_cast<std::size_t>(observation)].push_back({tag, prev, id});
  keys_.push_back({observation, tag, prev});
  return id;
}

std::vector<FeatureId> ExtractFeatures(const AnalyzedToken& word,
                                       std::size_t position, TagId tag,
                                       std::optional<TagId> prev_tag,
                                       const FeatureTemplateSet& templates,
                                       const FeatureIndex& index) {
  std::vector<FeatureId> ids;
  for (const auto& obs : ExtractObservations(templates, word, position, false)) {
    auto o = index.FindObservation(obs.template_id, obs.value);
    if (!o) continue;
    if (auto f = index.Find(*o, tag, kNoPrevTag)) ids.push_back(*f);
  }
  if (prev_tag) {
    for (const auto& obs : ExtractObservations(templates, word, position, true)) {
      auto o = index.FindObservation(obs.template_id, obs.value);
      if (!o) continue;
      if (auto f = index.Find(*o, tag, *prev_tag)) ids.push_back(*f);
    }
  }
  return ids;
}

}  // namespace morphtag::crf
