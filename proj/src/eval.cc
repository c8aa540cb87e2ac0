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

#include "morphtag/eval.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

#include "json.hpp"
#include "morphtag/errors.h"

namespace morphtag::eval {

std::string_view ToString(Task task) {
  return task == Task::kMorphTag ? "morph" : "pos";
}

std::string_view ToString(MorphSource source) {
  return source == MorphSource::kGold ? "gold" : "crf";
}

MorphSource ParseMorphSource(std::string_view name) {
  if (name == "gold") return MorphSource::kGold;
  if (name == "crf") return MorphSource::kCrf;
  throw ConfigError("unknown morph source '" + std::string(name) + "' (expected gold|crf)");
}

namespace {

std::string Where(std::size_t s, std::size_t t) {
  return "sentence " + std::to_string(s + 1) + ", token " + std::to_string(t + 1);
}

// Walks aligned tokens, throwing on the first structural divergence.
template <typename Visit>
void ForEachAligned(const Corpus& gold, const Corpus& pred, bool check_segmentation,
                    Visit visit) {
  if (gold.sentences.size() != pred.sentences.size()) {
    throw DataError("alignment mismatch: gold has " + std::to_string(gold.sentences.size()) +
                    " sentences, prediction has " + std::to_string(pred.sentences.size()));
  }
  for (std::size_t s = 0; s < gold.sentences.size(); ++s) {
    const auto& gs = gold.sentences[s].tokens;
    const auto& ps = pred.sentences[s].tokens;
    for (std::size_t t = 0; t < std::max(gs.size(), ps.size()); ++t) {
      if (t >= gs.size() || t >= ps.size()) {
        throw DataError("alignment mismatch at " + Where(s, t) + ": token counts differ");
      }
      const auto& g = gs[t];
      const auto& p = ps[t];
      if (g.surface != p.surface) {
        throw DataError("alignment mismatch at " + Where(s, t) + ": '" + g.surface +
                        "' vs '" + p.surface + "'");
      }
      if (check_segmentation) {
        bool same = g.morphemes.size() == p.morphemes.size();
        for (std::size_t m = 0; same && m < g.morphemes.size(); ++m) {
          same = g.morphemes[m].surface == p.morphemes[m].surface;
        }
        if (!same) {
          throw DataError("alignment mismatch at " + Where(s, t) + " ('" + g.surface +
                          "'): segmentations differ");
        }
      }
      visit(g, p);
    }
  }
}

ScoreReport Finish(Task task, std::size_t correct, std::size_t total, std::size_t predicted) {
  if (total == 0) throw DataError("cannot score an empty gold corpus");
  ScoreReport r;
  r.task = task;
  r.correct = correct;
  r.total = total;
  r.predicted = predicted;
  r.accuracy = static_cast<double>(correct) / static_cast<double>(total);
  r.recall = r.accuracy;
  r.precision = predicted == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(predicted);
  r.f1 = r.precision + r.recall == 0.0
             ? 0.0
             : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  // Exact equality when every gold item has a prediction.
  if (predicted == total) r.precision = r.f1 = r.accuracy;
  return r;
}

}  // namespace

ScoreReport ScoreMorph(const Corpus& gold, const Corpus& pred) {
  std::size_t correct = 0, total = 0, predicted = 0;
  ForEachAligned(gold, pred, true, [&](const AnalyzedToken& g, const AnalyzedToken& p) {
    for (std::size_t m = 0; m < g.morphemes.size(); ++m) {
      const auto& gt = g.morphemes[m].tag;
      const auto& pt = p.morphemes[m].tag;
      if (!gt) {
        throw DataError("gold morpheme '" + g.morphemes[m].surface + "' in '" + g.surface +
                        "' is untagged");
      }
      ++total;
      if (!pt) continue;
      ++predicted;
      if (gold.morph_tags.Name(*gt) == pred.morph_tags.Name(*pt)) ++correct;
    }
  });
  return Finish(Task::kMorphTag, correct, total, predicted);
}

ScoreReport ScorePos(const Corpus& gold, const Corpus& pred) {
  std::size_t correct = 0, total = 0, predicted = 0;
  ForEachAligned(gold, pred, false, [&](const AnalyzedToken& g, const AnalyzedToken& p) {
    if (!g.pos) throw DataError("gold token '" + g.surface + "' has no PoS tag");
    ++total;
    if (!p.pos) return;
    ++predicted;
    if (gold.pos_tags.Name(*g.pos) == pred.pos_tags.Name(*p.pos)) ++correct;
  });
  return Finish(Task::kPosTag, correct, total, predicted);
}

void ExperimentGrid::Validate() const {
  if (train_sizes.empty()) throw ConfigError("grid needs at least one train size");
  if (emission_modes.empty()) throw ConfigError("grid needs at least one emission mode");
  if (scopes.empty()) throw ConfigError("grid needs at least one scope");
  if (punctuation_policies.empty()) throw ConfigError("grid needs at least one punctuation policy");
  if (seeds.empty()) throw ConfigError("grid needs at least one seed");
  if (num_threads < 1) throw ConfigError("grid thread count must be at least 1");
  for (const auto& mode : emission_modes) mode.Validate();
}

std::size_t ExperimentGrid::CellCount() const {
  return train_sizes.size() * emission_modes.size() * scopes.size() *
         punctuation_policies.size() * seeds.size();
}

ExperimentGrid ParseGrid(std::string_view json_text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed grid: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("grid must be a JSON object");
  try {
    ExperimentGrid grid;
    grid.train_sizes = j.at("train_sizes").get<std::vector<std::size_t>>();
    for (const auto& m : j.at("emission_modes")) {
      grid.emission_modes.push_back(hmm::EmissionMode::Parse(m.get<std::string>()));
    }
    if (j.contains("scopes")) {
      grid.scopes.clear();
      for (const auto& s : j.at("scopes")) grid.scopes.push_back(hmm::ParseHmmScope(s.get<std::string>()));
    }
    if (j.contains("punctuation")) {
      grid.punctuation_policies.clear();
      for (const auto& p : j.at("punctuation")) {
        grid.punctuation_policies.push_back(ParsePunctuationPolicy(p.get<std::string>()));
      }
    }
    if (!j.contains("seeds")) throw ConfigError("grid must list seeds");
    grid.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("test_size")) grid.test_size = j.at("test_size").get<std::size_t>();
    if (j.contains("morph_source")) {
      grid.morph_source = ParseMorphSource(j.at("morph_source").get<std::string>());
    }
    grid.score_morph = j.value("score_morph", false);
    grid.num_threads = j.value("threads", 1);
    grid.Validate();
    return grid;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed grid: ") + e.what());
  }
}

ExperimentGrid ReadGridFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open grid file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseGrid(buffer.str());
}

namespace {

Corpus CapTokens(const Corpus& corpus, std::optional<std::size_t> cap) {
  if (!cap) return corpus;
  Corpus out;
  out.morph_tags = corpus.morph_tags;
  out.pos_tags = corpus.pos_tags;
  std::size_t taken = 0;
  for (const auto& sentence : corpus.sentences) {
    if (taken >= *cap) break;
    out.sentences.push_back(sentence);
    taken += sentence.tokens.size();
  }
  return out;
}

struct SplitKey {
  std::size_t punct;
  std::size_t size;
  std::size_t seed;
  auto operator<=>(const SplitKey&) const = default;
};

// Everything that depends only on (punctuation, train size, seed).
struct PreparedSplit {
  Corpus train;
  Corpus test;
  std::optional<Corpus> crf_tagged_test;  // set when a CRF was trained
  std::optional<ScoreReport> morph_score;
  std::string error;
};

template <typename Job>
void RunParallel(std::size_t count, int num_threads, Job job) {
  std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(num_threads), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) job(i);
    });
  }
}

}  // namespace

std::vector<ExperimentRow> RunExperiment(const Corpus& corpus, const ExperimentGrid& grid,
                                         const ExperimentSettings& settings) {
  grid.Validate();
  settings.smoothing.Validate();
  settings.crf.Validate();

  bool any_morphtag = std::any_of(grid.emission_modes.begin(), grid.emission_modes.end(),
                                  [](const hmm::EmissionMode& m) {
                                    return m.kind == hmm::EmissionKind::kLastMorphTag;
                                  });
  bool need_crf = grid.morph_source == MorphSource::kCrf && (any_morphtag || grid.score_morph);

  std::vector<Corpus> filtered;
  for (PunctuationPolicy policy : grid.punctuation_policies) {
    filtered.push_back(ApplyPunctuationPolicy(corpus, policy));
  }

  std::vector<SplitKey> keys;
  for (std::size_t p = 0; p < grid.punctuation_policies.size(); ++p) {
    for (std::size_t z = 0; z < grid.train_sizes.size(); ++z) {
      for (std::size_t s = 0; s < grid.seeds.size(); ++s) keys.push_back({p, z, s});
    }
  }
  std::vector<PreparedSplit> prepared(keys.size());
  RunParallel(keys.size(), grid.num_threads, [&](std::size_t k) {
    const SplitKey& key = keys[k];
    PreparedSplit& out = prepared[k];
    try {
      auto split = SplitTrainTest(filtered[key.punct], grid.train_sizes[key.size],
                                  grid.seeds[key.seed]);
      out.train = std::move(split.train);
      out.test = CapTokens(split.test, grid.test_size);
      if (need_crf) {
        // Morpheme tagging is trained and scored without punctuation.
        Corpus crf_train = ApplyPunctuationPolicy(out.train, PunctuationPolicy::kStripAll);
        crf::CrfModel model = crf::TrainCrf(crf_train, settings.templates, settings.crf);
        out.crf_tagged_test = crf::TagCorpusMorph(out.test, model);
        if (grid.score_morph) {
          out.morph_score = ScoreMorph(
              ApplyPunctuationPolicy(out.test, PunctuationPolicy::kStripAll),
              ApplyPunctuationPolicy(*out.crf_tagged_test, PunctuationPolicy::kStripAll));
        }
      }
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  });

  struct Cell {
    std::size_t split;
    std::size_t scope;
    std::size_t mode;
  };
  std::vector<Cell> cells;
  std::vector<ExperimentRow> rows;
  std::vector<std::size_t> cell_row;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    const SplitKey& key = keys[k];
    auto base = [&] {
      ExperimentRow row;
      row.train_size = grid.train_sizes[key.size];
      row.train_tokens = prepared[k].train.TokenCount();
      row.test_size = prepared[k].test.TokenCount();
      row.punct = std::string(ToString(grid.punctuation_policies[key.punct]));
      row.seed = grid.seeds[key.seed];
      return row;
    };
    if (grid.score_morph) {
      ExperimentRow row = base();
      row.task = Task::kMorphTag;
      row.mode = grid.morph_source == MorphSource::kCrf ? "crf" : "gold";
      row.scope = "-";
      if (!prepared[k].error.empty()) {
        row.error = prepared[k].error;
      } else if (prepared[k].morph_score) {
        row.score = prepared[k].morph_score;
      } else {
        row.error = "morpheme scoring needs morph_source crf";
      }
      rows.push_back(std::move(row));
    }
    for (std::size_t sc = 0; sc < grid.scopes.size(); ++sc) {
      for (std::size_t m = 0; m < grid.emission_modes.size(); ++m) {
        ExperimentRow row = base();
        row.task = Task::kPosTag;
        row.mode = grid.emission_modes[m].Name();
        row.scope = std::string(hmm::ToString(grid.scopes[sc]));
        row.error = prepared[k].error;
        cells.push_back({k, sc, m});
        cell_row.push_back(rows.size());
        rows.push_back(std::move(row));
      }
    }
  }

  RunParallel(cells.size(), grid.num_threads, [&](std::size_t c) {
    const Cell& cell = cells[c];
    ExperimentRow& row = rows[cell_row[c]];
    if (!row.error.empty()) return;
    const PreparedSplit& split = prepared[cell.split];
    const hmm::EmissionMode& mode = grid.emission_modes[cell.mode];
    try {
      hmm::HmmModel model =
          hmm::TrainHmm(split.train, mode, settings.smoothing, grid.scopes[cell.scope]);
      const Corpus& input =
          mode.kind == hmm::EmissionKind::kLastMorphTag && split.crf_tagged_test
              ? *split.crf_tagged_test
              : split.test;
      Corpus predicted = hmm::TagPos(input, model);
      row.score = ScorePos(split.test, predicted);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  return rows;
}

std::string SettingsComment(const ExperimentSettings& settings) {
  const auto& s = settings.smoothing;
  std::ostringstream out;
  out << "# alpha=" << s.alpha << " beta_bigram=" << s.beta_bigram[0] << ','
      << s.beta_bigram[1] << " beta_trigram=" << s.beta_trigram[0] << ','
      << s.beta_trigram[1] << ',' << s.beta_trigram[2]
      << " crf_sigma=" << settings.crf.l2_sigma
      << " crf_max_iter=" << settings.crf.max_iterations
      << " templates=" << settings.templates.ToString();
  return out.str();
}

namespace {

std::string Metric(const std::optional<ScoreReport>& score, double ScoreReport::*field) {
  if (!score) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", (*score).*field);
  return buf;
}

}  // namespace

void WriteCsv(const std::vector<ExperimentRow>& rows, std::ostream& out,
              const std::string& comment) {
  if (!comment.empty()) out << comment << '\n';
  out << "task,train_size,test_size,mode,scope,punct,seed,accuracy,precision,recall,f1\n";
  for (const auto& row : rows) {
    out << ToString(row.task) << ',' << row.train_size << ',' << row.test_size << ','
        << row.mode << ',' << row.scope << ',' << row.punct << ',' << row.seed << ','
        << Metric(row.score, &ScoreReport::accuracy) << ','
        << Metric(row.score, &ScoreReport::precision) << ','
        << Metric(row.score, &ScoreReport::recall) << ','
        << Metric(row.score, &ScoreReport::f1) << '\n';
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].score) out << "# error row " << i + 1 << ": " << rows[i].error << '\n';
  }
}

std::string FormatTable(const std::vector<ExperimentRow>& rows) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"task", "train", "train_tok", "test_tok", "mode", "scope", "punct", "seed",
                   "accuracy", "f1", "note"});
  for (const auto& row : rows) {
    std::string acc = "-", f1 = "-";
    if (row.score) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * row.score->accuracy);
      acc = buf;
      std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * row.score->f1);
      f1 = buf;
    }
    cells.push_back({std::string(ToString(row.task)), std::to_string(row.train_size),
                     std::to_string(row.train_tokens), std::to_string(row.test_size), row.mode,
                     row.scope, row.punct, std::to_string(row.seed), acc, f1,
                     row.score ? "" : "error: " + row.error});
  }
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  }
  std::string out;
  for (const auto& line : cells) {
    std::string text;
    for (std::size_t c = 0; c < line.size(); ++c) {
      text += line[c];
      if (c + 1 < line.size()) text += std::string(width[c] - line[c].size() + 2, ' ');
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    out += text + '\n';
  }
  return out;
}

std::vector<CellSummary> SummarizeOverSeeds(const std::vector<ExperimentRow>& rows) {
  using Key = std::tuple<Task, std::size_t, std::string, std::string, std::string>;
  std::map<Key, std::size_t> slot;
  std::vector<CellSummary> out;
  std::vector<std::size_t> correct, total;
  for (const auto& row : rows) {
    Key key{row.task, row.train_size, row.mode, row.scope, row.punct};
    auto [it, inserted] = slot.emplace(key, out.size());
    if (inserted) {
      CellSummary s;
      s.task = row.task;
      s.train_size = row.train_size;
      s.mode = row.mode;
      s.scope = row.scope;
      s.punct = row.punct;
      out.push_back(s);
      correct.push_back(0);
      total.push_back(0);
    }
    if (!row.score) continue;
    std::size_t i = it->second;
    out[i].mean_accuracy += row.score->accuracy;
    ++out[i].runs;
    correct[i] += row.score->correct;
    total[i] += row.score->total;
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].runs == 0) {
      out[i].mean_accuracy = out[i].pooled_accuracy = std::nan("");
      continue;
    }
    out[i].mean_accuracy /= static_cast<double>(out[i].runs);
    out[i].pooled_accuracy = static_cast<double>(correct[i]) / static_cast<double>(total[i]);
  }
  return out;
}

}  // namespace morphtag::eval
