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

#include "morphtag/crf.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <numeric>
#include <thread>

#include "json.hpp"
#include "morphtag/errors.h"

namespace morphtag::crf {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double LogSumExp(std::span<const double> values) {
  double m = kNegInf;
  for (double v : values) m = std::max(m, v);
  if (m == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - m);
  return m + std::log(sum);
}

// A word with its observations resolved against a frozen index.
struct EncodedWord {
  std::vector<std::vector<int>> state_obs;
  std::vector<std::vector<int>> trans_obs;
  std::vector<TagId> gold;  // empty when untagged
};

EncodedWord Encode(const AnalyzedToken& word, const FeatureTemplateSet& templates,
                   const FeatureIndex& index) {
  EncodedWord enc;
  std::size_t n = word.morphemes.size();
  enc.state_obs.resize(n);
  enc.trans_obs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (bool transition : {false, true}) {
      auto& dst = transition ? enc.trans_obs[i] : enc.state_obs[i];
      for (const auto& obs : ExtractObservations(templates, word, i, transition)) {
        if (auto o = index.FindObservation(obs.template_id, obs.value)) {
          dst.push_back(*o);
        }
      }
    }
  }
  return enc;
}

// Gold tags of `word` mapped from `word_tags` ids into `model_tags` ids.
std::vector<TagId> GoldTags(const AnalyzedToken& word, const TagInventory& word_tags,
                            const TagInventory& model_tags) {
  std::vector<TagId> gold;
  gold.reserve(word.morphemes.size());
  for (const auto& m : word.morphemes) {
    if (!m.tag) {
      throw DataError("word '" + word.surface + "' has an untagged morpheme '" +
                      m.surface + "'");
    }
    const std::string& name = word_tags.Name(*m.tag);
    auto id = model_tags.Find(name);
    if (!id) throw DataError("morpheme tag '" + name + "' unknown to the model");
    gold.push_back(*id);
  }
  return gold;
}

Lattice BuildLattice(const EncodedWord& word, const FeatureIndex& index,
                     std::span<const double> weights, std::size_t num_tags) {
  std::size_t n = word.state_obs.size();
  Lattice lattice(n, num_tags);
  std::vector<double> state(num_tags);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(state.begin(), state.end(), 0.0);
    for (int obs : word.state_obs[i]) {
      for (const auto& e : index.FeaturesOf(obs)) {
        state[static_cast<std::size_t>(e.tag)] += weights[static_cast<std::size_t>(e.id)];
      }
    }
    if (i == 0) {
      for (std::size_t y = 0; y < num_tags; ++y) lattice.at(0, num_tags, y) = state[y];
      continue;
    }
    for (std::size_t r = 0; r < num_tags; ++r) {
      for (std::size_t y = 0; y < num_tags; ++y) lattice.at(i, r, y) = state[y];
    }
    for (int obs : word.trans_obs[i]) {
      for (const auto& e : index.FeaturesOf(obs)) {
        lattice.at(i, static_cast<std::size_t>(e.prev), static_cast<std::size_t>(e.tag)) +=
            weights[static_cast<std::size_t>(e.id)];
      }
    }
  }
  return lattice;
}

// Adds the objective contribution of one word. Returns the word's NLL term.
double AccumulateWord(const EncodedWord& word, const FeatureIndex& index,
                      std::span<const double> weights, std::size_t num_tags,
                      std::span<double> gradient) {
  Lattice lattice = BuildLattice(word, index, weights, num_tags);
  Marginals marg = ForwardBackward(lattice);
  double gold_score = PathScore(lattice, word.gold);
  std::size_t n = word.gold.size();
  for (std::size_t i = 0; i < n; ++i) {
    TagId gy = word.gold[i];
    for (int obs : word.state_obs[i]) {
      for (const auto& e : index.FeaturesOf(obs)) {
        double g = marg.Unary(i, static_cast<std::size_t>(e.tag));
        if (e.tag == gy) g -= 1.0;
        gradient[static_cast<std::size_t>(e.id)] += g;
      }
    }
    if (i == 0) continue;
    TagId gp = word.gold[i - 1];
    for (int obs : word.trans_obs[i]) {
      for (const auto& e : index.FeaturesOf(obs)) {
        double g = marg.pairwise.at(i, static_cast<std::size_t>(e.prev),
                                    static_cast<std::size_t>(e.tag));
        if (e.tag == gy && e.prev == gp) g -= 1.0;
        gradient[static_cast<std::size_t>(e.id)] += g;
      }
    }
  }
  return marg.log_z - gold_score;
}

// Objective over encoded words. Words are split into `num_threads` contiguous
// chunks whose partial results are reduced in chunk order.
Objective Evaluate(const std::vector<EncodedWord>& words, const FeatureIndex& index,
                   std::span<const double> weights, std::size_t num_tags,
                   double sigma, int num_threads) {
  std::size_t chunks = static_cast<std::size_t>(std::max(1, num_threads));
  chunks = std::min(chunks, std::max<std::size_t>(1, words.size()));
  std::vector<Objective> partial(chunks);
  auto run = [&](std::size_t c) {
    std::size_t begin = words.size() * c / chunks;
    std::size_t end = words.size() * (c + 1) / chunks;
    partial[c].gradient.assign(weights.size(), 0.0);
    for (std::size_t w = begin; w < end; ++w) {
      partial[c].nll += AccumulateWord(words[w], index, weights, num_tags,
                                       partial[c].gradient);
    }
  };
  if (chunks == 1) {
    run(0);
  } else {
    std::vector<std::jthread> workers;
    for (std::size_t c = 0; c < chunks; ++c) workers.emplace_back(run, c);
  }

  Objective total = std::move(partial[0]);
  for (std::size_t c = 1; c < chunks; ++c) {
    total.nll += partial[c].nll;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      total.gradient[k] += partial[c].gradient[k];
    }
  }
  double inv_var = 1.0 / (sigma * sigma);
  for (std::size_t k = 0; k < weights.size(); ++k) {
    total.nll += 0.5 * weights[k] * weights[k] * inv_var;
    total.gradient[k] += weights[k] * inv_var;
  }
  return total;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

}  // namespace

double PathScore(const Lattice& lattice, std::span<const TagId> tags) {
  double score = 0.0;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    std::size_t row = i == 0 ? lattice.bos_row() : static_cast<std::size_t>(tags[i - 1]);
    score += lattice.at(i, row, static_cast<std::size_t>(tags[i]));
  }
  return score;
}

Lattice LogPotentials(const AnalyzedToken& word, const CrfModel& model) {
  if (word.morphemes.empty()) throw DataError("word has no morphemes");
  EncodedWord enc = Encode(word, model.templates, model.index);
  return BuildLattice(enc, model.index, model.weights, model.morph_tags.size());
}

Marginals ForwardBackward(const Lattice& lattice) {
  const std::size_t n = lattice.length();
  const std::size_t T = lattice.num_tags();
  const std::size_t bos = lattice.bos_row();
  std::vector<double> alpha(n * T), beta(n * T, 0.0), buf(T);

  for (std::size_t y = 0; y < T; ++y) alpha[y] = lattice.at(0, bos, y);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t y = 0; y < T; ++y) {
      for (std::size_t r = 0; r < T; ++r) {
        buf[r] = alpha[(i - 1) * T + r] + lattice.at(i, r, y);
      }
      alpha[i * T + y] = LogSumExp(buf);
    }
  }
  for (std::size_t i = n - 1; i-- > 0;) {
    for (std::size_t r = 0; r < T; ++r) {
      for (std::size_t y = 0; y < T; ++y) {
        buf[y] = lattice.at(i + 1, r, y) + beta[(i + 1) * T + y];
      }
      beta[i * T + r] = LogSumExp(buf);
    }
  }

  Marginals out;
  out.log_z = LogSumExp(std::span<const double>(alpha).subspan((n - 1) * T, T));
  out.unary.resize(n * T);
  out.pairwise = Lattice(n, T);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t y = 0; y < T; ++y) {
      out.unary[i * T + y] = std::exp(alpha[i * T + y] + beta[i * T + y] - out.log_z);
    }
  }
  for (std::size_t y = 0; y < T; ++y) out.pairwise.at(0, bos, y) = out.unary[y];
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t r = 0; r < T; ++r) {
      for (std::size_t y = 0; y < T; ++y) {
        out.pairwise.at(i, r, y) =
            std::exp(alpha[(i - 1) * T + r] + lattice.at(i, r, y) +
                     beta[i * T + y] - out.log_z);
      }
    }
  }
  return out;
}

std::vector<TagId> ViterbiDecode(const Lattice& lattice) {
  const std::size_t n = lattice.length();
  const std::size_t T = lattice.num_tags();
  std::vector<double> delta(n * T);
  std::vector<std::size_t> back(n * T, 0);
  for (std::size_t y = 0; y < T; ++y) delta[y] = lattice.at(0, lattice.bos_row(), y);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t y = 0; y < T; ++y) {
      double best = kNegInf;
      std::size_t arg = 0;
      for (std::size_t r = 0; r < T; ++r) {
        double s = delta[(i - 1) * T + r] + lattice.at(i, r, y);
        if (s > best) {
          best = s;
          arg = r;
        }
      }
      delta[i * T + y] = best;
      back[i * T + y] = arg;
    }
  }
  std::vector<TagId> path(n);
  std::size_t last = 0;
  for (std::size_t y = 1; y < T; ++y) {
    if (delta[(n - 1) * T + y] > delta[(n - 1) * T + last]) last = y;
  }
  path[n - 1] = static_cast<TagId>(last);
  for (std::size_t i = n - 1; i > 0; --i) {
    last = back[i * T + last];
    path[i - 1] = static_cast<TagId>(last);
  }
  return path;
}

std::vector<TagId> ViterbiDecodeWord(const AnalyzedToken& word, const CrfModel& model) {
  if (model.morph_tags.empty()) throw DataError("model has no morpheme tags");
  return ViterbiDecode(LogPotentials(word, model));
}

void CrfTrainConfig::Validate() const {
  if (!(l2_sigma > 0.0) || !std::isfinite(l2_sigma)) {
    throw ConfigError("l2 sigma must be positive");
  }
  if (!(convergence_tol > 0.0)) throw ConfigError("convergence tolerance must be positive");
  if (max_iterations < 0) throw ConfigError("max iterations must be non-negative");
  if (lbfgs_memory < 1) throw ConfigError("L-BFGS memory must be at least 1");
  if (!(initial_step > 0.0)) throw ConfigError("initial step must be positive");
  if (max_line_search < 1) throw ConfigError("line search limit must be at least 1");
  if (!(armijo_c1 > 0.0 && armijo_c1 < 1.0)) throw ConfigError("Armijo c1 must be in (0,1)");
  if (num_threads < 1) throw ConfigError("thread count must be at least 1");
}

Objective NllAndGradient(std::span<const AnalyzedToken> batch,
                         const TagInventory& batch_tags, const CrfModel& model,
                         const CrfTrainConfig& config) {
  config.Validate();
  std::vector<EncodedWord> words;
  words.reserve(batch.size());
  for (const auto& token : batch) {
    EncodedWord enc = Encode(token, model.templates, model.index);
    enc.gold = GoldTags(token, batch_tags, model.morph_tags);
    words.push_back(std::move(enc));
  }
  return Evaluate(words, model.index, model.weights, model.morph_tags.size(),
                  config.l2_sigma, config.num_threads);
}

CrfModel TrainCrf(const Corpus& corpus, const FeatureTemplateSet& templates,
                  const CrfTrainConfig& config, TrainingTrace* trace) {
  config.Validate();
  if (corpus.TokenCount() == 0) throw DataError("cannot train a CRF on an empty corpus");

  CrfModel model;
  model.templates = templates;
  // Inventory holds only tags observed in training, in first-seen order.
  for (const auto& sentence : corpus.sentences) {
    for (const auto& token : sentence.tokens) {
      for (const auto& m : token.morphemes) {
        if (!m.tag) {
          throw DataError("word '" + token.surface + "' has an untagged morpheme '" +
                          m.surface + "'");
        }
        model.morph_tags.Add(corpus.morph_tags.Name(*m.tag));
      }
    }
  }
  model.morph_tags.Freeze();

  for (const auto& sentence : corpus.sentences) {
    for (const auto& token : sentence.tokens) {
      std::vector<TagId> gold = GoldTags(token, corpus.morph_tags, model.morph_tags);
      for (std::size_t i = 0; i < gold.size(); ++i) {
        for (const auto& obs : ExtractObservations(templates, token, i, false)) {
          int o = model.index.AddObservation(obs.template_id, obs.value);
          model.index.Add(o, gold[i], kNoPrevTag);
        }
        for (const auto& obs : ExtractObservations(templates, token, i, true)) {
          int o = model.index.AddObservation(obs.template_id, obs.value);
          model.index.Add(o, gold[i], gold[i - 1]);
        }
      }
    }
  }
  model.index.Freeze();
  model.weights.assign(model.index.size(), 0.0);

  std::vector<EncodedWord> words;
  for (const auto& sentence : corpus.sentences) {
    for (const auto& token : sentence.tokens) {
      EncodedWord enc = Encode(token, templates, model.index);
      enc.gold = GoldTags(token, corpus.morph_tags, model.morph_tags);
      words.push_back(std::move(enc));
    }
  }

  const std::size_t T = model.morph_tags.size();
  auto evaluate = [&](std::span<const double> w) {
    return Evaluate(words, model.index, w, T, config.l2_sigma, config.num_threads);
  };

  TrainingTrace local;
  TrainingTrace& tr = trace ? *trace : local;
  tr = TrainingTrace{};

  std::vector<double>& x = model.weights;
  Objective current = evaluate(x);
  tr.nll.push_back(current.nll);

  struct Pair {
    std::vector<double> s, y;
    double rho;
  };
  std::deque<Pair> memory;
  double step_hint = config.initial_step;
  const std::size_t F = x.size();
  std::vector<double> direction(F), candidate(F);

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    // Search direction.
    if (config.optimizer == Optimizer::kLbfgs && !memory.empty()) {
      std::vector<double> q = current.gradient;
      std::vector<double> alphas(memory.size());
      for (std::size_t k = memory.size(); k-- > 0;) {
        alphas[k] = memory[k].rho * Dot(memory[k].s, q);
        for (std::size_t j = 0; j < F; ++j) q[j] -= alphas[k] * memory[k].y[j];
      }
      const Pair& last = memory.back();
      double gamma = Dot(last.s, last.y) / Dot(last.y, last.y);
      for (double& v : q) v *= gamma;
      for (std::size_t k = 0; k < memory.size(); ++k) {
        double b = memory[k].rho * Dot(memory[k].y, q);
        for (std::size_t j = 0; j < F; ++j) q[j] += memory[k].s[j] * (alphas[k] - b);
      }
      for (std::size_t j = 0; j < F; ++j) direction[j] = -q[j];
    } else {
      for (std::size_t j = 0; j < F; ++j) direction[j] = -current.gradient[j];
    }
    double slope = Dot(current.gradient, direction);
    if (!(slope < 0.0)) {
      memory.clear();
      for (std::size_t j = 0; j < F; ++j) direction[j] = -current.gradient[j];
      slope = Dot(current.gradient, direction);
    }
    if (slope == 0.0) {
      tr.converged = true;
      break;
    }

    double step;
    if (config.optimizer == Optimizer::kLbfgs && !memory.empty()) {
      step = 1.0;
    } else if (config.optimizer == Optimizer::kLbfgs) {
      step = config.initial_step / std::sqrt(-slope);
    } else {
      step = step_hint;
    }

    // Backtracking line search; only decreasing steps are accepted.
    bool accepted = false;
    Objective next;
    for (int ls = 0; ls < config.max_line_search; ++ls) {
      for (std::size_t j = 0; j < F; ++j) candidate[j] = x[j] + step * direction[j];
      next = evaluate(candidate);
      if (std::isfinite(next.nll) &&
          next.nll <= current.nll + config.armijo_c1 * step * slope &&
          next.nll <= current.nll) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      tr.converged = true;
      break;
    }

    if (config.optimizer == Optimizer::kLbfgs) {
      Pair p;
      p.s.resize(F);
      p.y.resize(F);
      for (std::size_t j = 0; j < F; ++j) {
        p.s[j] = candidate[j] - x[j];
        p.y[j] = next.gradient[j] - current.gradient[j];
      }
      double sy = Dot(p.s, p.y);
      if (sy > 1e-12) {
        p.rho = 1.0 / sy;
        memory.push_back(std::move(p));
        if (memory.size() > static_cast<std::size_t>(config.lbfgs_memory)) {
          memory.pop_front();
        }
      }
    } else {
      step_hint = step * 2.0;
    }

    double decrease = current.nll - next.nll;
    x.swap(candidate);
    current = std::move(next);
    tr.nll.push_back(current.nll);
    tr.iterations = iter + 1;
    if (decrease / std::max(std::abs(current.nll), 1e-12) < config.convergence_tol) {
      tr.converged = true;
      break;
    }
  }
  return model;
}

Corpus TagCorpusMorph(const Corpus& corpus, const CrfModel& model) {
  if (model.morph_tags.empty()) throw DataError("model has no morpheme tags");
  Corpus out;
  out.sentences = corpus.sentences;
  out.pos_tags = corpus.pos_tags;
  for (const auto& tag : corpus.morph_tags.tags()) out.morph_tags.Add(tag);
  std::vector<TagId> remap(model.morph_tags.size());
  for (std::size_t t = 0; t < remap.size(); ++t) {
    remap[t] = out.morph_tags.Add(model.morph_tags.Name(static_cast<TagId>(t)));
  }
  for (auto& sentence : out.sentences) {
    for (auto& token : sentence.tokens) {
      std::vector<TagId> path = ViterbiDecodeWord(token, model);
      for (std::size_t i = 0; i < path.size(); ++i) {
        token.morphemes[i].tag = remap[static_cast<std::size_t>(path[i])];
      }
    }
  }
  return out;
}

namespace {

using nlohmann::json;

constexpr const char* kCrfFormat = "morphtag-crf";

}  // namespace

void SaveCrfModel(const CrfModel& model, std::ostream& out) {
  json j;
  j["format"] = kCrfFormat;
  j["version"] = 1;
  j["templates"] = model.templates.ToString();
  j["tags"] = model.morph_tags.tags();
  json observations = json::array();
  for (std::size_t o = 0; o < model.index.num_observations(); ++o) {
    const auto& obs = model.index.observation(static_cast<int>(o));
    observations.push_back({obs.template_id, obs.value});
  }
  j["observations"] = std::move(observations);
  json features = json::array();
  for (std::size_t f = 0; f < model.index.size(); ++f) {
    const auto& key = model.index.key(static_cast<FeatureId>(f));
    features.push_back({key.observation, key.tag, key.prev});
  }
  j["features"] = std::move(features);
  j["weights"] = model.weights;
  out << j.dump() << '\n';
}

CrfModel LoadCrfModel(std::istream& in) {
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed CRF model: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != kCrfFormat) {
    throw DataError("not a CRF model file");
  }
  try {
    CrfModel model;
    model.templates = FeatureTemplateSet::Parse(j.at("templates").get<std::string>());
    for (const auto& tag : j.at("tags")) model.morph_tags.Add(tag.get<std::string>());
    model.morph_tags.Freeze();
    for (const auto& obs : j.at("observations")) {
      int template_id = obs.at(0).get<int>();
      if (template_id < 0 || static_cast<std::size_t>(template_id) >= model.templates.size()) {
        throw DataError("observation references unknown template");
      }
      model.index.AddObservation(template_id, obs.at(1).get<std::string>());
    }
    for (const auto& f : j.at("features")) {
      TagId tag = f.at(1).get<TagId>();
      TagId prev = f.at(2).get<TagId>();
      if (!model.morph_tags.Contains(tag) ||
          (prev != kNoPrevTag && !model.morph_tags.Contains(prev))) {
        throw DataError("feature references unknown tag");
      }
      model.index.Add(f.at(0).get<int>(), tag, prev);
    }
    model.index.Freeze();
    model.weights = j.at("weights").get<std::vector<double>>();
    if (model.weights.size() != model.index.size()) {
      throw DataError("weight vector length does not match feature count");
    }
    for (double w : model.weights) {
      if (!std::isfinite(w)) throw DataError("non-finite weight in CRF model");
    }
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed CRF model: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("malformed CRF model: ") + e.what());
  }
}

void SaveCrfModelFile(const CrfModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file '" + path.string() + "'");
  SaveCrfModel(model, out);
}

CrfModel LoadCrfModelFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file '" + path.string() + "'");
  return LoadCrfModel(in);
}

}  // namespace morphtag::crf
