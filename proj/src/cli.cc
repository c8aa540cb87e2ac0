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

#include "morphtag/cli.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "morphtag/corpus.h"
#include "morphtag/crf.h"
#include "morphtag/errors.h"
#include "morphtag/eval.h"
#include "morphtag/hmm.h"

namespace morphtag::cli {

std::vector<double> ParseCoefficients(const std::string& text, std::size_t count) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad coefficient '" + item + "' in '" + text + "'");
    }
  }
  if (values.size() != count) {
    throw ConfigError("expected " + std::to_string(count) + " coefficients in '" + text + "'");
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("coefficients '" + text + "' must sum to 1");
  }
  return values;
}

namespace {

struct CrfOptions {
  int max_iter = 200;
  double sigma = 10.0;
  double tol = 1e-6;
  std::string templates = crf::FeatureTemplateSet::Default().ToString();
  std::string optimizer = "lbfgs";
  int threads = 1;

  void Register(CLI::App* app) {
    app->add_option("--max-iter", max_iter, "Maximum optimizer iterations")->capture_default_str();
    app->add_option("--sigma", sigma, "Gaussian prior standard deviation")->capture_default_str();
    app->add_option("--tol", tol, "Relative NLL change for convergence")->capture_default_str();
    app->add_option("--templates", templates, "Comma-separated feature templates")
        ->capture_default_str();
    app->add_option("--optimizer", optimizer, "lbfgs or gd")->capture_default_str();
    app->add_option("--threads", threads, "Worker threads for gradient accumulation")
        ->capture_default_str();
  }

  crf::CrfTrainConfig Config() const {
    crf::CrfTrainConfig config;
    config.max_iterations = max_iter;
    config.l2_sigma = sigma;
    config.convergence_tol = tol;
    config.num_threads = threads;
    if (optimizer == "lbfgs") {
      config.optimizer = crf::Optimizer::kLbfgs;
    } else if (optimizer == "gd") {
      config.optimizer = crf::Optimizer::kGradientDescent;
    } else {
      throw ConfigError("unknown optimizer '" + optimizer + "' (expected lbfgs|gd)");
    }
    config.Validate();
    return config;
  }
};

struct SmoothingOptions {
  double alpha = 0.9;
  std::string beta_bigram = "0.6,0.4";
  std::string beta_trigram = "0.5,0.3,0.2";

  void Register(CLI::App* app) {
    app->add_option("--alpha", alpha, "Emission interpolation coefficient")->capture_default_str();
    app->add_option("--beta-bigram", beta_bigram, "Bigram transition coefficients")
        ->capture_default_str();
    app->add_option("--beta-trigram", beta_trigram, "Trigram transition coefficients")
        ->capture_default_str();
  }

  hmm::SmoothingConfig Config() const {
    hmm::SmoothingConfig config;
    config.alpha = alpha;
    auto b2 = ParseCoefficients(beta_bigram, 2);
    auto b3 = ParseCoefficients(beta_trigram, 3);
    config.beta_bigram = {b2[0], b2[1]};
    config.beta_trigram = {b3[0], b3[1], b3[2]};
    config.Validate();
    return config;
  }
};

Corpus MaybeFilter(const Corpus& corpus, const std::string& punct) {
  if (punct == "none") return corpus;
  return ApplyPunctuationPolicy(corpus, ParsePunctuationPolicy(punct));
}

void CheckPunct(const std::string& punct) {
  if (punct != "none") ParsePunctuationPolicy(punct);
}

void WriteText(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path);
  if (!file) throw DataError("cannot write '" + path + "'");
  file << text;
}

std::string FormatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Morpheme tagging with a linear-chain CRF and PoS tagging with a trigram HMM"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // train-crf
  auto* train_crf = app.add_subcommand("train-crf", "Train a morpheme-tagging CRF");
  std::string crf_train_path, crf_out_path, crf_punct = "strip";
  CrfOptions crf_opts;
  train_crf->add_option("--train", crf_train_path, "Training corpus")->required();
  train_crf->add_option("--out", crf_out_path, "Output model path")->required();
  train_crf->add_option("--punct", crf_punct, "Punctuation filter: strip|terminal|none")
      ->capture_default_str();
  crf_opts.Register(train_crf);

  // train-hmm
  auto* train_hmm = app.add_subcommand("train-hmm", "Train a trigram HMM PoS tagger");
  std::string hmm_train_path, hmm_out_path, hmm_mode = "morphtag", hmm_scope = "sentence",
                                            hmm_punct = "none";
  SmoothingOptions hmm_smooth;
  train_hmm->add_option("--train", hmm_train_path, "Training corpus")->required();
  train_hmm->add_option("--out", hmm_out_path, "Output model path")->required();
  train_hmm->add_option("--mode", hmm_mode, "Emission mode: word|suffix|morphtag|lastk:K")
      ->capture_default_str();
  train_hmm->add_option("--scope", hmm_scope, "sentence|single")->capture_default_str();
  train_hmm->add_option("--punct", hmm_punct, "Punctuation filter: strip|terminal|none")
      ->capture_default_str();
  hmm_smooth.Register(train_hmm);

  // tag
  auto* tag = app.add_subcommand("tag", "Tag a corpus");
  std::string tag_input, tag_out = "-", tag_stage = "pipeline", tag_crf, tag_hmm,
                         tag_punct = "none";
  tag->add_option("--input", tag_input, "Input corpus")->required();
  tag->add_option("--out", tag_out, "Output corpus (- for stdout)")->capture_default_str();
  tag->add_option("--stage", tag_stage, "morph|pos|pipeline")->capture_default_str();
  tag->add_option("--crf", tag_crf, "CRF model (morph and pipeline stages)");
  tag->add_option("--hmm", tag_hmm, "HMM model (pos and pipeline stages)");
  tag->add_option("--punct", tag_punct, "Punctuation filter: strip|terminal|none")
      ->capture_default_str();

  // eval
  auto* evaluate = app.add_subcommand("eval", "Score predictions against gold annotations");
  std::string eval_gold, eval_pred, eval_task = "pos", eval_out;
  evaluate->add_option("--gold", eval_gold, "Gold corpus")->required();
  evaluate->add_option("--pred", eval_pred, "Predicted corpus")->required();
  evaluate->add_option("--task", eval_task, "morph|pos")->capture_default_str();
  evaluate->add_option("--out", eval_out, "CSV report path");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Run an experiment grid");
  std::string exp_corpus, exp_grid, exp_csv, exp_table, exp_morph_source;
  int exp_threads = 0;
  CrfOptions exp_crf;
  SmoothingOptions exp_smooth;
  experiment->add_option("--corpus", exp_corpus, "Gold-annotated corpus")->required();
  experiment->add_option("--grid", exp_grid, "Grid description (JSON)")->required();
  experiment->add_option("--out-csv", exp_csv, "CSV report (default stdout)");
  experiment->add_option("--out-table", exp_table, "Aligned-text report");
  experiment->add_option("--morph-source", exp_morph_source, "Override grid: gold|crf");
  experiment->add_option("--grid-threads", exp_threads, "Override grid thread count");
  exp_crf.Register(experiment);
  exp_smooth.Register(experiment);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (train_crf->parsed()) {
      crf::CrfTrainConfig config = crf_opts.Config();
      crf::FeatureTemplateSet templates = crf::FeatureTemplateSet::Parse(crf_opts.templates);
      CheckPunct(crf_punct);
      Corpus corpus = MaybeFilter(ReadCorpusFile(crf_train_path), crf_punct);
      crf::TrainingTrace trace;
      crf::CrfModel model = crf::TrainCrf(corpus, templates, config, &trace);
      crf::SaveCrfModelFile(model, crf_out_path);
      out << "train-crf: iterations=" << trace.iterations
          << " final_nll=" << FormatDouble(trace.nll.back())
          << " features=" << model.index.size() << " tags=" << model.morph_tags.size() << '\n';
      return kExitOk;
    }

    if (train_hmm->parsed()) {
      hmm::SmoothingConfig smoothing = hmm_smooth.Config();
      hmm::EmissionMode mode = hmm::EmissionMode::Parse(hmm_mode);
      hmm::HmmScope scope = hmm::ParseHmmScope(hmm_scope);
      CheckPunct(hmm_punct);
      Corpus corpus = MaybeFilter(ReadCorpusFile(hmm_train_path), hmm_punct);
      hmm::HmmModel model = hmm::TrainHmm(corpus, mode, smoothing, scope);
      hmm::SaveHmmModelFile(model, hmm_out_path);
      out << "train-hmm: tokens=" << model.counts().total_tokens
          << " vocabulary=" << model.counts().vocabulary_size << " tags=" << model.num_tags()
          << " mode=" << mode.Name() << " scope=" << hmm::ToString(scope) << '\n';
      return kExitOk;
    }

    if (tag->parsed()) {
      bool want_crf = tag_stage == "morph" || tag_stage == "pipeline";
      bool want_hmm = tag_stage == "pos" || tag_stage == "pipeline";
      if (!want_crf && !want_hmm) {
        throw ConfigError("unknown stage '" + tag_stage + "' (expected morph|pos|pipeline)");
      }
      if (want_crf && tag_crf.empty()) throw ConfigError("stage " + tag_stage + " needs --crf");
      if (want_hmm && tag_hmm.empty()) throw ConfigError("stage " + tag_stage + " needs --hmm");
      CheckPunct(tag_punct);
      Corpus corpus = MaybeFilter(ReadCorpusFile(tag_input), tag_punct);
      if (want_crf) corpus = crf::TagCorpusMorph(corpus, crf::LoadCrfModelFile(tag_crf));
      if (want_hmm) corpus = hmm::TagPos(corpus, hmm::LoadHmmModelFile(tag_hmm));
      WriteText(tag_out, SerializeCorpus(corpus), out);
      if (tag_out != "-") {
        out << "tag: stage=" << tag_stage << " tokens=" << corpus.TokenCount() << '\n';
      }
      return kExitOk;
    }

    if (evaluate->parsed()) {
      if (eval_task != "morph" && eval_task != "pos") {
        throw ConfigError("unknown task '" + eval_task + "' (expected morph|pos)");
      }
      Corpus gold = ReadCorpusFile(eval_gold);
      Corpus pred = ReadCorpusFile(eval_pred);
      eval::ScoreReport report =
          eval_task == "morph" ? eval::ScoreMorph(gold, pred) : eval::ScorePos(gold, pred);
      out << "eval: task=" << eval_task << " accuracy=" << FormatDouble(report.accuracy)
          << " precision=" << FormatDouble(report.precision)
          << " recall=" << FormatDouble(report.recall) << " f1=" << FormatDouble(report.f1)
          << " correct=" << report.correct << " total=" << report.total << '\n';
      if (!eval_out.empty()) {
        eval::ExperimentRow row;
        row.task = report.task;
        row.test_size = report.total;
        row.mode = row.scope = row.punct = "-";
        row.score = report;
        std::ostringstream csv;
        eval::WriteCsv({row}, csv);
        WriteText(eval_out, csv.str(), out);
      }
      return kExitOk;
    }

    if (experiment->parsed()) {
      eval::ExperimentSettings settings;
      settings.crf = exp_crf.Config();
      settings.templates = crf::FeatureTemplateSet::Parse(exp_crf.templates);
      settings.smoothing = exp_smooth.Config();
      eval::ExperimentGrid grid = eval::ReadGridFile(exp_grid);
      if (!exp_morph_source.empty()) grid.morph_source = eval::ParseMorphSource(exp_morph_source);
      if (exp_threads > 0) grid.num_threads = exp_threads;
      Corpus corpus = ReadCorpusFile(exp_corpus);
      auto rows = eval::RunExperiment(corpus, grid, settings);

      std::ostringstream csv;
      eval::WriteCsv(rows, csv, eval::SettingsComment(settings));
      if (exp_csv.empty()) {
        out << csv.str();
      } else {
        WriteText(exp_csv, csv.str(), out);
      }
      if (!exp_table.empty()) {
        WriteText(exp_table, eval::SettingsComment(settings) + '\n' + eval::FormatTable(rows),
                  out);
      }
      std::size_t failed = 0;
      for (const auto& row : rows) failed += row.score ? 0 : 1;
      (exp_csv.empty() ? err : out) << "experiment: rows=" << rows.size()
                                     << " errors=" << failed << '\n';
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace morphtag::cli
