// Copyright 2026 The a2w Authors.
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

// Command-line driver; one subcommand per pipeline stage.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "a2w/checkpoint.hpp"
#include "a2w/errors.hpp"
#include "a2w/experiment.hpp"
#include "a2w/gradcheck.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using a2w::Corpus;
using Json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kFailed = 1, kConfig = 2, kData = 3, kDivergence = 4 };

// A corpus argument may name the manifest itself or its directory.
Corpus load_corpus(const fs::path& path) {
  return a2w::read_corpus(fs::is_directory(path) ? path / "manifest.jsonl"
                                                 : path);
}

std::string read_all(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw a2w::DataError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void log(const std::string& line) { std::cerr << line << std::endl; }

void bind_recipe(CLI::App* cmd, a2w::AcousticRecipe& r) {
  auto& m = r.model;
  auto& t = r.train;
  cmd->add_option("--encoder-layers", m.encoder_layers, "BLSTM layers")
      ->capture_default_str();
  cmd->add_option("--encoder-hidden", m.encoder_hidden,
                  "hidden units per direction")
      ->capture_default_str();
  cmd->add_option("--subsample", m.subsample_layers,
                  "1-based layers that halve the frame rate")
      ->delimiter(',')
      ->capture_default_str();
  cmd->add_option("--char-tap", m.char_tap_layer,
                  "layer whose output feeds the character decoder")
      ->capture_default_str();
  cmd->add_option("--decoder-hidden", m.decoder_hidden)->capture_default_str();
  cmd->add_option("--attention-dim", m.attention_dim)->capture_default_str();
  cmd->add_option("--word-embed", m.word_embed)->capture_default_str();
  cmd->add_option("--char-embed", m.char_embed)->capture_default_str();
  cmd->add_option("--conv-channels", m.conv_channels)->capture_default_str();
  cmd->add_option("--conv-width", m.conv_width)->capture_default_str();
  cmd->add_option("--dropout", m.dropout)->capture_default_str();
  cmd->add_option("--init-range", m.init_range)->capture_default_str();
  cmd->add_option("--forget-bias", m.forget_bias)->capture_default_str();
  cmd->add_option("--adam-lr", t.adam_lr)->capture_default_str();
  cmd->add_option("--sgd-lr", t.sgd_lr)->capture_default_str();
  cmd->add_option("--clip", t.clip_norm, "global gradient norm limit")
      ->capture_default_str();
  cmd->add_option("--batch", t.batch_size)->capture_default_str();
  cmd->add_option("--sampling", t.sampling_prob,
                  "scheduled sampling probability")
      ->capture_default_str();
  cmd->add_option("--smoothing", t.smoothing, "label smoothing")
      ->capture_default_str();
  cmd->add_option("--max-epochs", t.max_epochs)->capture_default_str();
  cmd->add_option("--patience", t.patience)->capture_default_str();
}

void bind_lm(CLI::App* cmd, a2w::LanguageRecipe& r) {
  cmd->add_option("--hidden", r.lm.hidden, "LSTM and embedding size")
      ->capture_default_str();
  cmd->add_option("--lm-dropout", r.lm.dropout)->capture_default_str();
  cmd->add_option("--lm-init-range", r.lm.init_range)->capture_default_str();
  cmd->add_option("--bptt", r.train.bptt)->capture_default_str();
  cmd->add_option("--epochs", r.train.max_epochs)->capture_default_str();
  cmd->add_option("--lr", r.train.learning_rate)->capture_default_str();
  cmd->add_option("--lm-clip", r.train.clip_norm)->capture_default_str();
}

void print_epoch(const a2w::EpochMetrics& m) {
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "epoch %zu valid loss word %.4f char %.4f joint %.4f (%.1fs)",
                m.epoch, m.loss_word, m.loss_char, m.loss_joint,
                m.wall_seconds);
  log(buf);
}

a2w::TrainedAcoustic train_am(const Corpus& train, const Corpus& valid,
                              const a2w::AcousticRecipe& recipe) {
  return a2w::train_acoustic(train, valid, recipe, print_epoch);
}

// "5k" -> 5000.
std::size_t parse_size(const std::string& text) {
  std::size_t pos = 0;
  std::size_t value = std::stoull(text, &pos);
  const std::string rest = text.substr(pos);
  if (rest == "k" || rest == "K") return value * 1000;
  if (!rest.empty()) throw a2w::ConfigError("bad size '" + text + "'");
  return value;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int run(int argc, char** argv) {
  CLI::App app{"a2w: acoustic-to-word recognition with character-level OOV "
               "resolution"};
  app.set_config("--config", "",
                 "key=value file; [subcommand] sections hold its options");
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  std::uint64_t seed = 1;
  auto* seed_opt = app.add_option("--seed", seed, "seed for every random choice")
                       ->capture_default_str();
  std::size_t workers = 1;
  app.add_option("--workers", workers, "decode threads")->capture_default_str();

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  fs::path synth_spec, synth_out;
  synth->add_option("--spec", synth_spec, "JSON generator spec")
      ->check(CLI::ExistingFile);
  synth->add_option("--out", synth_out, "output directory")->required();

  // train-am
  auto* train_cmd = app.add_subcommand("train-am", "train an acoustic model");
  a2w::AcousticRecipe recipe;
  fs::path am_train, am_valid, am_out, am_metrics;
  train_cmd->add_option("--train", am_train, "training corpus")->required();
  train_cmd->add_option("--valid", am_valid, "validation corpus")->required();
  train_cmd->add_option("--out", am_out, "checkpoint directory")->required();
  train_cmd->add_option("--mtl", recipe.train.lambda,
                        "word loss weight; 1 trains the word model alone")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  train_cmd->add_option("--vocab-min-count", recipe.min_count)
      ->capture_default_str();
  train_cmd->add_option("--vocab-max-words", recipe.max_words,
                        "0 keeps every word above the cutoff")
      ->capture_default_str();
  train_cmd->add_option("--metrics", am_metrics,
                        "CSV log (default: <out>/metrics.csv)");
  bind_recipe(train_cmd, recipe);

  // train-lm
  auto* lm_cmd = app.add_subcommand("train-lm", "train a word language model");
  a2w::LanguageRecipe lm_recipe;
  std::vector<fs::path> lm_text, lm_valid;
  fs::path lm_am, lm_out;
  lm_cmd->add_option("--text", lm_text, "training text files")
      ->required()
      ->check(CLI::ExistingFile);
  lm_cmd->add_option("--valid-text", lm_valid, "validation text files")
      ->check(CLI::ExistingFile);
  lm_cmd->add_option("--am", lm_am,
                     "acoustic checkpoint whose vocabulary the LM adopts")
      ->required();
  lm_cmd->add_option("--out", lm_out, "checkpoint directory")->required();
  bind_lm(lm_cmd, lm_recipe);

  // decode
  auto* decode_cmd = app.add_subcommand("decode", "decode a corpus");
  fs::path dec_am, dec_lm, dec_corpus, dec_out;
  a2w::DecodeOptions dec_opts;
  std::optional<double> dec_gamma;
  decode_cmd->add_option("--am", dec_am, "acoustic checkpoint")->required();
  auto* lm_opt = decode_cmd->add_option("--lm", dec_lm, "language checkpoint");
  decode_cmd->add_option("--corpus", dec_corpus)->required();
  decode_cmd->add_option("--out", dec_out, "JSON lines output")->required();
  decode_cmd->add_option("--beam", dec_opts.fusion.beam_size)
      ->capture_default_str();
  decode_cmd->add_option("--beta", dec_opts.fusion.lm_weight, "LM weight")
      ->needs(lm_opt)
      ->capture_default_str();
  decode_cmd->add_option("--gamma", dec_gamma,
                         "coverage weight (default 0.4, or 0.6 with --lm)");
  decode_cmd->add_option("--tau", dec_opts.fusion.coverage_threshold)
      ->capture_default_str();
  decode_cmd->add_option("--max-len-factor", dec_opts.fusion.max_len_factor)
      ->capture_default_str();
  decode_cmd->add_option("--char-max-len-factor", dec_opts.char_max_len_factor)
      ->capture_default_str();
  decode_cmd->add_flag("--resolve", dec_opts.resolve,
                       "replace OOV tokens using the character decoder");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "score decode output");
  fs::path ev_refs, ev_hyps, ev_json, ev_csv;
  std::string ev_system = "a2w", ev_split = "test";
  eval_cmd->add_option("--refs", ev_refs, "reference corpus")->required();
  eval_cmd->add_option("--hyps", ev_hyps, "decode output")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--system", ev_system)->capture_default_str();
  eval_cmd->add_option("--split", ev_split)->capture_default_str();
  eval_cmd->add_option("--json", ev_json, "report JSON path");
  eval_cmd->add_option("--csv", ev_csv, "append a CSV summary row");

  // sweep-vocab
  auto* sweep_cmd =
      app.add_subcommand("sweep-vocab", "WER against vocabulary size");
  a2w::AcousticRecipe sweep_recipe;
  fs::path sw_data, sw_out;
  std::vector<std::string> sw_sizes;
  std::vector<std::size_t> sw_min_counts;
  std::vector<std::uint64_t> sw_seeds{1, 2, 3};
  double sw_mtl = 0.5;
  double sw_gamma = 0.4;
  std::string sw_split = "test";
  sweep_cmd->add_option("--data", sw_data, "directory written by synth")
      ->required();
  sweep_cmd->add_option("--out", sw_out, "CSV output")->required();
  auto* sizes_opt =
      sweep_cmd->add_option("--sizes", sw_sizes, "vocabulary sizes, e.g. 1k,5k")
          ->delimiter(',');
  sweep_cmd->add_option("--min-counts", sw_min_counts, "frequency cutoffs")
      ->delimiter(',')
      ->excludes(sizes_opt);
  sweep_cmd->add_option("--seeds", sw_seeds)->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--mtl", sw_mtl, "word loss weight of the MTL system")
      ->capture_default_str();
  sweep_cmd->add_option("--gamma", sw_gamma)->capture_default_str();
  sweep_cmd->add_option("--split", sw_split, "evaluation split directory")
      ->capture_default_str();
  bind_recipe(sweep_cmd, sweep_recipe);

  // gradcheck
  auto* grad_cmd =
      app.add_subcommand("gradcheck", "finite-difference gradient suites");
  double tolerance = 1e-4;
  grad_cmd->add_option("--tolerance", tolerance, "relative error bound")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  if (synth->parsed()) {
    a2w::SynthSpec spec;
    if (!synth_spec.empty()) spec = a2w::SynthSpec::from_json(read_all(synth_spec));
    if (seed_opt->count() > 0) spec.seed = seed;
    const a2w::SynthData data = a2w::synth_generate(spec);
    a2w::write_corpus(synth_out / "train", data.train);
    a2w::write_corpus(synth_out / "valid", data.valid);
    a2w::write_corpus(synth_out / "test", data.test);
    a2w::write_corpus(synth_out / "test_oov", data.test_oov);
    a2w::write_text(synth_out / "lm_text.txt", data.lm_text);
    a2w::write_text(synth_out / "lexicon.txt",
                    std::vector<a2w::Transcript>{data.lexicon});
    a2w::write_text(synth_out / "oov_words.txt",
                    std::vector<a2w::Transcript>{data.oov_words});
    std::ofstream(synth_out / "spec.json") << spec.to_json() << '\n';
    log("wrote " + std::to_string(data.train.utterances.size()) +
        " training utterances to " + synth_out.string());
    return kOk;
  }

  if (train_cmd->parsed()) {
    recipe.train.seed = seed;
    const Corpus train = load_corpus(am_train);
    const Corpus valid = load_corpus(am_valid);
    a2w::TrainedAcoustic am = train_am(train, valid, recipe);
    Json echo = Json::parse(recipe.to_json());
    echo["train_corpus"] = am_train.string();
    echo["valid_corpus"] = am_valid.string();
    a2w::save_acoustic_model(am_out, am.model, am.vocab, am.chars, echo.dump());
    const fs::path metrics = am_metrics.empty() ? am_out / "metrics.csv" : am_metrics;
    std::ofstream out(metrics);
    a2w::write_metrics_csv(out, am.result.log);
    log("best epoch " + std::to_string(am.result.best_epoch) + ", vocabulary " +
        std::to_string(am.vocab.size()) + ", saved " + am_out.string());
    return kOk;
  }

  if (lm_cmd->parsed()) {
    lm_recipe.train.seed = seed;
    const a2w::AcousticCheckpoint am = a2w::load_acoustic_model(lm_am);
    std::vector<a2w::Transcript> text, valid;
    for (const auto& f : lm_text) {
      auto part = a2w::read_text(f);
      text.insert(text.end(), part.begin(), part.end());
    }
    for (const auto& f : lm_valid) {
      auto part = a2w::read_text(f);
      valid.insert(valid.end(), part.begin(), part.end());
    }
    a2w::RnnLm lm = a2w::train_language(
        text, valid, am.vocab, lm_recipe, [](const a2w::LmEpochStats& s) {
          char buf[128];
          std::snprintf(buf, sizeof buf,
                        "epoch %zu perplexity train %.3f valid %.3f (%.1fs)",
                        s.epoch, s.train_perplexity, s.valid_perplexity,
                        s.seconds);
          log(buf);
        });
    Json echo = Json::parse(lm_recipe.to_json());
    echo["text"] = Json::array();
    for (const auto& f : lm_text) echo["text"].push_back(f.string());
    a2w::save_language_model(lm_out, lm, am.vocab, echo.dump());
    log("saved " + lm_out.string());
    return kOk;
  }

  if (decode_cmd->parsed()) {
    const a2w::AcousticCheckpoint am = a2w::load_acoustic_model(dec_am);
    std::optional<a2w::LanguageCheckpoint> lm;
    if (!dec_lm.empty()) {
      lm = a2w::load_language_model(dec_lm);
      a2w::require_same_vocabulary(am.vocab, lm->vocab);
    } else {
      dec_opts.fusion.lm_weight = 0.0;
    }
    dec_opts.fusion.coverage_weight = dec_gamma.value_or(lm ? 0.6 : 0.4);
    dec_opts.workers = workers;
    dec_opts.fusion.validate();
    const Corpus corpus = load_corpus(dec_corpus);
    const auto results = a2w::decode_corpus(am.model, am.vocab, am.chars,
                                            lm ? &lm->lm : nullptr, corpus,
                                            dec_opts);
    std::ofstream out(dec_out);
    if (!out) throw a2w::DataError("cannot write " + dec_out.string());
    Json config{{"am", dec_am.string()},
                {"lm", dec_lm.string()},
                {"corpus", dec_corpus.string()},
                {"beam", dec_opts.fusion.beam_size},
                {"beta", dec_opts.fusion.lm_weight},
                {"gamma", dec_opts.fusion.coverage_weight},
                {"tau", dec_opts.fusion.coverage_threshold},
                {"max_len_factor", dec_opts.fusion.max_len_factor},
                {"resolve", dec_opts.resolve},
                {"seed", seed}};
    out << Json{{"config", config}}.dump() << '\n';
    for (const auto& r : results) out << r.to_json(am.vocab) << '\n';
    log("decoded " + std::to_string(results.size()) + " utterances");
    return kOk;
  }

  if (eval_cmd->parsed()) {
    const Corpus refs = load_corpus(ev_refs);
    std::ifstream in(ev_hyps);
    std::vector<a2w::ScoredHypothesis> hyps;
    Json config = Json::object();
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = Json::parse(line);
      if (j.contains("config") && !j.contains("id")) {
        config["decode"] = j["config"];
        continue;
      }
      hyps.push_back(a2w::scored_from_json(line));
    }
    a2w::EvalReport report = a2w::evaluate(refs.utterances, hyps, ev_system,
                                           ev_split);
    config["refs"] = ev_refs.string();
    config["hyps"] = ev_hyps.string();
    report.config = config.dump();
    if (!ev_json.empty()) std::ofstream(ev_json) << report.to_json() << '\n';
    if (!ev_csv.empty()) {
      const bool fresh = !fs::exists(ev_csv) || fs::file_size(ev_csv) == 0;
      std::ofstream csv(ev_csv, std::ios::app);
      if (fresh) csv << a2w::EvalReport::csv_header() << '\n';
      csv << report.csv_row() << '\n';
    }
    std::cout << a2w::EvalReport::csv_header() << '\n'
              << report.csv_row() << '\n';
    return kOk;
  }

  if (sweep_cmd->parsed()) {
    if (sw_sizes.empty() && sw_min_counts.empty()) {
      throw a2w::ConfigError("sweep-vocab needs --sizes or --min-counts");
    }
    const Corpus train = load_corpus(sw_data / "train");
    const Corpus valid = load_corpus(sw_data / "valid");
    const Corpus eval = load_corpus(sw_data / sw_split);
    struct Cut {
      std::string kind;
      std::size_t value;
    };
    std::vector<Cut> cuts;
    for (const auto& s : sw_sizes) cuts.push_back({"size", parse_size(s)});
    for (std::size_t c : sw_min_counts) cuts.push_back({"min_count", c});
    std::ofstream out(sw_out);
    if (!out) throw a2w::DataError("cannot write " + sw_out.string());
    out << "cut,value,vocab_size,oov_rate,seed,system,wer,n_oov_detected,"
           "n_oov_resolved,n_fallback,rtf\n";
    a2w::DecodeOptions plain;
    plain.fusion.coverage_weight = sw_gamma;
    plain.workers = workers;
    a2w::DecodeOptions resolved = plain;
    resolved.resolve = true;
    const auto refs = eval.transcripts();
    for (const Cut& cut : cuts) {
      std::map<std::string, std::vector<double>> wers;
      for (std::uint64_t s : sw_seeds) {
        for (const bool mtl : {false, true}) {
          a2w::AcousticRecipe r = sweep_recipe;
          r.train.seed = s;
          r.train.lambda = mtl ? sw_mtl : 1.0;
          r.min_count = cut.kind == "min_count" ? cut.value : 1;
          r.max_words = cut.kind == "size" ? cut.value : 0;
          a2w::TrainedAcoustic am = train_am(train, valid, r);
          const auto decodes = a2w::decode_corpus(
              am.model, am.vocab, am.chars, nullptr, eval,
              mtl ? resolved : plain);
          const std::string system = mtl ? "mtl_resolved" : "baseline";
          const a2w::EvalReport rep =
              a2w::score_decodes(eval, decodes, system, sw_split);
          wers[system].push_back(rep.wer);
          out << cut.kind << ',' << cut.value << ',' << am.vocab.size() << ','
              << a2w::oov_rate(am.vocab, refs) << ',' << s << ',' << system
              << ',' << rep.wer << ',' << rep.oov_detected << ','
              << rep.oov_resolved << ',' << rep.fallbacks << ',' << rep.rtf
              << '\n';
          out.flush();
        }
      }
      log(cut.kind + "=" + std::to_string(cut.value) + ": median WER baseline " +
          std::to_string(median(wers["baseline"])) + ", MTL+resolution " +
          std::to_string(median(wers["mtl_resolved"])));
    }
    return kOk;
  }

  if (grad_cmd->parsed()) {
    bool ok = true;
    auto report = [&](const std::string& name, const a2w::GradCheckReport& r) {
      char buf[256];
      std::snprintf(buf, sizeof buf,
                    "%-14s %6zu entries  max rel error %.3e at %s  %s",
                    name.c_str(), r.checked, r.max_rel_error, r.worst.c_str(),
                    r.passed(tolerance) ? "PASS" : "FAIL");
      std::cout << buf << '\n';
      ok = ok && r.passed(tolerance);
    };
    report("joint-model", a2w::gradcheck_joint_model(seed));
    report("language-model", a2w::gradcheck_language_model(seed));
    return ok ? kOk : kFailed;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const a2w::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const a2w::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const a2w::NumericDivergence& e) {
    std::cerr << "numeric divergence: " << e.what() << '\n';
    return kDivergence;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
}
