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

#include "a2w/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "a2w/checkpoint.hpp"
#include "a2w/errors.hpp"
#include "json.hpp"

namespace a2w {

using Json = nlohmann::ordered_json;

std::vector<TrainingExample> make_examples(const Corpus& corpus,
                                           const Vocabulary& vocab,
                                           const CharInventory& chars) {
  std::vector<TrainingExample> out;
  out.reserve(corpus.utterances.size());
  for (const auto& u : corpus.utterances) {
    if (u.words.empty()) throw DataError("utterance " + u.id + " has no words");
    TrainingExample ex;
    ex.id = u.id;
    ex.features = u.features;
    ex.words = vocab.encode(u.words);
    ex.chars = chars.encode(char_transcript(u.words));
    out.push_back(std::move(ex));
  }
  return out;
}

std::string AcousticRecipe::to_json() const {
  Json j;
  j["model"] = Json::parse(model_config_to_json(model));
  const TrainConfig& t = train;
  j["train"] = {{"lambda", t.lambda},         {"adam_lr", t.adam_lr},
                {"sgd_lr", t.sgd_lr},         {"clip_norm", t.clip_norm},
                {"batch_size", t.batch_size}, {"sampling_prob", t.sampling_prob},
                {"smoothing", t.smoothing},   {"max_epochs", t.max_epochs},
                {"patience", t.patience},     {"seed", t.seed}};
  j["min_count"] = min_count;
  j["max_words"] = max_words;
  return j.dump();
}

TrainedAcoustic train_acoustic(
    const Corpus& train_set, const Corpus& valid_set,
    const AcousticRecipe& recipe,
    const std::function<void(const EpochMetrics&)>& on_epoch) {
  const auto transcripts = train_set.transcripts();
  if (transcripts.empty()) throw DataError("acoustic training corpus is empty");
  TrainedAcoustic out;
  out.vocab = Vocabulary::build(transcripts, recipe.min_count, recipe.max_words);
  out.chars = CharInventory::build(transcripts);
  ModelConfig cfg = recipe.model;
  cfg.word_vocab = out.vocab.size();
  cfg.char_vocab = out.chars.size();
  cfg.word_sos = Vocabulary::kSos;
  cfg.word_eos = Vocabulary::kEos;
  cfg.char_sos = CharInventory::kSos;
  cfg.char_eos = CharInventory::kEos;
  cfg.input_dim = train_set.utterances.front().features.cols();
  cfg.lambda = recipe.train.lambda;
  out.model = JointModel::create(cfg, recipe.train.seed);
  const auto train_ex = make_examples(train_set, out.vocab, out.chars);
  const auto valid_ex = make_examples(valid_set, out.vocab, out.chars);
  out.result = train(out.model, train_ex, valid_ex, recipe.train,
                     [&](const EpochMetrics& m, const JointModel&) {
                       if (on_epoch) on_epoch(m);
                     });
  return out;
}

std::string LanguageRecipe::to_json() const {
  Json j;
  j["lm"] = {{"hidden", lm.hidden},         {"init_range", lm.init_range},
             {"forget_bias", lm.forget_bias}, {"dropout", lm.dropout}};
  j["train"] = {{"bptt", train.bptt},
                {"max_epochs", train.max_epochs},
                {"learning_rate", train.learning_rate},
                {"clip_norm", train.clip_norm},
                {"seed", train.seed}};
  return j.dump();
}

namespace {

std::vector<std::vector<std::size_t>> lm_ids(std::span<const Transcript> text,
                                             const Vocabulary& vocab) {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(text.size());
  for (const auto& s : text) {
    std::vector<std::size_t> ids;
    ids.reserve(s.size());
    for (const auto& w : s) ids.push_back(vocab.id(w));
    out.push_back(std::move(ids));
  }
  return out;
}

}  // namespace

RnnLm train_language(
    std::span<const Transcript> text, std::span<const Transcript> valid,
    const Vocabulary& vocab, const LanguageRecipe& recipe,
    const std::function<void(const LmEpochStats&)>& on_epoch) {
  LmConfig cfg = recipe.lm;
  cfg.vocab = vocab.size();
  cfg.sos = Vocabulary::kSos;
  cfg.eos = Vocabulary::kEos;
  RnnLm lm = RnnLm::create(cfg, recipe.train.seed);
  const auto train_ids = lm_ids(text, vocab);
  const auto valid_ids = lm_ids(valid, vocab);
  train_lm(lm, train_ids, valid_ids, recipe.train, on_epoch);
  return lm;
}

UtteranceDecode decode_utterance(const JointModel& model,
                                 const Vocabulary& vocab,
                                 const CharInventory& chars, const RnnLm* lm,
                                 const std::string& id, const Tensor& features,
                                 const DecodeOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  UtteranceDecode out;
  out.id = id;
  Graph g(false);
  Encoding enc = encode(model.encoder, g.constant(features));
  BeamResult beam =
      beam_search(model.words, lm, enc.word.value(), options.fusion);
  out.finished = beam.finished;
  out.hypotheses = std::move(beam.hypotheses);
  const BeamHypothesis& best = out.hypotheses.front();
  out.raw_words = vocab.decode(best.tokens);
  out.words = out.raw_words;
  if (options.resolve) {
    const Tensor& char_memory = enc.chars.value();
    const auto limit = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(
               options.char_max_len_factor *
               static_cast<double>(char_memory.rows()))));
    GreedyResult greedy = greedy_decode(model.chars, char_memory, limit);
    out.char_text = chars.decode(greedy.tokens);
    out.char_trace = std::move(greedy.trace);
    out.resolution = resolve(out.raw_words, best.trace, out.char_text,
                             out.char_trace, kOovToken);
    out.words = out.resolution.words;
  }
  out.wall_seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
  out.audio_seconds = frames_to_seconds(features.rows());
  return out;
}

std::vector<UtteranceDecode> decode_corpus(const JointModel& model,
                                           const Vocabulary& vocab,
                                           const CharInventory& chars,
                                           const RnnLm* lm, const Corpus& corpus,
                                           const DecodeOptions& options) {
  if (lm) {
    // The caller is expected to check fingerprints; sizes must agree anyway.
    if (lm->config.vocab != vocab.size()) {
      throw ConfigError("language model vocabulary size does not match");
    }
  }
  const auto& utts = corpus.utterances;
  std::vector<std::size_t> order(utts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return utts[a].id < utts[b].id;
  });
  std::vector<UtteranceDecode> out(utts.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= order.size()) return;
      try {
        const Utterance& u = utts[order[k]];
        out[k] = decode_utterance(model, vocab, chars, lm, u.id, u.features,
                                  options);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = order.size();
        return;
      }
    }
  };
  const std::size_t workers =
      std::max<std::size_t>(1, std::min(options.workers, order.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

ScoredHypothesis UtteranceDecode::scored() const {
  ScoredHypothesis s;
  s.id = id;
  s.words = words;
  s.oov_detected = static_cast<std::size_t>(
      std::count(raw_words.begin(), raw_words.end(), kOovToken));
  for (const auto& a : resolution.alignments) {
    if (!a.fallback) s.resolved_positions.push_back(a.word_step);
  }
  s.fallbacks = resolution.fallbacks;
  s.wall_seconds = wall_seconds;
  s.audio_seconds = audio_seconds;
  return s;
}

std::string UtteranceDecode::to_json(const Vocabulary& vocab,
                                     bool with_timing) const {
  Json j;
  j["id"] = id;
  j["words"] = join_words(words);
  j["raw_words"] = join_words(raw_words);
  j["finished"] = finished;
  Json hyps = Json::array();
  for (const auto& h : hypotheses) {
    Json tokens = Json::array();
    for (std::size_t t : h.tokens) tokens.push_back(vocab.word(t));
    hyps.push_back({{"tokens", tokens},
                    {"log_p_am", h.log_p_am},
                    {"log_p_lm", h.log_p_lm},
                    {"coverage", h.coverage},
                    {"total", h.total},
                    {"finished", h.finished}});
  }
  j["hypotheses"] = std::move(hyps);
  j["char_hypothesis"] = char_text;
  Json aligns = Json::array();
  for (const auto& a : resolution.alignments) {
    aligns.push_back({{"word_step", a.word_step},
                      {"char_step", a.char_step},
                      {"word", a.word},
                      {"fallback", a.fallback}});
  }
  j["alignments"] = std::move(aligns);
  j["n_oov_detected"] =
      std::count(raw_words.begin(), raw_words.end(), kOovToken);
  j["n_fallback"] = resolution.fallbacks;
  if (with_timing) {
    j["wall_seconds"] = wall_seconds;
    j["audio_seconds"] = audio_seconds;
  }
  return j.dump();
}

ScoredHypothesis scored_from_json(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    ScoredHypothesis s;
    s.id = j.at("id").get<std::string>();
    s.words = split_words(j.at("words").get<std::string>());
    s.oov_detected = j.at("n_oov_detected").get<std::size_t>();
    for (const auto& a : j.at("alignments")) {
      if (!a.at("fallback").get<bool>()) {
        s.resolved_positions.push_back(a.at("word_step").get<std::size_t>());
      }
    }
    s.fallbacks = j.at("n_fallback").get<std::size_t>();
    s.wall_seconds = j.value("wall_seconds", 0.0);
    s.audio_seconds = j.value("audio_seconds", 0.0);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad decode record: ") + e.what());
  }
}

EvalReport score_decodes(const Corpus& refs,
                         std::span<const UtteranceDecode> decodes,
                         const std::string& system, const std::string& split) {
  std::vector<ScoredHypothesis> hyps;
  hyps.reserve(decodes.size());
  for (const auto& d : decodes) hyps.push_back(d.scored());
  return evaluate(refs.utterances, hyps, system, split);
}

}  // namespace a2w
