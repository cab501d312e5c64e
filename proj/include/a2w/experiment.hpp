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

// End-to-end pieces shared by the command-line tool and the acceptance
// suite: turning corpora into training examples, training both model kinds,
// decoding with optional fusion and OOV resolution, and scoring.

#ifndef A2W_EXPERIMENT_HPP_
#define A2W_EXPERIMENT_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "a2w/beam_search.hpp"
#include "a2w/corpus.hpp"
#include "a2w/metrics.hpp"
#include "a2w/model.hpp"
#include "a2w/resolver.hpp"
#include "a2w/rnnlm.hpp"
#include "a2w/trainer.hpp"

namespace a2w {

std::vector<TrainingExample> make_examples(const Corpus& corpus,
                                           const Vocabulary& vocab,
                                           const CharInventory& chars);

struct AcousticRecipe {
  ModelConfig model;
  TrainConfig train;
  std::size_t min_count = 5;
  std::size_t max_words = 0;  // 0: no cap beyond min_count

  std::string to_json() const;
};

struct TrainedAcoustic {
  JointModel model;
  Vocabulary vocab;
  CharInventory chars;
  TrainResult result;
};

/// Builds the vocabularies from `train`, sizes the model from them and
/// trains. `recipe.train.seed` seeds both initialization and training.
TrainedAcoustic train_acoustic(
    const Corpus& train, const Corpus& valid, const AcousticRecipe& recipe,
    const std::function<void(const EpochMetrics&)>& on_epoch = {});

struct LanguageRecipe {
  LmConfig lm;
  LmTrainConfig train;

  std::string to_json() const;
};

RnnLm train_language(
    std::span<const Transcript> text, std::span<const Transcript> valid,
    const Vocabulary& vocab, const LanguageRecipe& recipe,
    const std::function<void(const LmEpochStats&)>& on_epoch = {});

struct DecodeOptions {
  FusionConfig fusion;
  bool resolve = false;
  double char_max_len_factor = 3.0;  // greedy steps per character frame
  std::size_t workers = 1;
};

struct UtteranceDecode {
  std::string id;
  std::vector<BeamHypothesis> hypotheses;  // best first
  bool finished = true;
  Transcript raw_words;  // best hypothesis before resolution
  Transcript words;      // after resolution when enabled
  std::string char_text;
  AttentionTrace char_trace;
  Resolution resolution;
  double wall_seconds = 0.0;
  double audio_seconds = 0.0;

  ScoredHypothesis scored() const;
  /// One JSON line: id, words, n-best score decomposition, char hypothesis,
  /// alignments and flags. Timing fields are the only non-deterministic
  /// content and can be left out.
  std::string to_json(const Vocabulary& vocab, bool with_timing = true) const;
};

/// Reads back what eval needs from a decode record.
ScoredHypothesis scored_from_json(const std::string& line);

UtteranceDecode decode_utterance(const JointModel& model,
                                 const Vocabulary& vocab,
                                 const CharInventory& chars, const RnnLm* lm,
                                 const std::string& id, const Tensor& features,
                                 const DecodeOptions& options);

/// Decodes every utterance with `options.workers` threads; results are
/// ordered by utterance id.
std::vector<UtteranceDecode> decode_corpus(const JointModel& model,
                                           const Vocabulary& vocab,
                                           const CharInventory& chars,
                                           const RnnLm* lm, const Corpus& corpus,
                                           const DecodeOptions& options);

EvalReport score_decodes(const Corpus& refs,
                         std::span<const UtteranceDecode> decodes,
                         const std::string& system, const std::string& split);

}  // namespace a2w

#endif  // A2W_EXPERIMENT_HPP_
