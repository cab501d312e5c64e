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

// A checkpoint is a directory holding `checkpoint.json` (configuration,
// parameter names and shapes, vocabulary fingerprints, config echo),
// `params.bin` (parameters in list order as little-endian f64) and the
// vocabulary files it was trained with.

#ifndef A2W_CHECKPOINT_HPP_
#define A2W_CHECKPOINT_HPP_

#include <filesystem>
#include <string>

#include "a2w/corpus.hpp"
#include "a2w/model.hpp"
#include "a2w/rnnlm.hpp"

namespace a2w {

std::string model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const std::string& text);

struct AcousticCheckpoint {
  JointModel model;
  Vocabulary vocab;
  CharInventory chars;
  std::string config;  // echo stored at save time
};

void save_acoustic_model(const std::filesystem::path& dir, JointModel& model,
                         const Vocabulary& vocab, const CharInventory& chars,
                         const std::string& config_echo = {});
AcousticCheckpoint load_acoustic_model(const std::filesystem::path& dir);

struct LanguageCheckpoint {
  RnnLm lm;
  Vocabulary vocab;
  std::string config;
};

void save_language_model(const std::filesystem::path& dir, RnnLm& lm,
                         const Vocabulary& vocab,
                         const std::string& config_echo = {});
LanguageCheckpoint load_language_model(const std::filesystem::path& dir);

/// Throws ConfigError unless both vocabularies carry the same fingerprint.
void require_same_vocabulary(const Vocabulary& acoustic,
                             const Vocabulary& language);

}  // namespace a2w

#endif  // A2W_CHECKPOINT_HPP_
