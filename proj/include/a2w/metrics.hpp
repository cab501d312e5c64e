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

#ifndef A2W_METRICS_HPP_
#define A2W_METRICS_HPP_

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "a2w/corpus.hpp"

namespace a2w {

enum class EditOp { kMatch, kSubstitute, kInsert, kDelete };

inline constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

struct AlignedPair {
  EditOp op;
  std::size_t ref = kNoIndex;  // kNoIndex for insertions
  std::size_t hyp = kNoIndex;  // kNoIndex for deletions
};

struct EditResult {
  std::size_t distance = 0;
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
  std::vector<AlignedPair> alignment;  // in sequence order
};

/// Unit-cost Levenshtein distance. Among minimum-distance alignments the one
/// with the most substitutions is kept, so S, I and D are unique and swap
/// symmetrically with the arguments. The backtrace prefers substitution,
/// then insertion, then deletion among moves that reach that optimum.
EditResult edit_distance(std::span<const std::string> ref,
                         std::span<const std::string> hyp);

/// Number of `oov_marker` tokens across all hypotheses.
std::size_t count_detected_oov(std::span<const Transcript> hyps,
                               const std::string& oov_marker = kOovToken);

inline constexpr double kFrameShiftSeconds = 0.01;

double frames_to_seconds(std::size_t frames);

/// wall / duration; duration must be positive.
double rtf(double wall_seconds, double audio_seconds);

struct ScoredHypothesis {
  std::string id;
  Transcript words;                          // after resolution, if any
  std::size_t oov_detected = 0;              // OOV emissions before resolution
  std::vector<std::size_t> resolved_positions;  // non-fallback substitutions
  std::size_t fallbacks = 0;
  double wall_seconds = 0.0;
  double audio_seconds = 0.0;
};

struct UtteranceScore {
  std::string id;
  std::size_t ref_words = 0;
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
  std::size_t oov_detected = 0;
  std::size_t oov_resolved = 0;
  std::size_t resolved_correct = 0;
  std::size_t fallbacks = 0;
  double wall_seconds = 0.0;
  double audio_seconds = 0.0;

  double wer() const;
};

struct EvalReport {
  std::string system;
  std::string split;
  std::vector<UtteranceScore> utterances;  // ordered by id
  std::size_t ref_words = 0;
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
  double wer = 0.0;  // pooled percentage
  std::size_t oov_detected = 0;
  std::size_t oov_resolved = 0;
  /// Resolved slots aligned as exact matches against the reference.
  std::size_t resolved_correct = 0;
  std::size_t fallbacks = 0;
  double wall_seconds = 0.0;
  double audio_seconds = 0.0;
  double rtf = 0.0;
  std::string config;  // JSON echo of the producing configuration

  std::string to_json() const;
  static EvalReport from_json(const std::string& text);
  /// `system,split,wer,n_oov_detected,n_oov_resolved,n_fallback,rtf`
  std::string csv_row() const;
  static std::string csv_header();
};

/// Pools errors over utterances matched by id. Every reference needs a
/// hypothesis and vice versa.
EvalReport evaluate(std::span<const Utterance> refs,
                    std::span<const ScoredHypothesis> hyps,
                    const std::string& system, const std::string& split);

}  // namespace a2w

#endif  // A2W_METRICS_HPP_
