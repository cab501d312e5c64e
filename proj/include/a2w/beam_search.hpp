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

// Left-to-right beam search over an attention decoder. Every hypothesis is
// scored as
//
//   total = log P_am(y|x) + lm_weight * log P_lm(y) + coverage_weight * cov
//
// where cov counts encoder frames whose cumulative attention over the
// emitted steps exceeds `coverage_threshold`. The LM term is added inside
// the search loop, one token at a time.

#ifndef A2W_BEAM_SEARCH_HPP_
#define A2W_BEAM_SEARCH_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "a2w/model.hpp"
#include "a2w/rnnlm.hpp"

namespace a2w {

struct FusionConfig {
  std::size_t beam_size = 5;
  double lm_weight = 0.2;
  double coverage_weight = 0.4;
  double coverage_threshold = 0.0;
  double max_len_factor = 1.5;

  void validate() const;
};

/// Number of frames t with sum_n trace[n][t] > threshold.
int coverage(const AttentionTrace& trace, double threshold);

struct BeamHypothesis {
  std::vector<std::size_t> tokens;  // emitted ids; ends with eos if finished
  double log_p_am = 0.0;
  double log_p_lm = 0.0;
  int coverage = 0;
  double total = 0.0;
  bool finished = false;
  AttentionTrace trace;  // one row per emitted token
};

struct BeamResult {
  std::vector<BeamHypothesis> hypotheses;  // best first
  bool finished = true;  // false: no hypothesis reached eos within max_len
};

/// `lm` may be null, in which case the LM term is omitted.
BeamResult beam_search(const AttentionDecoder& decoder, const RnnLm* lm,
                       const Tensor& encoder_out, const FusionConfig& config);

double fused_score(double log_p_am, double log_p_lm, int coverage,
                   const FusionConfig& config, bool with_lm);

struct GreedyResult {
  std::vector<std::size_t> tokens;  // without the final eos
  AttentionTrace trace;             // includes the eos step when finished
  bool finished = false;
};

/// Argmax decoding until eos or `max_len` steps.
GreedyResult greedy_decode(const AttentionDecoder& decoder,
                           const Tensor& encoder_out, std::size_t max_len);

struct ForcedScore {
  double log_prob = 0.0;  // sum of log P(token_n | token_<n, x)
  AttentionTrace trace;
};

/// Scores `tokens` under teacher forcing, recording the attention rows.
ForcedScore teacher_forced_score(const AttentionDecoder& decoder,
                                 const Tensor& encoder_out,
                                 std::span<const std::size_t> tokens);

}  // namespace a2w

#endif  // A2W_BEAM_SEARCH_HPP_
