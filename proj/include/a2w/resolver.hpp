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

// Replaces OOV emissions of the word decoder with words spelled by the
// greedy character decoder. For word step n the character step m whose
// (pairwise averaged) attention overlaps most with the word attention row is
// chosen, and the space-delimited token of the character hypothesis covering
// position m is substituted.

#ifndef A2W_RESOLVER_HPP_
#define A2W_RESOLVER_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "a2w/model.hpp"
#include "a2w/tensor.hpp"

namespace a2w {

/// M x T_c -> M x ceil(T_c / 2), averaging columns (2i, 2i+1). An odd final
/// column is paired with zero.
Tensor average_adjacent(const Tensor& char_attention);
Tensor average_adjacent(const AttentionTrace& char_trace);

/// argmax_m dot(word_row, averaged[m]); ties go to the smallest m. Column
/// counts may differ by one, the shorter side being zero padded. Overlap
/// scores are written to `overlaps` when given.
std::size_t align_oov(std::span<const double> word_row, const Tensor& averaged,
                      std::vector<double>* overlaps = nullptr);

struct AlignmentResult {
  std::size_t word_step = 0;
  std::size_t char_step = 0;
  std::vector<double> overlaps;
  std::string word;
  bool fallback = false;
};

struct Resolution {
  std::vector<std::string> words;
  std::vector<AlignmentResult> alignments;
  std::size_t fallbacks = 0;
};

/// `char_text` holds one character per greedy decoding step, spaces
/// included. Word tokens equal to `oov_marker` are replaced; an alignment
/// that lands on a space or past the text keeps the marker and is flagged.
Resolution resolve(std::span<const std::string> word_hyp,
                   const AttentionTrace& word_trace,
                   const std::string& char_text,
                   const AttentionTrace& char_trace,
                   const std::string& oov_marker);

}  // namespace a2w

#endif  // A2W_RESOLVER_HPP_
