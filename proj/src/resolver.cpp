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

#include "a2w/resolver.hpp"

#include <algorithm>

#include "a2w/errors.hpp"

namespace a2w {

Tensor average_adjacent(const Tensor& char_attention) {
  if (char_attention.rank() != 2) {
    throw DimensionError("average_adjacent expects a matrix, got " +
                         shape_string(char_attention.shape()));
  }
  const std::size_t rows = char_attention.rows();
  const std::size_t cols = char_attention.cols();
  const std::size_t half = (cols + 1) / 2;
  Tensor out({rows, half});
  for (std::size_t m = 0; m < rows; ++m) {
    for (std::size_t i = 0; i < half; ++i) {
      const double a = char_attention.at(m, 2 * i);
      const double b = 2 * i + 1 < cols ? char_attention.at(m, 2 * i + 1) : 0.0;
      out.at(m, i) = (a + b) / 2.0;
    }
  }
  return out;
}

Tensor average_adjacent(const AttentionTrace& char_trace) {
  Tensor dense({char_trace.rows.size(), char_trace.frames});
  for (std::size_t m = 0; m < char_trace.rows.size(); ++m) {
    std::copy(char_trace.rows[m].begin(), char_trace.rows[m].end(),
              dense.data().begin() + m * char_trace.frames);
  }
  return average_adjacent(dense);
}

std::size_t align_oov(std::span<const double> word_row, const Tensor& averaged,
                      std::vector<double>* overlaps) {
  const std::size_t rows = averaged.rank() == 2 ? averaged.rows() : 0;
  if (rows == 0 || averaged.size() == 0) {
    throw DataError("no character steps to align an OOV token with");
  }
  const std::size_t cols = averaged.cols();
  const std::size_t width = word_row.size();
  if (std::max(cols, width) - std::min(cols, width) > 1) {
    throw DimensionError("word attention has " + std::to_string(width) +
                         " frames but averaged character attention has " +
                         std::to_string(cols));
  }
  const std::size_t shared = std::min(cols, width);
  std::size_t best = 0;
  double best_score = 0.0;
  if (overlaps) overlaps->assign(rows, 0.0);
  for (std::size_t m = 0; m < rows; ++m) {
    double score = 0.0;
    for (std::size_t t = 0; t < shared; ++t) {
      score += word_row[t] * averaged.at(m, t);
    }
    if (overlaps) (*overlaps)[m] = score;
    if (m == 0 || score > best_score) {
      best = m;
      best_score = score;
    }
  }
  return best;
}

Resolution resolve(std::span<const std::string> word_hyp,
                   const AttentionTrace& word_trace,
                   const std::string& char_text,
                   const AttentionTrace& char_trace,
                   const std::string& oov_marker) {
  Resolution out;
  out.words.assign(word_hyp.begin(), word_hyp.end());
  Tensor averaged;
  bool have_chars = !char_trace.rows.empty();
  if (have_chars) averaged = average_adjacent(char_trace);
  for (std::size_t n = 0; n < word_hyp.size(); ++n) {
    if (word_hyp[n] != oov_marker) continue;
    if (n >= word_trace.rows.size()) {
      throw DimensionError("word trace has no row for step " +
                           std::to_string(n));
    }
    AlignmentResult a;
    a.word_step = n;
    a.word = oov_marker;
    if (!have_chars) {
      a.fallback = true;
    } else {
      a.char_step = align_oov(word_trace.rows[n], averaged, &a.overlaps);
      const std::size_t m = a.char_step;
      if (m >= char_text.size() || char_text[m] == ' ') {
        a.fallback = true;
      } else {
        std::size_t begin = m;
        while (begin > 0 && char_text[begin - 1] != ' ') --begin;
        std::size_t end = m;
        while (end < char_text.size() && char_text[end] != ' ') ++end;
        a.word = char_text.substr(begin, end - begin);
      }
    }
    if (a.fallback) ++out.fallbacks;
    out.words[n] = a.word;
    out.alignments.push_back(std::move(a));
  }
  return out;
}

}  // namespace a2w
