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


#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "a2w/errors.hpp"
#include "a2w/resolver.hpp"

namespace a2w {
namespace {

const std::string kMarker = "<unk>";

AttentionTrace one_hot_trace(std::size_t frames,
                             const std::vector<std::size_t>& hot) {
  AttentionTrace t;
  t.frames = frames;
  for (std::size_t f : hot) {
    std::vector<double> row(frames, 0.0);
    row[f] = 1.0;
    t.rows.push_back(row);
  }
  return t;
}

// Character step m attends frame 2m, so its averaged row peaks at column m.
AttentionTrace diagonal_char_trace(std::size_t steps) {
  std::vector<std::size_t> hot;
  for (std::size_t m = 0; m < steps; ++m) hot.push_back(2 * m);
  return one_hot_trace(2 * steps, hot);
}

TEST(AverageAdjacent, EqualPairs) {
  const Tensor out = average_adjacent(Tensor::matrix(1, 4, {0.2, 0.2, 0.3, 0.3}));
  EXPECT_NEAR(out[0], 0.2, 1e-15);
  EXPECT_NEAR(out[1], 0.3, 1e-15);
}

TEST(AverageAdjacent, MassOnFirstFrame) {
  const Tensor out = average_adjacent(Tensor::matrix(1, 4, {1, 0, 0, 0}));
  EXPECT_EQ(out.values(), (std::vector<double>{0.5, 0.0}));
}

TEST(AverageAdjacent, OddWidthPadsWithZero) {
  const Tensor out = average_adjacent(Tensor::matrix(1, 3, {0.4, 0.4, 0.2}));
  ASSERT_EQ(out.shape(), (Shape{1, 2}));
  EXPECT_NEAR(out[0], 0.4, 1e-15);
  EXPECT_NEAR(out[1], 0.1, 1e-15);
}

TEST(AverageAdjacent, HalvesTotalMassForEvenWidth) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(5 * 8);
  for (double& x : v) x = u(rng);
  const Tensor in = Tensor::matrix(5, 8, v);
  const Tensor out = average_adjacent(in);
  double a = 0.0, b = 0.0;
  for (double x : in.values()) a += x;
  for (double x : out.values()) b += x;
  EXPECT_NEAR(b, a / 2.0, 1e-12);
}

TEST(AlignOov, DisjointSupports) {
  const std::vector<double> word{0, 0, 1};
  const Tensor chars = Tensor::matrix(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  EXPECT_EQ(align_oov(word, chars), 2u);
}

TEST(AlignOov, TiesGoToFirstStep) {
  const std::vector<double> word{0.2, 0.5, 0.3};
  const Tensor chars = Tensor::matrix(3, 3, {0.1, 0.8, 0.1, 0.1, 0.8, 0.1,
                                             0.1, 0.8, 0.1});
  EXPECT_EQ(align_oov(word, chars), 0u);
}

TEST(AlignOov, MatchesBruteForceOnRandomInstances) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> coarse(0, 3);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> word(8), chars(5 * 8);
    // Coarse values make exact ties common.
    const bool tied = trial % 2 == 0;
    for (double& x : word) x = tied ? coarse(rng) : u(rng);
    for (double& x : chars) x = tied ? coarse(rng) : u(rng);
    std::size_t best = 0;
    double best_score = -1.0;
    for (std::size_t m = 0; m < 5; ++m) {
      double s = 0.0;
      for (std::size_t t = 0; t < 8; ++t) s += word[t] * chars[m * 8 + t];
      if (s > best_score) {
        best_score = s;
        best = m;
      }
    }
    EXPECT_EQ(align_oov(word, Tensor::matrix(5, 8, chars)), best);
  }
}

TEST(AlignOov, PadsTheShorterSide) {
  const std::vector<double> word{0, 0, 0, 1};
  const Tensor chars = Tensor::matrix(2, 3, {1, 0, 0, 0, 0, 1});
  std::vector<double> overlaps;
  EXPECT_EQ(align_oov(word, chars, &overlaps), 0u);
  EXPECT_EQ(overlaps, (std::vector<double>{0.0, 0.0}));
  const std::vector<double> short_word{0, 1};
  EXPECT_EQ(align_oov(short_word, chars), 0u);
}

TEST(AlignOov, Errors) {
  const std::vector<double> word{1, 0};
  EXPECT_THROW(align_oov(word, Tensor({0, 2})), DataError);
  EXPECT_THROW(align_oov(word, Tensor({2, 5})), DimensionError);
}

TEST(Resolve, ReplacesOovWithCoveringCharacterToken) {
  const std::string text = "the zyx sat";
  const std::vector<std::string> hyp{"the", kMarker, "sat"};
  // Word step 1 looks at frame 5, the 'y' of "zyx".
  const AttentionTrace words = one_hot_trace(text.size(), {1, 5, 9});
  const Resolution r =
      resolve(hyp, words, text, diagonal_char_trace(text.size()), kMarker);
  EXPECT_EQ(r.words, (std::vector<std::string>{"the", "zyx", "sat"}));
  ASSERT_EQ(r.alignments.size(), 1u);
  EXPECT_EQ(r.alignments[0].word_step, 1u);
  EXPECT_EQ(r.alignments[0].char_step, 5u);
  EXPECT_EQ(r.alignments[0].word, "zyx");
  EXPECT_FALSE(r.alignments[0].fallback);
  EXPECT_EQ(r.fallbacks, 0u);
}

TEST(Resolve, NoOovLeavesHypothesisAlone) {
  const std::string text = "the cat sat";
  const std::vector<std::string> hyp{"the", "cat", "sat"};
  const Resolution r = resolve(hyp, one_hot_trace(11, {1, 5, 9}), text,
                               diagonal_char_trace(11), kMarker);
  EXPECT_EQ(r.words, hyp);
  EXPECT_TRUE(r.alignments.empty());
}

TEST(Resolve, LandingOnASpaceFallsBack) {
  const std::string text = "the zyx sat";
  const std::vector<std::string> hyp{"the", kMarker, "sat"};
  const Resolution r = resolve(hyp, one_hot_trace(11, {1, 3, 9}), text,
                               diagonal_char_trace(11), kMarker);
  EXPECT_EQ(r.words, hyp);
  ASSERT_EQ(r.alignments.size(), 1u);
  EXPECT_TRUE(r.alignments[0].fallback);
  EXPECT_EQ(r.alignments[0].char_step, 3u);
  EXPECT_EQ(r.fallbacks, 1u);
}

TEST(Resolve, LandingPastTheTextFallsBack) {
  // Two character steps beyond the text, e.g. the eos step.
  const std::string text = "ab";
  const std::vector<std::string> hyp{kMarker};
  const Resolution r = resolve(hyp, one_hot_trace(4, {3}), text,
                               diagonal_char_trace(4), kMarker);
  EXPECT_EQ(r.words, hyp);
  EXPECT_EQ(r.fallbacks, 1u);
}

TEST(Resolve, PreservesLengthAndSubstitutesSubstrings) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> letter(0, 3);
  std::uniform_int_distribution<int> coin(0, 2);
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    const std::size_t m = 6 + trial % 9;
    for (std::size_t i = 0; i < m; ++i) {
      text += letter(rng) == 0 ? ' ' : static_cast<char>('a' + letter(rng));
    }
    AttentionTrace chars;
    chars.frames = 2 * m + 1;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<double> row(chars.frames);
      for (double& x : row) x = u(rng);
      chars.rows.push_back(row);
    }
    const std::size_t n = 4;
    std::vector<std::string> hyp;
    AttentionTrace words;
    words.frames = m + 1;
    for (std::size_t i = 0; i < n; ++i) {
      hyp.push_back(coin(rng) == 0 ? kMarker : "w" + std::to_string(i));
      std::vector<double> row(words.frames);
      for (double& x : row) x = u(rng);
      words.rows.push_back(row);
    }
    const Resolution r = resolve(hyp, words, text, chars, kMarker);
    ASSERT_EQ(r.words.size(), hyp.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (hyp[i] != kMarker) EXPECT_EQ(r.words[i], hyp[i]);
    }
    for (const auto& a : r.alignments) {
      if (a.fallback) continue;
      EXPECT_EQ(a.word.find(' '), std::string::npos);
      EXPECT_FALSE(a.word.empty());
      EXPECT_NE(text.find(a.word), std::string::npos);
      EXPECT_EQ(r.words[a.word_step], a.word);
    }
  }
}

}  // namespace
}  // namespace a2w
