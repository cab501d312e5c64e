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

#include <cmath>
#include <random>
#include <vector>

#include "a2w/beam_search.hpp"
#include "a2w/errors.hpp"
#include "test_support.hpp"

namespace a2w {
namespace {

using testing::random_tensor;

AttentionDecoder random_decoder(std::uint64_t seed, std::size_t vocab,
                                double range = 1.0) {
  DecoderConfig dc;
  dc.vocab = vocab;
  dc.embed_dim = 3;
  dc.hidden = 4;
  dc.encoder_dim = 3;
  dc.attention_dim = 4;
  dc.conv_channels = 2;
  dc.conv_width = 3;
  std::mt19937_64 rng(seed);
  return AttentionDecoder::create(dc, range, 1.0, rng);
}

RnnLm random_lm(std::uint64_t seed, std::size_t vocab) {
  LmConfig c;
  c.vocab = vocab;
  c.hidden = 4;
  c.init_range = 0.8;
  return RnnLm::create(c, seed);
}

Tensor random_memory(std::uint64_t seed, std::size_t frames) {
  std::mt19937_64 rng(seed);
  return random_tensor({frames, 3}, rng);
}

FusionConfig exhaustive_config() {
  FusionConfig c;
  c.beam_size = 64;
  c.lm_weight = 0.0;
  c.coverage_weight = 0.0;
  c.max_len_factor = 1.5;  // two frames -> three steps
  return c;
}

bool ranks_before(double ta, const std::vector<std::size_t>& a, double tb,
                  const std::vector<std::size_t>& b) {
  if (ta != tb) return ta > tb;
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

TEST(Coverage, CountsFramesAboveThreshold) {
  AttentionTrace t;
  t.frames = 2;
  t.rows = {{0.6, 0.4}, {0.1, 0.9}};
  EXPECT_EQ(coverage(t, 0.0), 2);
  EXPECT_EQ(coverage(t, 1.0), 1);
}

TEST(Coverage, EmptyTraceIsZero) {
  AttentionTrace t;
  t.frames = 5;
  EXPECT_EQ(coverage(t, 0.0), 0);
}

TEST(FusionConfig, RejectsInvalidValues) {
  FusionConfig c;
  c.beam_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = FusionConfig{};
  c.lm_weight = -0.1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = FusionConfig{};
  c.coverage_threshold = -1;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(FusedScore, Decomposition) {
  FusionConfig c;
  c.lm_weight = 0.2;
  c.coverage_weight = 0.6;
  EXPECT_DOUBLE_EQ(fused_score(-3.0, -5.0, 4, c, true), -3.0 - 1.0 + 2.4);
  EXPECT_DOUBLE_EQ(fused_score(-3.0, -5.0, 4, c, false), -3.0 + 2.4);
}

TEST(BeamSearch, LanguageModelVocabularyMismatchIsRejected) {
  AttentionDecoder dec = random_decoder(1, 5);
  RnnLm lm = random_lm(1, 6);
  EXPECT_THROW(beam_search(dec, &lm, random_memory(1, 3), FusionConfig{}),
               ConfigError);
}

TEST(BeamSearch, WideBeamEqualsExhaustiveArgmax) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    AttentionDecoder dec = random_decoder(seed, 4, 1.5);
    const Tensor memory = random_memory(seed + 100, 2);
    std::vector<std::size_t> best;
    double best_score = -1e300;
    std::vector<std::vector<std::size_t>> all;
    for (std::size_t len = 1; len <= 3; ++len) {
      const std::size_t body = len - 1;
      for (std::size_t code = 0; code < (1u << body); ++code) {
        std::vector<std::size_t> seq;
        for (std::size_t k = 0; k < body; ++k) seq.push_back(2 + ((code >> k) & 1));
        seq.push_back(dec.config.eos);
        all.push_back(seq);
      }
    }
    for (const auto& seq : all) {
      const double s = teacher_forced_score(dec, memory, seq).log_prob;
      if (best.empty() || ranks_before(s, seq, best_score, best)) {
        best = seq;
        best_score = s;
      }
    }
    const BeamResult r = beam_search(dec, nullptr, memory, exhaustive_config());
    ASSERT_TRUE(r.finished);
    EXPECT_EQ(r.hypotheses.front().tokens, best) << "seed " << seed;
  }
}

TEST(BeamSearch, EveryScoreRecomputesFromItsParts) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    AttentionDecoder dec = random_decoder(seed, 6);
    RnnLm lm = random_lm(seed, 6);
    const Tensor memory = random_memory(seed, 4);
    FusionConfig c;
    c.beam_size = 4;
    c.lm_weight = 0.3;
    c.coverage_weight = 0.5;
    c.coverage_threshold = 0.2;
    const BeamResult r = beam_search(dec, &lm, memory, c);
    for (const auto& h : r.hypotheses) {
      const ForcedScore am = teacher_forced_score(dec, memory, h.tokens);
      const double lmp = sequence_logprob(lm, h.tokens);
      const int cov = coverage(am.trace, c.coverage_threshold);
      EXPECT_NEAR(am.log_prob, h.log_p_am, 1e-9);
      EXPECT_NEAR(lmp, h.log_p_lm, 1e-9);
      EXPECT_EQ(cov, h.coverage);
      EXPECT_NEAR(am.log_prob + 0.3 * lmp + 0.5 * cov, h.total, 1e-9);
    }
  }
}

TEST(BeamSearch, ZeroLmWeightMatchesNoLm) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    AttentionDecoder dec = random_decoder(seed, 6);
    RnnLm lm = random_lm(seed + 7, 6);
    const Tensor memory = random_memory(seed, 5);
    FusionConfig c;
    c.lm_weight = 0.0;
    const BeamResult with = beam_search(dec, &lm, memory, c);
    const BeamResult without = beam_search(dec, nullptr, memory, c);
    EXPECT_EQ(with.hypotheses.front().tokens, without.hypotheses.front().tokens);
  }
}

TEST(BeamSearch, WiderBeamNeverScoresWorse) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    AttentionDecoder dec = random_decoder(seed, 5, 1.5);
    const Tensor memory = random_memory(seed, 3);
    FusionConfig c;
    c.coverage_weight = 0.0;
    double previous = -1e300;
    for (std::size_t beam : {1u, 2u, 4u, 8u, 64u}) {
      c.beam_size = beam;
      const BeamResult r = beam_search(dec, nullptr, memory, c);
      if (!r.finished) continue;
      EXPECT_GE(r.hypotheses.front().total, previous)
          << "seed " << seed << " beam " << beam;
      previous = r.hypotheses.front().total;
    }
  }
}

TEST(BeamSearch, EqualTotalsRankLexicographically) {
  AttentionDecoder dec = random_decoder(3, 4);
  for (double& v : dec.output.weight.data()) v = 0.0;
  for (double& v : dec.output.bias.data()) v = 0.0;
  dec.output.bias[dec.config.eos] = -2.0;
  const BeamResult r =
      beam_search(dec, nullptr, random_memory(3, 2), exhaustive_config());
  ASSERT_GE(r.hypotheses.size(), 3u);
  EXPECT_EQ(r.hypotheses[1].tokens, (std::vector<std::size_t>{2, 1}));
  EXPECT_EQ(r.hypotheses[2].tokens, (std::vector<std::size_t>{3, 1}));
  EXPECT_EQ(r.hypotheses[1].total, r.hypotheses[2].total);
  for (std::size_t k = 1; k < r.hypotheses.size(); ++k) {
    const auto& a = r.hypotheses[k - 1];
    const auto& b = r.hypotheses[k];
    EXPECT_TRUE(ranks_before(a.total, a.tokens, b.total, b.tokens));
  }
}

TEST(BeamSearch, NeverEmitsStartToken) {
  AttentionDecoder dec = random_decoder(4, 4);
  for (double& v : dec.output.weight.data()) v = 0.0;
  for (double& v : dec.output.bias.data()) v = 0.0;
  dec.output.bias[dec.config.sos] = 50.0;
  const BeamResult r =
      beam_search(dec, nullptr, random_memory(4, 2), exhaustive_config());
  for (const auto& h : r.hypotheses) {
    for (std::size_t t : h.tokens) EXPECT_NE(t, dec.config.sos);
  }
}

TEST(BeamSearch, ReportsUnfinishedSearch) {
  AttentionDecoder dec = random_decoder(5, 4);
  dec.output.bias[dec.config.eos] = -100.0;
  FusionConfig c;
  c.beam_size = 2;
  const BeamResult r = beam_search(dec, nullptr, random_memory(5, 2), c);
  EXPECT_FALSE(r.finished);
  ASSERT_FALSE(r.hypotheses.empty());
  EXPECT_FALSE(r.hypotheses.front().finished);
  EXPECT_EQ(r.hypotheses.front().tokens.size(), 3u);
}

TEST(GreedyDecode, DeterministicAndNormalized) {
  AttentionDecoder dec = random_decoder(6, 7);
  const Tensor memory = random_memory(6, 6);
  const GreedyResult a = greedy_decode(dec, memory, 12);
  const GreedyResult b = greedy_decode(dec, memory, 12);
  EXPECT_EQ(a.tokens, b.tokens);
  EXPECT_EQ(a.trace.rows, b.trace.rows);
  for (const auto& row : a.trace.rows) {
    double total = 0.0;
    for (double v : row) total += v;
    EXPECT_NEAR(total, 1.0, 1e-6);
  }
}

TEST(GreedyDecode, EqualsBeamOfOne) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    AttentionDecoder dec = random_decoder(seed, 6, 1.5);
    const Tensor memory = random_memory(seed, 4);
    FusionConfig c;
    c.beam_size = 1;
    c.coverage_weight = 0.0;
    c.max_len_factor = 2.0;
    const BeamResult beam = beam_search(dec, nullptr, memory, c);
    const GreedyResult greedy = greedy_decode(dec, memory, 8);
    std::vector<std::size_t> expected = greedy.tokens;
    if (greedy.finished) expected.push_back(dec.config.eos);
    EXPECT_EQ(beam.hypotheses.front().tokens, expected) << "seed " << seed;
    EXPECT_EQ(beam.finished, greedy.finished);
  }
}

}  // namespace
}  // namespace a2w
