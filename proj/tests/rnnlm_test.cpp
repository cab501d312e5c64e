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

#include "a2w/errors.hpp"
#include "a2w/gradcheck.hpp"
#include "a2w/rnnlm.hpp"
#include "test_support.hpp"

namespace a2w {
namespace {

using testing::max_fd_error;

RnnLm random_lm(std::uint64_t seed, std::size_t vocab = 7,
                std::size_t hidden = 5) {
  LmConfig c;
  c.vocab = vocab;
  c.hidden = hidden;
  c.init_range = 0.5;
  return RnnLm::create(c, seed);
}

RnnLm zero_lm(std::size_t vocab) {
  LmConfig c;
  c.vocab = vocab;
  c.hidden = 4;
  c.init_range = 0.0;
  c.forget_bias = 0.0;
  return RnnLm::create(c, 1);
}

double logsumexp(const Tensor& t) {
  double mx = t[0], z = 0.0;
  for (double v : t.values()) mx = std::max(mx, v);
  for (double v : t.values()) z += std::exp(v - mx);
  return mx + std::log(z);
}

TEST(LmStep, ZeroModelIsUniform) {
  RnnLm lm = zero_lm(6);
  Graph g(false);
  LmStep s = lm_step(lm, 3, lm_zero_state(g, lm));
  for (double v : s.log_probs.value().values()) {
    EXPECT_NEAR(v, -std::log(6.0), 1e-15);
  }
}

TEST(LmStep, LogProbsAreNormalized) {
  RnnLm lm = random_lm(2);
  Graph g(false);
  LmState st = lm_zero_state(g, lm);
  for (std::size_t tok : {0u, 4u, 2u, 6u, 1u}) {
    LmStep s = lm_step(lm, tok, st);
    EXPECT_NEAR(logsumexp(s.log_probs.value()), 0.0, 1e-9);
    st = s.state;
  }
}

TEST(LmStep, StepwiseChainEqualsBatchedForward) {
  RnnLm lm = random_lm(3);
  const std::vector<std::size_t> inputs{0, 3, 5, 2, 2, 6, 1, 0, 4};
  Graph gb(false);
  LmSequence batched = lm_forward(lm, gb, inputs, lm_zero_state(gb, lm));
  const Tensor& rows = batched.log_probs.value();
  Graph gs(false);
  LmState st = lm_zero_state(gs, lm);
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    LmStep s = lm_step(lm, inputs[t], st);
    for (std::size_t k = 0; k < lm.config.vocab; ++k) {
      EXPECT_NEAR(s.log_probs.value()[k], rows.at(t, k), 1e-10);
    }
    st = s.state;
  }
}

TEST(LmStep, ResidualPassesFirstLayerThroughWhenSecondIsZero) {
  RnnLm lm = random_lm(4);
  for (auto& p : lm.second.parameters()) {
    for (double& v : p.tensor->data()) v = 0.0;
  }
  Graph g(false);
  LmStep s = lm_step(lm, 2, lm_zero_state(g, lm));
  LstmState first = lstm_step(lm.first, embed(g.constant(lm.embedding), 2),
                              lstm_zero_state(g, lm.first));
  for (double v : s.state.second.h.value().values()) EXPECT_EQ(v, 0.0);
  const Tensor& h1 = first.h.value();
  std::vector<double> logits(lm.config.vocab);
  for (std::size_t k = 0; k < lm.config.vocab; ++k) {
    double v = lm.output_bias[k];
    for (std::size_t j = 0; j < lm.config.hidden; ++j) {
      v += h1[j] * lm.embedding.at(k, j);
    }
    logits[k] = v;
  }
  const Tensor expected = log_softmax(g.constant(Tensor::vector(logits))).value();
  for (std::size_t k = 0; k < lm.config.vocab; ++k) {
    EXPECT_NEAR(s.log_probs.value()[k], expected[k], 1e-14);
  }
}

TEST(Tying, OneTableServesInputAndOutput) {
  RnnLm lm = random_lm(5, 9, 4);
  std::size_t vocab_sized = 0;
  for (const auto& p : lm.parameters()) {
    if (p.tensor->shape() == Shape{9, 4} || p.tensor->shape() == Shape{4, 9}) {
      ++vocab_sized;
      EXPECT_EQ(p.tensor, &lm.embedding);
    }
  }
  EXPECT_EQ(vocab_sized, 1u);
}

TEST(Tying, SharedRowGradientMatchesFiniteDifferences) {
  RnnLm lm = random_lm(6);
  const std::vector<std::size_t> inputs{0, 3, 3, 5};
  const std::vector<std::size_t> picks{3, 7 + 3, 14 + 5, 21 + 1};
  // Token 3 is both an input and a target, so its row feeds both paths.
  EXPECT_LT(max_fd_error({{"embedding", &lm.embedding}},
                         [&](Graph& g) {
                           LmSequence s =
                               lm_forward(lm, g, inputs, lm_zero_state(g, lm));
                           return scale(sum(gather(s.log_probs, picks)), -1.0);
                         }),
            1e-4);
}

TEST(Tying, WholeModelGradientMatchesFiniteDifferences) {
  const GradCheckReport r = gradcheck_language_model(1);
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst;
}

TEST(SequenceLogprob, EmptySequenceIsZero) {
  EXPECT_EQ(sequence_logprob(random_lm(1), {}), 0.0);
}

TEST(SequenceLogprob, OneTokenUnderUniformModel) {
  const std::vector<std::size_t> tok{4};
  EXPECT_NEAR(sequence_logprob(zero_lm(5), tok), -std::log(5.0), 1e-15);
}

TEST(SequenceLogprob, EqualsSumOfStepLogProbs) {
  RnnLm lm = random_lm(7);
  const std::vector<std::size_t> tokens{3, 2, 6, 1};
  Graph g(false);
  LmState st = lm_zero_state(g, lm);
  std::size_t prev = lm.config.sos;
  double total = 0.0;
  for (std::size_t tok : tokens) {
    LmStep s = lm_step(lm, prev, st);
    total += s.log_probs.value()[tok];
    st = s.state;
    prev = tok;
  }
  EXPECT_NEAR(sequence_logprob(lm, tokens), total, 1e-12);
}

TEST(LmStream, WrapsEverySentence) {
  const std::vector<std::vector<std::size_t>> s{{4, 5}, {6}};
  EXPECT_EQ(lm_stream(s, 0, 1), (std::vector<std::size_t>{0, 4, 5, 1, 0, 6, 1}));
}

TEST(LmForward, OutOfVocabularyIdThrows) {
  RnnLm lm = random_lm(1);
  Graph g(false);
  const std::vector<std::size_t> bad{0, 7};
  EXPECT_THROW(lm_forward(lm, g, bad, lm_zero_state(g, lm)), DimensionError);
}

TEST(Perplexity, WindowAtLeastStreamLengthEqualsFullBptt) {
  RnnLm lm = random_lm(8);
  const std::vector<std::vector<std::size_t>> text{{3, 4, 5}, {6, 2}, {4}};
  const double full = lm_perplexity(lm, text, 1000);
  EXPECT_EQ(lm_perplexity(lm, text, 11), full);
  // Carried state makes the forward pass independent of the window.
  EXPECT_NEAR(lm_perplexity(lm, text, 2), full, 1e-12);
}

TEST(Perplexity, EmptyTextIsADataError) {
  EXPECT_THROW(lm_perplexity(random_lm(1), {}, 10), DataError);
}

TEST(TrainLm, WindowAtLeastStreamLengthEqualsFullBptt) {
  const std::vector<std::vector<std::size_t>> text{{3, 4, 5}, {6, 2}};
  std::vector<RnnLm> models;
  for (std::size_t bptt : {9u, 100u}) {  // the stream has 9 tokens
    models.push_back(random_lm(9));
    LmTrainConfig c;
    c.bptt = bptt;
    c.max_epochs = 2;
    train_lm(models.back(), text, {}, c);
  }
  EXPECT_EQ(models[0].embedding.values(), models[1].embedding.values());
}

TEST(TrainLm, MemorizesARepeatedSentence) {
  const std::vector<std::vector<std::size_t>> text(30, {2, 3, 4, 5, 6});
  RnnLm lm = random_lm(10, 7, 16);
  LmTrainConfig c;
  c.bptt = 20;
  c.max_epochs = 10;
  c.learning_rate = 1e-2;
  const auto stats = train_lm(lm, text, text, c);
  EXPECT_LT(stats.back().valid_perplexity, 1.1);
}

TEST(TrainLm, TiedBufferIsTheOnlyProjectionThroughoutTraining) {
  const std::vector<std::vector<std::size_t>> text(5, {2, 3, 4});
  RnnLm lm = random_lm(11);
  const double* buffer = lm.embedding.data().data();
  LmTrainConfig c;
  c.bptt = 4;
  c.max_epochs = 3;
  train_lm(lm, text, {}, c, [&](const LmEpochStats&) {
    EXPECT_EQ(lm.embedding.data().data(), buffer);
    Graph g(false);
    LmStep s = lm_step(lm, 2, lm_zero_state(g, lm));
    const Tensor& h1 = s.state.first.h.value();
    const Tensor& h2 = s.state.second.h.value();
    std::vector<double> logits(7);
    for (std::size_t k = 0; k < 7; ++k) {
      double v = 0.0;
      for (std::size_t j = 0; j < 5; ++j) v += (h1[j] + h2[j]) * lm.embedding.at(k, j);
      logits[k] = v + lm.output_bias[k];
    }
    const Tensor lp = log_softmax(g.constant(Tensor::vector(logits))).value();
    EXPECT_EQ(lp, s.log_probs.value());
  });
}

TEST(TrainLm, EmptyTextIsADataError) {
  RnnLm lm = random_lm(1);
  EXPECT_THROW(train_lm(lm, {}, {}, LmTrainConfig{}), DataError);
}

}  // namespace
}  // namespace a2w
