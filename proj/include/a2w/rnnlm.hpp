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

#ifndef A2W_RNNLM_HPP_
#define A2W_RNNLM_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "a2w/graph.hpp"
#include "a2w/layers.hpp"

namespace a2w {

struct LmConfig {
  std::size_t vocab = 0;
  std::size_t hidden = 512;  // also the embedding size (tied)
  double init_range = 0.1;
  double forget_bias = 1.0;
  double dropout = 0.0;
  std::size_t sos = 0;
  std::size_t eos = 1;
};

/// Two-layer LSTM language model. The layer-1 output is added to the layer-2
/// output, and the embedding table doubles as the output projection:
/// logits = (h1 + h2) E^T + b.
struct RnnLm {
  LmConfig config;
  Tensor embedding;  // V x H, shared by the input and output paths
  LstmCell first;
  LstmCell second;
  Tensor output_bias;  // V

  static RnnLm create(const LmConfig& config, std::uint64_t seed);
  ParameterList parameters();
};

struct LmState {
  LstmState first;
  LstmState second;
};

LmState lm_zero_state(Graph& g, const RnnLm& lm);

struct LmStep {
  Var log_probs;  // V
  LmState state;
};

LmStep lm_step(const RnnLm& lm, std::size_t y_prev, const LmState& state);

struct LmSequence {
  Var log_probs;  // T x V, row t predicts the token after inputs[t]
  LmState state;
};

/// Whole-window forward with batched input and output projections.
LmSequence lm_forward(const RnnLm& lm, Graph& g,
                      std::span<const std::size_t> inputs, const LmState& init,
                      const RunMode& mode = {});

/// log P(tokens) from the zero state, with <sos> as the first input.
double sequence_logprob(const RnnLm& lm, std::span<const std::size_t> tokens);

/// Concatenates sentences as <sos> w1 .. wn <eos> <sos> ... The transition
/// into <sos> is never scored.
std::vector<std::size_t> lm_stream(
    std::span<const std::vector<std::size_t>> sentences, std::size_t sos,
    std::size_t eos);

struct LmTrainConfig {
  std::size_t bptt = 100;
  std::size_t max_epochs = 10;
  double learning_rate = 1e-3;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
};

struct LmEpochStats {
  std::size_t epoch = 0;
  double train_perplexity = 0.0;
  double valid_perplexity = 0.0;
  double seconds = 0.0;
};

/// Truncated-BPTT training on the concatenated stream: the recurrent state
/// is carried from window to window, gradients stop at window boundaries.
/// Parameters of the best validation epoch are kept.
std::vector<LmEpochStats> train_lm(
    RnnLm& lm, std::span<const std::vector<std::size_t>> train,
    std::span<const std::vector<std::size_t>> valid,
    const LmTrainConfig& config,
    const std::function<void(const LmEpochStats&)>& on_epoch = {});

/// Perplexity over the concatenated stream, windowed like training.
double lm_perplexity(const RnnLm& lm,
                     std::span<const std::vector<std::size_t>> sentences,
                     std::size_t bptt);

}  // namespace a2w

#endif  // A2W_RNNLM_HPP_
