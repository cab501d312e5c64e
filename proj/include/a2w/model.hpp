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

// Joint acoustic-to-word / acoustic-to-character attention model.
//
// One BLSTM encoder feeds two location-aware attention decoders: the word
// decoder reads the top of the stack, the character decoder taps an
// intermediate layer before that layer subsamples. Each decoder step
//
//   s_{n-1} = LSTM([embed(y_{n-1}); c_{n-1}], s_{n-2})
//   f_n     = F * alpha_{n-1}
//   e_{n,t} = v . tanh(W s_{n-1} + V h_t + U f_{n,t} + b)
//   alpha_n = softmax(e_n),  c_n = sum_t alpha_{n,t} h_t
//   logits  = Linear([s_{n-1}; c_n])
//
// so the recurrence that consumes token y_{n-1} is evaluated lazily at the
// start of step n. The first step sees y_0 = <sos>, zero LSTM state, a zero
// context and a uniform previous attention.

#ifndef A2W_MODEL_HPP_
#define A2W_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "a2w/graph.hpp"
#include "a2w/layers.hpp"

namespace a2w {

/// One row per emitted token, one column per encoder frame.
struct AttentionTrace {
  std::size_t frames = 0;
  std::vector<std::vector<double>> rows;

  void append(const Tensor& weights);
  std::size_t steps() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
};

struct DecoderConfig {
  std::size_t vocab = 0;
  std::size_t embed_dim = 0;
  std::size_t hidden = 0;
  std::size_t encoder_dim = 0;
  std::size_t attention_dim = 0;
  std::size_t conv_channels = 10;
  std::size_t conv_width = 5;
  std::size_t sos = 0;
  std::size_t eos = 1;
};

struct AttentionDecoder {
  DecoderConfig config;
  Tensor embedding;         // V x E
  LstmCell cell;            // input E + encoder_dim
  Tensor w_state;           // H x A
  Tensor w_encoder;         // encoder_dim x A
  Tensor w_location;        // C x A
  Tensor location_kernels;  // C x w
  Tensor energy_v;          // A x 1
  Tensor energy_bias;       // A
  Linear output;            // (H + encoder_dim) -> V

  static AttentionDecoder create(const DecoderConfig& config,
                                 double init_range, double forget_bias,
                                 std::mt19937_64& rng);
  ParameterList parameters();
};

/// Encoder memory with its attention projection V h_t precomputed.
struct EncodedSource {
  Var memory;     // T' x encoder_dim
  Var projected;  // T' x A
  std::size_t frames = 0;
};

EncodedSource prepare_source(const AttentionDecoder& dec, Var memory);

struct Attention {
  Var context;  // encoder_dim
  Var weights;  // T'
};

Attention attend(const AttentionDecoder& dec, Var s_prev,
                 const EncodedSource& source, Var alpha_prev);

struct DecoderState {
  LstmState lstm;
  Var context;
  Var attention;
};

DecoderState initial_decoder_state(const AttentionDecoder& dec,
                                   const EncodedSource& source);

struct DecodeStep {
  Var logits;
  DecoderState state;
};

DecodeStep decode_step(const AttentionDecoder& dec, const DecoderState& prev,
                       std::size_t y_prev, const EncodedSource& source,
                       const RunMode& mode = {});

struct SequenceLoss {
  Var loss;
  AttentionTrace trace;
};

/// Summed per-step label-smoothed cross entropy of `targets` (which must end
/// with the decoder's eos). With probability `sampling_prob` the previous
/// token fed to a step is the model's own argmax rather than the gold token.
SequenceLoss sequence_nll(const AttentionDecoder& dec, Var memory,
                          std::span<const std::size_t> targets,
                          double sampling_prob, double smoothing,
                          const RunMode& mode = {},
                          std::mt19937_64* sampling_rng = nullptr);

struct ModelConfig {
  std::size_t input_dim = 16;
  std::size_t encoder_layers = 5;
  std::size_t encoder_hidden = 320;
  std::vector<std::size_t> subsample_layers{1, 2, 4};  // 1-based
  std::size_t char_tap_layer = 4;                      // 1-based
  std::size_t word_vocab = 0;
  std::size_t char_vocab = 0;
  std::size_t decoder_hidden = 320;
  std::size_t word_embed = 128;
  std::size_t char_embed = 32;
  std::size_t attention_dim = 320;
  std::size_t conv_channels = 10;
  std::size_t conv_width = 5;
  std::size_t word_sos = 0, word_eos = 1;
  std::size_t char_sos = 0, char_eos = 1;
  double dropout = 0.2;
  double init_range = 0.1;
  double forget_bias = 1.0;
  double lambda = 0.5;

  void validate() const;
};

struct EncoderStack {
  std::vector<BlstmLayer> layers;
  std::size_t char_tap_layer = 0;  // 1-based

  ParameterList parameters();
};

struct Encoding {
  Var word;   // final layer output
  Var chars;  // tap layer output before its subsampling
};

Encoding encode(const EncoderStack& encoder, Var features,
                const RunMode& mode = {});

struct JointModel {
  ModelConfig config;
  EncoderStack encoder;
  AttentionDecoder words;
  AttentionDecoder chars;

  static JointModel create(const ModelConfig& config, std::uint64_t seed);
  /// Stable, ordered parameter list (checkpoint order).
  ParameterList parameters();
};

struct LossOptions {
  double sampling_prob = 0.0;
  double smoothing = 0.0;
  RunMode mode;
  std::mt19937_64* sampling_rng = nullptr;
};

struct JointLoss {
  Var total;
  Var word;   // invalid when lambda == 0
  Var chars;  // invalid when lambda == 1
  AttentionTrace word_trace;
  AttentionTrace char_trace;
};

/// lambda * L_word + (1 - lambda) * L_char on one shared encoding. The
/// branch with zero weight is not evaluated.
JointLoss joint_loss(const JointModel& model, Var features,
                     std::span<const std::size_t> word_targets,
                     std::span<const std::size_t> char_targets,
                     const LossOptions& options = {});

}  // namespace a2w

#endif  // A2W_MODEL_HPP_
