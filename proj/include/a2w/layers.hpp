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

#ifndef A2W_LAYERS_HPP_
#define A2W_LAYERS_HPP_

#include <cstddef>
#include <random>

#include "a2w/graph.hpp"
#include "a2w/parameters.hpp"

namespace a2w {

/// Training-time behaviour shared by every layer. The default is evaluation:
/// no dropout, no randomness.
struct RunMode {
  double dropout = 0.0;
  std::mt19937_64* rng = nullptr;

  bool stochastic() const { return dropout > 0.0 && rng != nullptr; }
};

Var apply_dropout(Var x, const RunMode& mode);

/// Single LSTM cell; gate blocks are ordered input, forget, candidate, output
/// along the 4H axis.
struct LstmCell {
  std::size_t input_dim = 0;
  std::size_t hidden = 0;
  Tensor w_input;   // input_dim x 4H
  Tensor w_hidden;  // H x 4H
  Tensor bias;      // 4H

  static LstmCell create(std::size_t input_dim, std::size_t hidden,
                         double init_range, double forget_bias,
                         std::mt19937_64& rng);
  ParameterList parameters();
};

struct LstmState {
  Var h;
  Var c;
};

LstmState lstm_zero_state(Graph& g, const LstmCell& cell);
LstmState lstm_step(const LstmCell& cell, Var x, const LstmState& prev);
struct LstmUnroll {
  Var outputs;  // T x H, row t = hidden state after frame t
  LstmState final;
};

/// Left-to-right unroll from an explicit initial state.
LstmUnroll lstm_unroll(const LstmCell& cell, Var xs, const LstmState& init);

/// Runs `cell` over the rows of `xs` (T x d), right to left when `reverse`.
/// Row t of the result is the hidden state after consuming frame t.
Var lstm_sequence(const LstmCell& cell, Var xs, bool reverse);

struct BlstmLayer {
  LstmCell forward;
  LstmCell backward;
  bool subsample = false;

  static BlstmLayer create(std::size_t input_dim, std::size_t hidden,
                           bool subsample, double init_range,
                           double forget_bias, std::mt19937_64& rng);
  std::size_t output_dim() const { return 2 * forward.hidden; }
  ParameterList parameters();
};

struct BlstmOutput {
  Var full;    // T x 2H, before subsampling
  Var output;  // T' x 2H
};

BlstmOutput blstm_forward(const BlstmLayer& layer, Var xs);

/// Keeps rows 0, 2, 4, ... (ceil(T/2) rows).
Var decimate(Var xs);

/// Embedding lookup; throws DimensionError for ids outside the table.
Var embed(Var table, std::size_t id);

/// y = x W + b with W stored in x out.
struct Linear {
  Tensor weight;
  Tensor bias;

  static Linear create(std::size_t in, std::size_t out, double init_range,
                       std::mt19937_64& rng);
  Var apply(Var x) const;
  ParameterList parameters();
};

}  // namespace a2w

#endif  // A2W_LAYERS_HPP_
