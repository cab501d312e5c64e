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

#include "a2w/layers.hpp"

#include <string>
#include <vector>

#include "a2w/errors.hpp"

namespace a2w {

Var apply_dropout(Var x, const RunMode& mode) {
  if (!mode.stochastic()) return x;
  return dropout(x, mode.dropout, *mode.rng);
}

LstmCell LstmCell::create(std::size_t input_dim, std::size_t hidden,
                          double init_range, double forget_bias,
                          std::mt19937_64& rng) {
  LstmCell cell;
  cell.input_dim = input_dim;
  cell.hidden = hidden;
  cell.w_input = Tensor::uniform({input_dim, 4 * hidden}, init_range, rng);
  cell.w_hidden = Tensor::uniform({hidden, 4 * hidden}, init_range, rng);
  cell.bias = Tensor::uniform({4 * hidden}, init_range, rng);
  for (std::size_t j = 0; j < hidden; ++j) cell.bias[hidden + j] = forget_bias;
  return cell;
}

ParameterList LstmCell::parameters() {
  return {{"w_input", &w_input}, {"w_hidden", &w_hidden}, {"bias", &bias}};
}

LstmState lstm_zero_state(Graph& g, const LstmCell& cell) {
  return {g.constant(Tensor({cell.hidden})), g.constant(Tensor({cell.hidden}))};
}

namespace {

LstmState split_state(Var hc, std::size_t hidden) {
  return {slice(hc, 0, hidden), slice(hc, hidden, hidden)};
}

}  // namespace

LstmState lstm_step(const LstmCell& cell, Var x, const LstmState& prev) {
  Graph& g = *x.graph;
  if (x.size() != cell.input_dim || prev.h.size() != cell.hidden ||
      prev.c.size() != cell.hidden) {
    throw DimensionError("lstm_step: input " + shape_string(x.shape()) +
                         " / state " + shape_string(prev.h.shape()) +
                         " do not fit cell (" + std::to_string(cell.input_dim) +
                         ", " + std::to_string(cell.hidden) + ")");
  }
  Var pre = add(add(matmul(x, g.parameter(cell.w_input)),
                    matmul(prev.h, g.parameter(cell.w_hidden))),
                g.parameter(cell.bias));
  return split_state(lstm_pointwise(pre, prev.c), cell.hidden);
}

Var lstm_sequence(const LstmCell& cell, Var xs, bool reverse) {
  Graph& g = *xs.graph;
  const Tensor& x = xs.value();
  if (x.rank() != 2 || x.rows() == 0) {
    throw DimensionError("lstm_sequence needs a non-empty T x d matrix");
  }
  if (x.cols() != cell.input_dim) {
    throw DimensionError("lstm_sequence: frame dim " + std::to_string(x.cols()) +
                         " != cell input " + std::to_string(cell.input_dim));
  }
  const std::size_t steps = x.rows();
  // Input projections for all frames at once.
  Var projected = add(matmul(xs, g.parameter(cell.w_input)),
                      g.parameter(cell.bias));
  Var w_hidden = g.parameter(cell.w_hidden);
  LstmState state = lstm_zero_state(g, cell);
  std::vector<Var> outputs(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const std::size_t t = reverse ? steps - 1 - k : k;
    Var pre = add(row(projected, t), matmul(state.h, w_hidden));
    state = split_state(lstm_pointwise(pre, state.c), cell.hidden);
    outputs[t] = state.h;
  }
  return stack_rows(outputs);
}

LstmUnroll lstm_unroll(const LstmCell& cell, Var xs, const LstmState& init) {
  Graph& g = *xs.graph;
  const Tensor& x = xs.value();
  if (x.rank() != 2 || x.rows() == 0 || x.cols() != cell.input_dim) {
    throw DimensionError("lstm_unroll: bad input " + shape_string(x.shape()));
  }
  Var projected = add(matmul(xs, g.parameter(cell.w_input)),
                      g.parameter(cell.bias));
  Var w_hidden = g.parameter(cell.w_hidden);
  LstmState state = init;
  std::vector<Var> outputs(x.rows());
  for (std::size_t t = 0; t < x.rows(); ++t) {
    Var pre = add(row(projected, t), matmul(state.h, w_hidden));
    state = split_state(lstm_pointwise(pre, state.c), cell.hidden);
    outputs[t] = state.h;
  }
  return {stack_rows(outputs), state};
}

BlstmLayer BlstmLayer::create(std::size_t input_dim, std::size_t hidden,
                              bool subsample, double init_range,
                              double forget_bias, std::mt19937_64& rng) {
  BlstmLayer layer;
  layer.forward =
      LstmCell::create(input_dim, hidden, init_range, forget_bias, rng);
  layer.backward =
      LstmCell::create(input_dim, hidden, init_range, forget_bias, rng);
  layer.subsample = subsample;
  return layer;
}

ParameterList BlstmLayer::parameters() {
  ParameterList out;
  append_prefixed(out, "fwd.", forward.parameters());
  append_prefixed(out, "bwd.", backward.parameters());
  return out;
}

Var decimate(Var xs) {
  const std::size_t t = xs.value().rows();
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < t; i += 2) keep.push_back(i);
  return take_rows(xs, keep);
}

BlstmOutput blstm_forward(const BlstmLayer& layer, Var xs) {
  if (xs.value().rank() != 2 || xs.value().rows() == 0) {
    throw DimensionError("blstm_forward on an empty sequence");
  }
  Var fwd = lstm_sequence(layer.forward, xs, false);
  Var bwd = lstm_sequence(layer.backward, xs, true);
  Var full = concat_cols(fwd, bwd);
  return {full, layer.subsample ? decimate(full) : full};
}

Var embed(Var table, std::size_t id) {
  if (id >= table.value().rows()) {
    throw DimensionError("token id " + std::to_string(id) +
                         " outside embedding table of " +
                         std::to_string(table.value().rows()) + " rows");
  }
  return row(table, id);
}

Linear Linear::create(std::size_t in, std::size_t out, double init_range,
                      std::mt19937_64& rng) {
  return {Tensor::uniform({in, out}, init_range, rng),
          Tensor::uniform({out}, init_range, rng)};
}

Var Linear::apply(Var x) const {
  Graph& g = *x.graph;
  return add(matmul(x, g.parameter(weight)), g.parameter(bias));
}

ParameterList Linear::parameters() {
  return {{"weight", &weight}, {"bias", &bias}};
}

}  // namespace a2w
