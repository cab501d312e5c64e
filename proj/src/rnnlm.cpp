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

#include "a2w/rnnlm.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "a2w/errors.hpp"
#include "a2w/trainer.hpp"

namespace a2w {

RnnLm RnnLm::create(const LmConfig& config, std::uint64_t seed) {
  if (config.vocab == 0 || config.hidden == 0) {
    throw ConfigError("language model sizes must be positive");
  }
  std::mt19937_64 rng(seed);
  RnnLm lm;
  lm.config = config;
  lm.embedding =
      Tensor::uniform({config.vocab, config.hidden}, config.init_range, rng);
  lm.first = LstmCell::create(config.hidden, config.hidden, config.init_range,
                              config.forget_bias, rng);
  lm.second = LstmCell::create(config.hidden, config.hidden, config.init_range,
                               config.forget_bias, rng);
  lm.output_bias = Tensor::uniform({config.vocab}, config.init_range, rng);
  return lm;
}

ParameterList RnnLm::parameters() {
  ParameterList out{{"embedding", &embedding}};
  append_prefixed(out, "lstm1.", first.parameters());
  append_prefixed(out, "lstm2.", second.parameters());
  out.push_back({"output_bias", &output_bias});
  return out;
}

LmState lm_zero_state(Graph& g, const RnnLm& lm) {
  return {lstm_zero_state(g, lm.first), lstm_zero_state(g, lm.second)};
}

LmStep lm_step(const RnnLm& lm, std::size_t y_prev, const LmState& state) {
  Graph& g = *state.first.h.graph;
  Var table = g.parameter(lm.embedding);
  Var x = embed(table, y_prev);
  LstmState s1 = lstm_step(lm.first, x, state.first);
  LstmState s2 = lstm_step(lm.second, s1.h, state.second);
  Var out = add(s1.h, s2.h);
  const std::size_t hidden = lm.config.hidden;
  Var logits = add(reshape(matmul(table, reshape(out, {hidden, 1})),
                           {lm.config.vocab}),
                   g.parameter(lm.output_bias));
  return {log_softmax(logits), {s1, s2}};
}

LmSequence lm_forward(const RnnLm& lm, Graph& g,
                      std::span<const std::size_t> inputs, const LmState& init,
                      const RunMode& mode) {
  if (inputs.empty()) throw DimensionError("lm_forward on an empty window");
  for (std::size_t id : inputs) {
    if (id >= lm.config.vocab) {
      throw DimensionError("token id " + std::to_string(id) +
                           " outside language model vocabulary");
    }
  }
  Var table = g.parameter(lm.embedding);
  Var x = apply_dropout(take_rows(table, inputs), mode);
  LstmUnroll l1 = lstm_unroll(lm.first, x, init.first);
  LstmUnroll l2 =
      lstm_unroll(lm.second, apply_dropout(l1.outputs, mode), init.second);
  Var out = apply_dropout(add(l1.outputs, l2.outputs), mode);
  Var logits =
      add(matmul(out, transpose(table)), g.parameter(lm.output_bias));
  return {log_softmax(logits), {l1.final, l2.final}};
}

double sequence_logprob(const RnnLm& lm, std::span<const std::size_t> tokens) {
  if (tokens.empty()) return 0.0;
  Graph g(false);
  LmState state = lm_zero_state(g, lm);
  std::size_t prev = lm.config.sos;
  double total = 0.0;
  for (std::size_t tok : tokens) {
    LmStep step = lm_step(lm, prev, state);
    total += step.log_probs.value()[tok];
    state = step.state;
    prev = tok;
  }
  return total;
}

std::vector<std::size_t> lm_stream(
    std::span<const std::vector<std::size_t>> sentences, std::size_t sos,
    std::size_t eos) {
  std::vector<std::size_t> out;
  for (const auto& s : sentences) {
    out.push_back(sos);
    out.insert(out.end(), s.begin(), s.end());
    out.push_back(eos);
  }
  return out;
}

namespace {

struct WindowResult {
  double nll = 0.0;
  std::size_t count = 0;
};

// Recurrent state carried across windows as plain values.
struct Carry {
  Tensor h1, c1, h2, c2;
};

Carry zero_carry(const RnnLm& lm) {
  const Tensor z({lm.config.hidden});
  return {z, z, z, z};
}

Carry to_carry(const LmState& s) {
  return {s.first.h.value(), s.first.c.value(), s.second.h.value(),
          s.second.c.value()};
}

LmState from_carry(Graph& g, const Carry& c) {
  return {{g.constant(c.h1), g.constant(c.c1)},
          {g.constant(c.h2), g.constant(c.c2)}};
}

// Scores one window of the stream; returns the summed NLL and the loss Var.
WindowResult run_window(const RnnLm& lm, Graph& g,
                        std::span<const std::size_t> stream, std::size_t begin,
                        std::size_t end, Carry& carry, const RunMode& mode,
                        Var* loss_out) {
  std::span<const std::size_t> inputs = stream.subspan(begin, end - begin);
  LmSequence seq = lm_forward(lm, g, inputs, from_carry(g, carry), mode);
  const std::size_t vocab = lm.config.vocab;
  std::vector<std::size_t> picks;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    const std::size_t target = stream[begin + t + 1];
    if (target == lm.config.sos) continue;
    picks.push_back(t * vocab + target);
  }
  carry = to_carry(seq.state);
  WindowResult r;
  r.count = picks.size();
  if (picks.empty()) return r;
  Var total = sum(gather(seq.log_probs, picks));
  r.nll = -total.value().item();
  if (loss_out) {
    *loss_out = scale(total, -1.0 / static_cast<double>(picks.size()));
  }
  return r;
}

}  // namespace

double lm_perplexity(const RnnLm& lm,
                     std::span<const std::vector<std::size_t>> sentences,
                     std::size_t bptt) {
  const auto stream = lm_stream(sentences, lm.config.sos, lm.config.eos);
  if (stream.size() < 2) throw DataError("perplexity of an empty text");
  if (bptt == 0) throw ConfigError("bptt length must be positive");
  Carry carry = zero_carry(lm);
  double nll = 0.0;
  std::size_t count = 0;
  for (std::size_t b = 0; b + 1 < stream.size(); b += bptt) {
    const std::size_t e = std::min(stream.size() - 1, b + bptt);
    Graph g(false);
    WindowResult r = run_window(lm, g, stream, b, e, carry, {}, nullptr);
    nll += r.nll;
    count += r.count;
  }
  return std::exp(nll / static_cast<double>(count));
}

std::vector<LmEpochStats> train_lm(
    RnnLm& lm, std::span<const std::vector<std::size_t>> train,
    std::span<const std::vector<std::size_t>> valid,
    const LmTrainConfig& config,
    const std::function<void(const LmEpochStats&)>& on_epoch) {
  if (train.empty()) throw DataError("language model training text is empty");
  if (config.bptt == 0) throw ConfigError("bptt length must be positive");
  const auto stream = lm_stream(train, lm.config.sos, lm.config.eos);
  ParameterList params = lm.parameters();
  Adam adam(params, config.learning_rate);
  std::mt19937_64 rng(config.seed);
  const RunMode mode{lm.config.dropout, &rng};

  std::vector<LmEpochStats> stats;
  std::vector<Tensor> best;
  double best_ppl = std::numeric_limits<double>::infinity();
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    Carry carry = zero_carry(lm);
    double nll = 0.0;
    std::size_t count = 0;
    for (std::size_t b = 0; b + 1 < stream.size(); b += config.bptt) {
      const std::size_t e = std::min(stream.size() - 1, b + config.bptt);
      Graph g;
      Var loss;
      WindowResult r = run_window(lm, g, stream, b, e, carry, mode, &loss);
      if (r.count == 0) continue;
      if (!std::isfinite(r.nll)) {
        throw NumericDivergence("non-finite language model loss in epoch " +
                                std::to_string(epoch));
      }
      nll += r.nll;
      count += r.count;
      zero_grads(params);
      g.backward(loss);
      clip_gradients(params, config.clip_norm);
      adam.step();
    }
    LmEpochStats s;
    s.epoch = epoch;
    s.train_perplexity = std::exp(nll / static_cast<double>(count));
    s.valid_perplexity = valid.empty() ? s.train_perplexity
                                       : lm_perplexity(lm, valid, config.bptt);
    s.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - start)
                    .count();
    stats.push_back(s);
    if (on_epoch) on_epoch(s);
    if (s.valid_perplexity < best_ppl) {
      best_ppl = s.valid_perplexity;
      best.clear();
      for (const auto& p : params) {
        best.push_back(*p.tensor);
        best.back().drop_grad();
      }
    }
  }
  if (!best.empty()) {
    for (std::size_t k = 0; k < params.size(); ++k) {
      std::copy(best[k].data().begin(), best[k].data().end(),
                params[k].tensor->data().begin());
    }
  }
  for (const auto& p : params) p.tensor->drop_grad();
  return stats;
}

}  // namespace a2w
