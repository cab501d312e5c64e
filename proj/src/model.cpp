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

#include "a2w/model.hpp"

#include <algorithm>
#include <string>

#include "a2w/errors.hpp"

namespace a2w {

void AttentionTrace::append(const Tensor& weights) {
  if (rows.empty()) frames = weights.size();
  if (weights.size() != frames) {
    throw DimensionError("attention row of length " +
                         std::to_string(weights.size()) + " in a trace over " +
                         std::to_string(frames) + " frames");
  }
  rows.emplace_back(weights.data().begin(), weights.data().end());
}

// --- AttentionDecoder -----------------------------------------------------

AttentionDecoder AttentionDecoder::create(const DecoderConfig& config,
                                          double init_range,
                                          double forget_bias,
                                          std::mt19937_64& rng) {
  if (config.conv_width % 2 == 0) {
    throw ConfigError("location kernel width must be odd");
  }
  AttentionDecoder d;
  d.config = config;
  const std::size_t a = config.attention_dim;
  d.embedding = Tensor::uniform({config.vocab, config.embed_dim}, init_range,
                                rng);
  d.cell = LstmCell::create(config.embed_dim + config.encoder_dim,
                            config.hidden, init_range, forget_bias, rng);
  d.w_state = Tensor::uniform({config.hidden, a}, init_range, rng);
  d.w_encoder = Tensor::uniform({config.encoder_dim, a}, init_range, rng);
  d.w_location = Tensor::uniform({config.conv_channels, a}, init_range, rng);
  d.location_kernels = Tensor::uniform(
      {config.conv_channels, config.conv_width}, init_range, rng);
  d.energy_v = Tensor::uniform({a, 1}, init_range, rng);
  d.energy_bias = Tensor::uniform({a}, init_range, rng);
  d.output = Linear::create(config.hidden + config.encoder_dim, config.vocab,
                            init_range, rng);
  return d;
}

ParameterList AttentionDecoder::parameters() {
  ParameterList out{{"embedding", &embedding}};
  append_prefixed(out, "lstm.", cell.parameters());
  out.push_back({"att.w_state", &w_state});
  out.push_back({"att.w_encoder", &w_encoder});
  out.push_back({"att.w_location", &w_location});
  out.push_back({"att.kernels", &location_kernels});
  out.push_back({"att.v", &energy_v});
  out.push_back({"att.bias", &energy_bias});
  append_prefixed(out, "out.", output.parameters());
  return out;
}

EncodedSource prepare_source(const AttentionDecoder& dec, Var memory) {
  const Tensor& h = memory.value();
  if (h.rank() != 2 || h.rows() == 0 || h.cols() != dec.config.encoder_dim) {
    throw DimensionError("encoder memory " + shape_string(h.shape()) +
                         " does not fit decoder encoder_dim " +
                         std::to_string(dec.config.encoder_dim));
  }
  Graph& g = *memory.graph;
  return {memory, matmul(memory, g.parameter(dec.w_encoder)), h.rows()};
}

Attention attend(const AttentionDecoder& dec, Var s_prev,
                 const EncodedSource& source, Var alpha_prev) {
  if (alpha_prev.size() != source.frames) {
    throw DimensionError("previous attention has " +
                         std::to_string(alpha_prev.size()) + " frames, memory " +
                         std::to_string(source.frames));
  }
  Graph& g = *s_prev.graph;
  Var features = conv1d(alpha_prev, g.parameter(dec.location_kernels));
  Var location = matmul(transpose(features), g.parameter(dec.w_location));
  Var state_term =
      add(matmul(s_prev, g.parameter(dec.w_state)), g.parameter(dec.energy_bias));
  Var pre = add(add(source.projected, location), state_term);
  Var energies =
      reshape(matmul(tanh(pre), g.parameter(dec.energy_v)), {source.frames});
  Var weights = softmax(energies);
  Var context = matmul(weights, source.memory);
  return {context, weights};
}

DecoderState initial_decoder_state(const AttentionDecoder& dec,
                                   const EncodedSource& source) {
  Graph& g = *source.memory.graph;
  return {lstm_zero_state(g, dec.cell),
          g.constant(Tensor({dec.config.encoder_dim})),
          g.constant(Tensor({source.frames},
                            1.0 / static_cast<double>(source.frames)))};
}

DecodeStep decode_step(const AttentionDecoder& dec, const DecoderState& prev,
                       std::size_t y_prev, const EncodedSource& source,
                       const RunMode& mode) {
  Graph& g = *source.memory.graph;
  Var emb = apply_dropout(embed(g.parameter(dec.embedding), y_prev), mode);
  LstmState lstm = lstm_step(dec.cell, concat(emb, prev.context), prev.lstm);
  Attention att = attend(dec, lstm.h, source, prev.attention);
  Var logits =
      dec.output.apply(concat(apply_dropout(lstm.h, mode), att.context));
  return {logits, {lstm, att.context, att.weights}};
}

namespace {

std::size_t argmax(const Tensor& t) {
  const auto d = t.data();
  return static_cast<std::size_t>(std::max_element(d.begin(), d.end()) -
                                  d.begin());
}

}  // namespace

SequenceLoss sequence_nll(const AttentionDecoder& dec, Var memory,
                          std::span<const std::size_t> targets,
                          double sampling_prob, double smoothing,
                          const RunMode& mode, std::mt19937_64* sampling_rng) {
  if (targets.empty()) throw ContractError("sequence_nll on an empty target");
  if (targets.back() != dec.config.eos) {
    throw ContractError("sequence_nll targets must end with eos");
  }
  if (sampling_prob < 0.0 || sampling_prob > 1.0) {
    throw ConfigError("scheduled sampling probability must lie in [0, 1]");
  }
  if (sampling_prob > 0.0 && sampling_rng == nullptr) {
    throw ContractError("scheduled sampling needs a random generator");
  }
  EncodedSource source = prepare_source(dec, memory);
  DecoderState state = initial_decoder_state(dec, source);
  SequenceLoss out;
  out.trace.frames = source.frames;
  std::bernoulli_distribution use_model(sampling_prob);
  std::size_t y_prev = dec.config.sos;
  Var total;
  for (std::size_t gold : targets) {
    DecodeStep step = decode_step(dec, state, y_prev, source, mode);
    Var term = smoothed_cross_entropy(step.logits, gold, smoothing);
    total = total.valid() ? add(total, term) : term;
    out.trace.append(step.state.attention.value());
    state = step.state;
    y_prev = gold;
    if (sampling_prob > 0.0 && use_model(*sampling_rng)) {
      y_prev = argmax(step.logits.value());
    }
  }
  out.loss = total;
  return out;
}

// --- Encoder --------------------------------------------------------------

void ModelConfig::validate() const {
  if (encoder_layers == 0) throw ConfigError("encoder needs at least one layer");
  if (char_tap_layer < 1 || char_tap_layer > encoder_layers) {
    throw ConfigError("char tap layer " + std::to_string(char_tap_layer) +
                      " outside encoder of " + std::to_string(encoder_layers) +
                      " layers");
  }
  for (std::size_t l : subsample_layers) {
    if (l < 1 || l > encoder_layers) {
      throw ConfigError("subsample layer " + std::to_string(l) +
                        " outside encoder");
    }
  }
  if (word_vocab == 0 || char_vocab == 0) {
    throw ConfigError("vocabulary sizes must be positive");
  }
  if (encoder_hidden == 0 || decoder_hidden == 0 || attention_dim == 0 ||
      input_dim == 0 || conv_channels == 0) {
    throw ConfigError("layer sizes must be positive");
  }
  if (conv_width % 2 == 0) throw ConfigError("location kernel width must be odd");
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ConfigError("lambda must lie in [0, 1]");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw ConfigError("dropout must lie in [0, 1)");
  }
}

ParameterList EncoderStack::parameters() {
  ParameterList out;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    append_prefixed(out, "layer" + std::to_string(i + 1) + ".",
                    layers[i].parameters());
  }
  return out;
}

Encoding encode(const EncoderStack& encoder, Var features,
                const RunMode& mode) {
  const Tensor& x = features.value();
  if (x.rank() != 2 || x.rows() == 0) {
    throw DimensionError("encode needs a non-empty T x D feature matrix");
  }
  Encoding out;
  Var h = features;
  for (std::size_t i = 0; i < encoder.layers.size(); ++i) {
    BlstmOutput layer = blstm_forward(encoder.layers[i], h);
    if (i + 1 == encoder.char_tap_layer) {
      out.chars = apply_dropout(layer.full, mode);
    }
    h = apply_dropout(layer.output, mode);
  }
  out.word = h;
  return out;
}

// --- JointModel -----------------------------------------------------------

JointModel JointModel::create(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  JointModel m;
  m.config = config;
  std::size_t in = config.input_dim;
  for (std::size_t l = 1; l <= config.encoder_layers; ++l) {
    const bool sub =
        std::find(config.subsample_layers.begin(), config.subsample_layers.end(),
                  l) != config.subsample_layers.end();
    m.encoder.layers.push_back(BlstmLayer::create(
        in, config.encoder_hidden, sub, config.init_range, config.forget_bias,
        rng));
    in = 2 * config.encoder_hidden;
  }
  m.encoder.char_tap_layer = config.char_tap_layer;

  DecoderConfig word;
  word.vocab = config.word_vocab;
  word.embed_dim = config.word_embed;
  word.hidden = config.decoder_hidden;
  word.encoder_dim = 2 * config.encoder_hidden;
  word.attention_dim = config.attention_dim;
  word.conv_channels = config.conv_channels;
  word.conv_width = config.conv_width;
  word.sos = config.word_sos;
  word.eos = config.word_eos;
  m.words = AttentionDecoder::create(word, config.init_range,
                                     config.forget_bias, rng);

  DecoderConfig chars = word;
  chars.vocab = config.char_vocab;
  chars.embed_dim = config.char_embed;
  chars.sos = config.char_sos;
  chars.eos = config.char_eos;
  m.chars = AttentionDecoder::create(chars, config.init_range,
                                     config.forget_bias, rng);
  return m;
}

ParameterList JointModel::parameters() {
  ParameterList out;
  append_prefixed(out, "encoder.", encoder.parameters());
  append_prefixed(out, "word.", words.parameters());
  append_prefixed(out, "char.", chars.parameters());
  return out;
}

JointLoss joint_loss(const JointModel& model, Var features,
                     std::span<const std::size_t> word_targets,
                     std::span<const std::size_t> char_targets,
                     const LossOptions& options) {
  const double lambda = model.config.lambda;
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ConfigError("lambda must lie in [0, 1]");
  }
  Encoding enc = encode(model.encoder, features, options.mode);
  JointLoss out;
  if (lambda > 0.0) {
    SequenceLoss w = sequence_nll(model.words, enc.word, word_targets,
                                  options.sampling_prob, options.smoothing,
                                  options.mode, options.sampling_rng);
    out.word = w.loss;
    out.word_trace = std::move(w.trace);
  }
  if (lambda < 1.0) {
    SequenceLoss c = sequence_nll(model.chars, enc.chars, char_targets,
                                  options.sampling_prob, options.smoothing,
                                  options.mode, options.sampling_rng);
    out.chars = c.loss;
    out.char_trace = std::move(c.trace);
  }
  if (lambda == 1.0) {
    out.total = out.word;
  } else if (lambda == 0.0) {
    out.total = out.chars;
  } else {
    out.total = add(scale(out.word, lambda), scale(out.chars, 1.0 - lambda));
  }
  return out;
}

}  // namespace a2w
