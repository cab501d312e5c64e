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

#include "a2w/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "a2w/model.hpp"
#include "a2w/rnnlm.hpp"

namespace a2w {

double relative_error(double analytic, double numeric, double floor) {
  const double scale =
      std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

GradCheckReport check_gradients(const ParameterList& params,
                                const std::function<Var(Graph&)>& build,
                                double step) {
  zero_grads(params);
  {
    Graph g;
    g.backward(build(g));
  }
  auto loss_at = [&] {
    Graph g(false);
    return build(g).value().item();
  };
  GradCheckReport report;
  for (const auto& p : params) {
    Tensor& t = *p.tensor;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double saved = t[i];
      t[i] = saved + step;
      const double up = loss_at();
      t[i] = saved - step;
      const double down = loss_at();
      t[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = t.grad()[i];
      const double err = relative_error(analytic, numeric);
      ++report.checked;
      if (err > report.max_rel_error || report.worst.empty()) {
        report.max_rel_error = std::max(report.max_rel_error, err);
        if (err >= report.max_rel_error) {
          report.worst = p.name + "[" + std::to_string(i) + "]";
          report.worst_analytic = analytic;
          report.worst_numeric = numeric;
        }
      }
    }
  }
  for (const auto& p : params) p.tensor->drop_grad();
  return report;
}

GradCheckReport gradcheck_joint_model(std::uint64_t seed) {
  ModelConfig cfg;
  cfg.input_dim = 4;
  cfg.encoder_layers = 2;
  cfg.encoder_hidden = 8;
  cfg.subsample_layers = {2};
  cfg.char_tap_layer = 2;
  cfg.word_vocab = 20;
  cfg.char_vocab = 7;
  cfg.decoder_hidden = 8;
  cfg.word_embed = 5;
  cfg.char_embed = 4;
  cfg.attention_dim = 6;
  cfg.conv_channels = 2;
  cfg.conv_width = 3;
  cfg.dropout = 0.0;
  cfg.init_range = 0.5;
  cfg.lambda = 0.5;
  JointModel model = JointModel::create(cfg, seed);
  std::mt19937_64 rng(seed + 1);
  const Tensor features = Tensor::uniform({6, cfg.input_dim}, 1.0, rng);
  const std::vector<std::size_t> words{5, 17, 1};
  const std::vector<std::size_t> chars{3, 2, 6, 4, 1};
  LossOptions options;
  options.smoothing = 0.1;
  return check_gradients(model.parameters(), [&](Graph& g) {
    return joint_loss(model, g.constant(features), words, chars, options).total;
  });
}

GradCheckReport gradcheck_language_model(std::uint64_t seed) {
  LmConfig cfg;
  cfg.vocab = 9;
  cfg.hidden = 6;
  cfg.init_range = 0.5;
  RnnLm lm = RnnLm::create(cfg, seed);
  std::mt19937_64 rng(seed + 1);
  const std::vector<std::size_t> inputs{0, 4, 7, 1, 0, 3};
  const std::vector<std::size_t> targets{4, 7, 1, 0, 3, 8};
  const Tensor h1 = Tensor::uniform({cfg.hidden}, 0.5, rng);
  const Tensor c1 = Tensor::uniform({cfg.hidden}, 0.5, rng);
  const Tensor h2 = Tensor::uniform({cfg.hidden}, 0.5, rng);
  const Tensor c2 = Tensor::uniform({cfg.hidden}, 0.5, rng);
  return check_gradients(lm.parameters(), [&](Graph& g) {
    LmState init{{g.constant(h1), g.constant(c1)},
                 {g.constant(h2), g.constant(c2)}};
    LmSequence seq = lm_forward(lm, g, inputs, init);
    std::vector<std::size_t> picks;
    for (std::size_t t = 0; t < targets.size(); ++t) {
      picks.push_back(t * cfg.vocab + targets[t]);
    }
    return scale(sum(gather(seq.log_probs, picks)), -1.0);
  });
}

}  // namespace a2w
