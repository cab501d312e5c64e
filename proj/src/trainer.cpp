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

#include "a2w/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "a2w/errors.hpp"

namespace a2w {

double global_grad_norm(const ParameterList& params) {
  double sq = 0.0;
  for (const auto& p : params) {
    for (double g : p.tensor->grad()) sq += g * g;
  }
  return std::sqrt(sq);
}

GradientClip clip_gradients(const ParameterList& params, double clip_norm) {
  GradientClip out;
  out.norm = global_grad_norm(params);
  if (out.norm > clip_norm) {
    out.scale = clip_norm / out.norm;
    for (const auto& p : params) {
      for (double& g : p.tensor->grad()) g *= out.scale;
    }
  }
  return out;
}

Adam::Adam(ParameterList params, double learning_rate, double beta1,
           double beta2, double epsilon)
    : params_(std::move(params)),
      lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      epsilon_(epsilon) {
  for (const auto& p : params_) {
    m_.emplace_back(p.tensor->size(), 0.0);
    v_.emplace_back(p.tensor->size(), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Tensor& p = *params_[k].tensor;
    auto g = p.grad();
    if (g.empty()) continue;
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p[i] -= lr_ * m_hat / (std::sqrt(v_hat) + epsilon_);
    }
  }
}

void sgd_step(const ParameterList& params, double learning_rate) {
  for (const auto& p : params) {
    auto g = p.tensor->grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      (*p.tensor)[i] -= learning_rate * g[i];
    }
  }
}

std::vector<std::size_t> sort_by_length(std::span<const std::size_t> lengths) {
  std::vector<std::size_t> order(lengths.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return lengths[a] < lengths[b];
                   });
  return order;
}

void TrainConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ConfigError("lambda must lie in [0, 1]");
  }
  if (!(adam_lr > 0.0) || !(sgd_lr > 0.0)) {
    throw ConfigError("learning rates must be positive");
  }
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(sampling_prob >= 0.0 && sampling_prob <= 1.0) ||
      !(smoothing >= 0.0 && smoothing <= 1.0)) {
    throw ConfigError("sampling and smoothing probabilities must lie in [0, 1]");
  }
  if (patience == 0) throw ConfigError("patience must be positive");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double value_or_nan(Var v) {
  return v.valid() ? v.value().item()
                   : std::numeric_limits<double>::quiet_NaN();
}

std::vector<Tensor> snapshot(const ParameterList& params) {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (const auto& p : params) {
    out.push_back(*p.tensor);
    out.back().drop_grad();
  }
  return out;
}

void restore(const ParameterList& params, const std::vector<Tensor>& saved) {
  for (std::size_t k = 0; k < params.size(); ++k) {
    std::copy(saved[k].data().begin(), saved[k].data().end(),
              params[k].tensor->data().begin());
  }
}

}  // namespace

EpochMetrics evaluate_loss(const JointModel& model,
                           std::span<const TrainingExample> data) {
  EpochMetrics m;
  m.split = "valid";
  const auto start = Clock::now();
  const double lambda = model.config.lambda;
  for (const auto& ex : data) {
    Graph g(false);
    Var x = g.constant(ex.features);
    Encoding enc = encode(model.encoder, x);
    const double lw = sequence_nll(model.words, enc.word, ex.words, 0.0, 0.0)
                          .loss.value()
                          .item();
    const double lc = sequence_nll(model.chars, enc.chars, ex.chars, 0.0, 0.0)
                          .loss.value()
                          .item();
    m.loss_word += lw;
    m.loss_char += lc;
    m.loss_joint += lambda * lw + (1.0 - lambda) * lc;
  }
  if (!data.empty()) {
    const auto n = static_cast<double>(data.size());
    m.loss_word /= n;
    m.loss_char /= n;
    m.loss_joint /= n;
  }
  m.wall_seconds = seconds_since(start);
  return m;
}

TrainResult train(
    JointModel& model, std::span<const TrainingExample> train_set,
    std::span<const TrainingExample> valid_set, const TrainConfig& config,
    const std::function<void(const EpochMetrics&, const JointModel&)>&
        on_epoch) {
  config.validate();
  TrainResult result;
  if (config.max_epochs == 0) return result;
  if (train_set.empty()) throw DataError("training set is empty");
  model.config.lambda = config.lambda;

  ParameterList params = model.parameters();
  zero_grads(params);
  Adam adam(params, config.adam_lr);
  bool use_sgd = false;
  double sgd_lr = config.sgd_lr;

  std::vector<std::size_t> lengths;
  lengths.reserve(train_set.size());
  for (const auto& ex : train_set) lengths.push_back(ex.features.rows());
  const std::vector<std::size_t> order = sort_by_length(lengths);

  std::mt19937_64 rng(config.seed);
  LossOptions options;
  options.sampling_prob = config.sampling_prob;
  options.smoothing = config.smoothing;
  options.mode = RunMode{model.config.dropout, &rng};
  options.sampling_rng = &rng;

  std::vector<Tensor> best;
  double best_valid = std::numeric_limits<double>::infinity();
  std::size_t misses = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto start = Clock::now();
    EpochMetrics tm;
    tm.epoch = epoch;
    tm.split = "train";
    for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
      const std::size_t end = std::min(order.size(), b + config.batch_size);
      const double inv = 1.0 / static_cast<double>(end - b);
      zero_grads(params);
      for (std::size_t k = b; k < end; ++k) {
        const TrainingExample& ex = train_set[order[k]];
        Graph g;
        Var x = g.constant(ex.features);
        JointLoss loss = joint_loss(model, x, ex.words, ex.chars, options);
        const double value = loss.total.value().item();
        if (!std::isfinite(value)) {
          throw NumericDivergence("non-finite loss on utterance " + ex.id +
                                  " in epoch " + std::to_string(epoch));
        }
        g.backward(scale(loss.total, inv));
        tm.loss_joint += value;
        tm.loss_word += value_or_nan(loss.word);
        tm.loss_char += value_or_nan(loss.chars);
      }
      clip_gradients(params, config.clip_norm);
      result.max_clipped_norm =
          std::max(result.max_clipped_norm, global_grad_norm(params));
      if (use_sgd) {
        sgd_step(params, sgd_lr);
      } else {
        adam.step();
      }
    }
    const auto n = static_cast<double>(train_set.size());
    tm.loss_joint /= n;
    tm.loss_word /= n;
    tm.loss_char /= n;
    tm.wall_seconds = seconds_since(start);
    result.log.push_back(tm);

    EpochMetrics vm = evaluate_loss(model, valid_set.empty() ? train_set
                                                             : valid_set);
    vm.epoch = epoch;
    result.log.push_back(vm);
    if (on_epoch) on_epoch(vm, model);

    if (vm.loss_joint < best_valid) {
      best_valid = vm.loss_joint;
      best = snapshot(params);
      result.best_epoch = epoch;
      misses = 0;
    } else {
      ++misses;
      if (!use_sgd) {
        use_sgd = true;
        result.sgd_switch_epoch = epoch;
      } else {
        sgd_lr *= 0.5;
      }
      if (misses >= config.patience) break;
    }
  }
  if (!best.empty()) restore(params, best);
  result.best_valid = best_valid;
  for (const auto& p : params) p.tensor->drop_grad();
  return result;
}

void write_metrics_csv(std::ostream& out, std::span<const EpochMetrics> rows) {
  out << "epoch,split,loss_word,loss_char,loss_joint,wall_seconds\n";
  for (const auto& r : rows) {
    out << r.epoch << ',' << r.split << ',' << r.loss_word << ','
        << r.loss_char << ',' << r.loss_joint << ',' << r.wall_seconds << '\n';
  }
}

}  // namespace a2w
