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

#ifndef A2W_TRAINER_HPP_
#define A2W_TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "a2w/model.hpp"
#include "a2w/parameters.hpp"

namespace a2w {

struct GradientClip {
  double norm = 0.0;   // global L2 norm before clipping
  double scale = 1.0;  // factor applied to every gradient
};

double global_grad_norm(const ParameterList& params);

/// Rescales all gradients by clip_norm / g when their global norm g exceeds
/// clip_norm.
GradientClip clip_gradients(const ParameterList& params, double clip_norm);

class Adam {
 public:
  Adam(ParameterList params, double learning_rate, double beta1 = 0.9,
       double beta2 = 0.999, double epsilon = 1e-8);

  void step();
  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }
  std::size_t steps() const { return t_; }

 private:
  ParameterList params_;
  double lr_, beta1_, beta2_, epsilon_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

/// theta -= lr * grad.
void sgd_step(const ParameterList& params, double learning_rate);

/// Stable ascending order of `lengths`.
std::vector<std::size_t> sort_by_length(std::span<const std::size_t> lengths);

/// Model-ready utterance: T x D features and id targets ending in eos.
struct TrainingExample {
  std::string id;
  Tensor features;
  std::vector<std::size_t> words;
  std::vector<std::size_t> chars;
};

struct TrainConfig {
  double lambda = 0.5;
  double adam_lr = 1e-3;
  double sgd_lr = 1e-4;
  double clip_norm = 5.0;
  std::size_t batch_size = 50;
  double sampling_prob = 0.2;
  double smoothing = 0.1;
  std::size_t max_epochs = 20;
  std::size_t patience = 3;
  std::uint64_t seed = 1;

  void validate() const;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  std::string split;  // "train" or "valid"
  double loss_word = 0.0;
  double loss_char = 0.0;
  double loss_joint = 0.0;
  double wall_seconds = 0.0;
};

struct TrainResult {
  std::vector<EpochMetrics> log;
  std::size_t best_epoch = 0;  // 0: no epoch ran
  double best_valid = 0.0;
  std::size_t sgd_switch_epoch = 0;  // 0: never switched
  double max_clipped_norm = 0.0;     // largest post-clip norm seen
};

/// Mean per-utterance losses under teacher forcing, no smoothing, no
/// dropout.
EpochMetrics evaluate_loss(const JointModel& model,
                           std::span<const TrainingExample> data);

/// Adam until the first epoch without validation improvement, then SGD with
/// the rate halved on every further miss; stops after `patience`
/// consecutive misses. The best validation parameters are restored.
TrainResult train(
    JointModel& model, std::span<const TrainingExample> train_set,
    std::span<const TrainingExample> valid_set, const TrainConfig& config,
    const std::function<void(const EpochMetrics& valid, const JointModel&)>&
        on_epoch = {});

/// CSV with header epoch,split,loss_word,loss_char,loss_joint,wall_seconds.
void write_metrics_csv(std::ostream& out, std::span<const EpochMetrics> rows);

}  // namespace a2w

#endif  // A2W_TRAINER_HPP_
