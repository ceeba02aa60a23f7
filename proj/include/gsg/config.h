// Copyright 2026 The guidergen Authors.
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

// Run configuration: flat "key = value" files with '#' comments.

#ifndef GSG_CONFIG_H_
#define GSG_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "gsg/rewards.h"

namespace gsg {

struct ModelConfig {
  std::size_t d_emb = 32;
  std::size_t filters = 21;  // per window
  std::vector<std::size_t> windows = {3, 4, 5};
  std::size_t hidden = 64;
  std::size_t guider_hidden = 64;
  std::size_t max_len = 16;
  std::size_t disc_d_emb = 32;
  std::size_t disc_filters = 21;
};

struct TrainConfig {
  std::uint64_t seed = 1;
  ModelConfig model;
  std::size_t min_count = 1;

  // Pretraining.
  std::size_t batch_size = 32;
  double lr_encoder = 1e-3;
  double lr_generator = 1e-3;
  double lr_guider = 1e-3;
  double lr_disc = 1e-3;
  std::size_t pretrain_epochs = 10;
  std::size_t disc_pretrain_steps = 50;
  double noise_init_prob = 0.5;
  double clip_norm = 5.0;

  // Policy-gradient fine-tuning.
  std::size_t rl_steps = 100;
  std::size_t rl_total_steps = 0;  // 0: same as rl_steps
  std::size_t rl_batch_size = 16;
  std::size_t g_steps = 1;
  std::size_t d_steps = 1;
  double rl_lr_generator = 1e-4;
  double lambda_start = 0.5;
  double lambda_end = 0.0;
  double temperature = 1.0;
  bool guider_refresh = true;
  double divergence_limit = 1e3;

  RewardConfig reward;
  // Sentence BLEU used as the conditional final reward.
  std::size_t reward_max_n = 4;
  bool reward_smoothing = true;

  // In-training evaluation; 0 disables it.
  std::size_t eval_every = 0;
  std::size_t eval_samples = 100;
  std::size_t eval_max_n = 2;

  std::size_t total_rl_steps() const {
    return rl_total_steps > 0 ? rl_total_steps : rl_steps;
  }

  // Applies "key = value" lines on top of the current values. Unknown keys
  // and malformed values raise ConfigError naming the line.
  void apply(const std::string& text);
  void apply_file(const std::string& path);
  void set(const std::string& key, const std::string& value);
  // Every key, one per line, doubles printed round-trip exact.
  std::string to_text() const;
  std::vector<std::string> keys() const;
  void validate() const;

  static TrainConfig parse(const std::string& text);
  static TrainConfig load_file(const std::string& path);
};

}  // namespace gsg

#endif  // GSG_CONFIG_H_
