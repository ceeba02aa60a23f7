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

// Reward algebra: feature-matching rewards, discounted sums, Q-values and
// the policy-gradient surrogate.

#ifndef GSG_REWARDS_H_
#define GSG_REWARDS_H_

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gsg/numerics.h"

namespace gsg {

enum class RewardMode { kFinalOnly, kFeatureOnly, kBoth };

std::string to_string(RewardMode mode);
// Accepts "final", "feature", "both" (and the long forms "final-only",
// "feature-only").
RewardMode parse_reward_mode(const std::string& text);

struct RewardConfig {
  std::size_t lookahead = 4;
  double gamma = 0.95;
  RewardMode mode = RewardMode::kBoth;
  // Clip r^g into [0, 1] before the conditional composition.
  bool clamp = true;
  // gamma^(i - t) instead of gamma^i.
  bool relative_discount = false;

  void validate() const;
};

// r^g_1 .. r^g_n from features f_0 .. f_n and guider predictions
// p_0 .. p_{n-1}; the prediction compared against f_t is p_{t-c}.
// r^g_t = 0 for t <= c.
std::vector<double> feature_matching_rewards(std::span<const Tensor> features,
                                             std::span<const Tensor> predictions,
                                             std::size_t lookahead);

// sum_{i=t}^{n} gamma^i r_i with 1-based t.
double cumulative_reward(std::span<const double> rg, double gamma,
                         std::size_t t, bool relative = false);
// The above for every t = 1 .. n.
std::vector<double> cumulative_rewards(std::span<const double> rg,
                                       double gamma, bool relative = false);

// Q_t for unconditional generation; final is the discriminator score.
std::vector<double> q_unconditional(std::span<const double> rg, double final,
                                    const RewardConfig& config);

inline double self_critical_reward(double sample, double greedy) {
  return sample - greedy;
}

// Q_t for conditional generation with advantage rs = r(Y) - r(Y').
std::vector<double> q_conditional(std::span<const double> rg, double rs,
                                  const RewardConfig& config);

// -(1/n) sum_t Q_t log p_t with Q treated as constants.
Var policy_gradient_loss(Tape& tape, std::span<const Var> log_probs,
                         std::span<const double> q);
double policy_gradient_loss(std::span<const double> log_probs,
                            std::span<const double> q);

struct RewardTrace {
  std::vector<double> rg;
  std::vector<double> q;
  double final_reward = 0.0;

  std::size_t length() const { return rg.size(); }
  // Header "step,r_g,q", steps 1-based.
  void write_csv(std::ostream& out) const;
};

}  // namespace gsg

#endif  // GSG_REWARDS_H_
