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

#include "gsg/rewards.h"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace gsg {

std::string to_string(RewardMode mode) {
  switch (mode) {
    case RewardMode::kFinalOnly: return "final";
    case RewardMode::kFeatureOnly: return "feature";
    case RewardMode::kBoth: return "both";
  }
  return "both";
}

RewardMode parse_reward_mode(const std::string& text) {
  if (text == "final" || text == "final-only") return RewardMode::kFinalOnly;
  if (text == "feature" || text == "feature-only") {
    return RewardMode::kFeatureOnly;
  }
  if (text == "both") return RewardMode::kBoth;
  throw ConfigError("unknown reward mode '" + text +
                    "' (expected final, feature or both)");
}

void RewardConfig::validate() const {
  if (lookahead == 0) throw ConfigError("look-ahead must be at least 1");
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw ConfigError("discount must lie in [0, 1]");
  }
}

std::vector<double> feature_matching_rewards(
    std::span<const Tensor> features, std::span<const Tensor> predictions,
    std::size_t lookahead) {
  if (lookahead == 0) throw ConfigError("look-ahead must be at least 1");
  if (features.size() != predictions.size() + 1) {
    throw DimensionError("feature_matching_rewards: " +
                         std::to_string(features.size()) + " features for " +
                         std::to_string(predictions.size()) + " predictions");
  }
  const std::size_t n = predictions.size();
  const std::size_t c = lookahead;
  std::vector<double> rg(n, 0.0);
  std::vector<double> df, dp;
  for (std::size_t t = c + 1; t <= n; ++t) {
    const Tensor& f = features[t];
    const Tensor& p = predictions[t - c];
    if (f.size() != p.size()) {
      throw DimensionError("feature_matching_rewards: feature size mismatch");
    }
    df.resize(f.size());
    dp.resize(f.size());
    const double direct = kernels::cosine(f.span(), p.span());
    double total = 0.0;
    for (std::size_t i = 1; i <= c; ++i) {
      const Tensor& back = features[t - i];
      for (std::size_t k = 0; k < f.size(); ++k) {
        df[k] = f[k] - back[k];
        dp[k] = p[k] - back[k];
      }
      total += direct + kernels::cosine(df, dp);
    }
    rg[t - 1] = total / (2.0 * static_cast<double>(c));
  }
  return rg;
}

double cumulative_reward(std::span<const double> rg, double gamma,
                         std::size_t t, bool relative) {
  if (t < 1 || t > rg.size()) {
    throw ConfigError("cumulative_reward: t = " + std::to_string(t) +
                      " outside [1, " + std::to_string(rg.size()) + "]");
  }
  double total = 0.0;
  for (std::size_t i = t; i <= rg.size(); ++i) {
    const double e = static_cast<double>(relative ? i - t : i);
    total += std::pow(gamma, e) * rg[i - 1];
  }
  return total;
}

std::vector<double> cumulative_rewards(std::span<const double> rg,
                                       double gamma, bool relative) {
  std::vector<double> out(rg.size());
  for (std::size_t t = 1; t <= rg.size(); ++t) {
    out[t - 1] = cumulative_reward(rg, gamma, t, relative);
  }
  return out;
}

std::vector<double> q_unconditional(std::span<const double> rg, double final,
                                    const RewardConfig& config) {
  if (!(final >= 0.0 && final <= 1.0)) {
    throw ConfigError("final reward must lie in [0, 1]");
  }
  if (config.mode == RewardMode::kFinalOnly) {
    return std::vector<double>(rg.size(), final);
  }
  std::vector<double> q =
      cumulative_rewards(rg, config.gamma, config.relative_discount);
  if (config.mode == RewardMode::kBoth) {
    for (double& v : q) v *= final;
  }
  return q;
}

std::vector<double> q_conditional(std::span<const double> rg, double rs,
                                  const RewardConfig& config) {
  if (config.mode == RewardMode::kFinalOnly) {
    return std::vector<double>(rg.size(), rs);
  }
  std::vector<double> r(rg.begin(), rg.end());
  if (config.clamp) {
    for (double& v : r) v = std::clamp(v, 0.0, 1.0);
  }
  if (config.mode == RewardMode::kFeatureOnly) {
    return cumulative_rewards(r, config.gamma, config.relative_discount);
  }
  if (rs <= 0.0) {
    for (double& v : r) v = 1.0 - v;
  }
  std::vector<double> q =
      cumulative_rewards(r, config.gamma, config.relative_discount);
  for (double& v : q) v *= rs;
  return q;
}

Var policy_gradient_loss(Tape& tape, std::span<const Var> log_probs,
                         std::span<const double> q) {
  if (log_probs.size() != q.size() || q.empty()) {
    throw DimensionError("policy_gradient_loss: " +
                         std::to_string(log_probs.size()) + " log-probs vs " +
                         std::to_string(q.size()) + " Q-values");
  }
  std::vector<Var> terms;
  terms.reserve(q.size());
  for (std::size_t t = 0; t < q.size(); ++t) {
    terms.push_back(tape.scale(log_probs[t], q[t]));
  }
  return tape.scale(tape.add_n(terms), -1.0 / static_cast<double>(q.size()));
}

double policy_gradient_loss(std::span<const double> log_probs,
                            std::span<const double> q) {
  if (log_probs.size() != q.size() || q.empty()) {
    throw DimensionError("policy_gradient_loss: length mismatch");
  }
  double total = 0.0;
  for (std::size_t t = 0; t < q.size(); ++t) total += q[t] * log_probs[t];
  return -total / static_cast<double>(q.size());
}

void RewardTrace::write_csv(std::ostream& out) const {
  out << "step,r_g,q\n";
  const auto old = out.precision(17);
  for (std::size_t t = 0; t < rg.size(); ++t) {
    out << t + 1 << ',' << rg[t] << ',' << (t < q.size() ? q[t] : 0.0) << '\n';
  }
  out.precision(old);
}

}  // namespace gsg
