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

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "gsg/rewards.h"
#include "test_util.h"

namespace gsg {
namespace {

using testing::random_tensor;

// Brute-force oracles, written independently of the library.
double cos_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

std::vector<double> minus(const Tensor& a, const Tensor& b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

std::vector<double> rg_oracle(const std::vector<Tensor>& f,
                              const std::vector<Tensor>& p, std::size_t c) {
  const std::size_t n = f.size() - 1;
  std::vector<double> out(n, 0.0);
  for (std::size_t t = c + 1; t <= n; ++t) {
    const Tensor& hat = p[t - c];
    double s = 0.0;
    for (std::size_t i = 1; i <= c; ++i) {
      s += cos_oracle(f[t].data, hat.data) +
           cos_oracle(minus(f[t], f[t - i]), minus(hat, f[t - i]));
    }
    out[t - 1] = s / (2.0 * c);
  }
  return out;
}

double cum_oracle(const std::vector<double>& r, double gamma, std::size_t t) {
  double s = 0.0;
  for (std::size_t i = t; i <= r.size(); ++i) {
    double g = 1.0;
    for (std::size_t k = 0; k < i; ++k) g *= gamma;
    s += g * r[i - 1];
  }
  return s;
}

TEST(FeatureRewards, PerfectMatchIsOne) {
  Rng rng(1);
  const std::size_t c = 2;
  std::vector<Tensor> f;
  for (int t = 0; t < 6; ++t) f.push_back(random_tensor({5}, rng));
  std::vector<Tensor> p(5, Tensor({5}, 0.0));
  for (std::size_t t = c + 1; t <= 5; ++t) p[t - c] = f[t];
  const std::vector<double> rg = feature_matching_rewards(f, p, c);
  ASSERT_EQ(rg.size(), 5u);
  for (std::size_t t = 1; t <= 5; ++t) {
    EXPECT_NEAR(rg[t - 1], t <= c ? 0.0 : 1.0, 1e-12);
  }
}

TEST(FeatureRewards, IdenticalFeaturesGiveOneHalf) {
  const Tensor v = Tensor::Vector({0.5, 1.5, 2.0});
  const std::vector<Tensor> f(7, v), p(6, v);
  const std::vector<double> rg = feature_matching_rewards(f, p, 3);
  for (std::size_t t = 4; t <= 6; ++t) EXPECT_NEAR(rg[t - 1], 0.5, 1e-15);
}

TEST(FeatureRewards, MatchesDoubleLoopOracle) {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t c = 1 + rng.below(4), n = 1 + rng.below(12);
    std::vector<Tensor> f, p;
    for (std::size_t t = 0; t <= n; ++t) f.push_back(random_tensor({6}, rng));
    for (std::size_t t = 0; t < n; ++t) p.push_back(random_tensor({6}, rng));
    const std::vector<double> got = feature_matching_rewards(f, p, c);
    const std::vector<double> want = rg_oracle(f, p, c);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_NEAR(got[i], want[i], 1e-12);
      EXPECT_GE(got[i], -1.0);
      EXPECT_LE(got[i], 1.0);
    }
  }
}

TEST(FeatureRewards, LengthMismatchThrows) {
  const std::vector<Tensor> f(5, Tensor({2}, 1.0)), p(3, Tensor({2}, 1.0));
  EXPECT_THROW(feature_matching_rewards(f, p, 2), DimensionError);
}

TEST(FeatureRewards, ScaleInvariant) {
  Rng rng(3);
  for (const double lambda : {0.1, 10.0}) {
    std::vector<Tensor> f, p;
    for (int t = 0; t <= 9; ++t) f.push_back(random_tensor({8}, rng));
    for (int t = 0; t < 9; ++t) p.push_back(random_tensor({8}, rng));
    const std::vector<double> base = feature_matching_rewards(f, p, 4);
    for (auto* set : {&f, &p}) {
      for (Tensor& x : *set) {
        for (double& v : x.data) v *= lambda;
      }
    }
    const std::vector<double> scaled = feature_matching_rewards(f, p, 4);
    for (std::size_t i = 0; i < base.size(); ++i) {
      EXPECT_NEAR(base[i], scaled[i], 1e-12);
    }
  }
}

TEST(Cumulative, ZeroRewardsGiveZero) {
  const std::vector<double> r(4, 0.0);
  for (std::size_t t = 1; t <= 4; ++t) EXPECT_EQ(cumulative_reward(r, 0.9, t), 0.0);
}

TEST(Cumulative, ZeroGammaGivesZero) {
  const std::vector<double> r{1.0, -2.0, 3.0};
  for (std::size_t t = 1; t <= 3; ++t) EXPECT_EQ(cumulative_reward(r, 0.0, t), 0.0);
}

TEST(Cumulative, HandExample) {
  const std::vector<double> r{1.0, 0.5, -0.2};
  EXPECT_NEAR(cumulative_reward(r, 0.9, 1), 0.9 + 0.81 * 0.5 - 0.729 * 0.2, 1e-15);
  EXPECT_NEAR(cumulative_reward(r, 0.9, 1), 1.1592, 1e-12);
}

TEST(Cumulative, RelativeDiscountStartsAtOne) {
  const std::vector<double> r{1.0, 0.5, -0.2};
  EXPECT_NEAR(cumulative_reward(r, 0.9, 2, true), 0.5 - 0.9 * 0.2, 1e-15);
}

TEST(Cumulative, OutOfRangeThrows) {
  const std::vector<double> r{1.0, 2.0};
  EXPECT_THROW(cumulative_reward(r, 0.9, 0), ConfigError);
  EXPECT_THROW(cumulative_reward(r, 0.9, 3), ConfigError);
}

TEST(Cumulative, MatchesOracleOnRandomInputs) {
  Rng rng(4);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> r(1 + rng.below(15));
    for (double& v : r) v = 2.0 * rng.uniform() - 1.0;
    const double gamma = rng.uniform();
    const std::vector<double> all = cumulative_rewards(r, gamma);
    for (std::size_t t = 1; t <= r.size(); ++t) {
      EXPECT_NEAR(all[t - 1], cum_oracle(r, gamma, t), 1e-12);
    }
  }
}

RewardConfig config(RewardMode mode, double gamma, bool clamp = true) {
  RewardConfig c;
  c.mode = mode;
  c.gamma = gamma;
  c.clamp = clamp;
  return c;
}

TEST(QUnconditional, Examples) {
  const std::vector<double> ones{1.0, 1.0};
  const auto q = q_unconditional(ones, 0.5, config(RewardMode::kBoth, 1.0));
  EXPECT_NEAR(q[0], 1.0, 1e-15);
  EXPECT_NEAR(q[1], 0.5, 1e-15);
  for (double v : q_unconditional(ones, 0.0, config(RewardMode::kBoth, 0.9))) {
    EXPECT_EQ(v, 0.0);
  }
  const std::vector<double> zeros(3, 0.0);
  for (double v : q_unconditional(zeros, 0.8, config(RewardMode::kBoth, 0.9))) {
    EXPECT_EQ(v, 0.0);
  }
}

TEST(QUnconditional, Modes) {
  const std::vector<double> r{0.3, -0.1, 0.6};
  const auto fin = q_unconditional(r, 0.7, config(RewardMode::kFinalOnly, 0.9));
  const auto feat = q_unconditional(r, 0.7, config(RewardMode::kFeatureOnly, 0.9));
  const auto both = q_unconditional(r, 0.7, config(RewardMode::kBoth, 0.9));
  for (std::size_t t = 1; t <= 3; ++t) {
    EXPECT_EQ(fin[t - 1], 0.7);
    EXPECT_NEAR(feat[t - 1], cum_oracle(r, 0.9, t), 1e-12);
    EXPECT_NEAR(both[t - 1], 0.7 * cum_oracle(r, 0.9, t), 1e-12);
  }
}

TEST(QUnconditional, FinalRewardOutOfRangeThrows) {
  const std::vector<double> r{0.3};
  EXPECT_THROW(q_unconditional(r, 1.5, config(RewardMode::kBoth, 0.9)), ConfigError);
  EXPECT_THROW(q_unconditional(r, -0.1, config(RewardMode::kBoth, 0.9)), ConfigError);
}

TEST(QConditional, Examples) {
  const std::vector<double> r{0.2, 0.8};
  const auto q = q_conditional(r, 0.5, config(RewardMode::kBoth, 0.9));
  EXPECT_NEAR(q[0], 0.5 * (0.9 * 0.2 + 0.81 * 0.8), 1e-15);
  EXPECT_NEAR(q[0], 0.414, 1e-12);
  EXPECT_NEAR(q[1], 0.324, 1e-12);
  for (double v : q_conditional(r, 0.0, config(RewardMode::kBoth, 0.9))) {
    EXPECT_EQ(v, 0.0);
  }
  const std::vector<double> ones(4, 1.0);
  for (double v : q_conditional(ones, -1.0, config(RewardMode::kBoth, 1.0))) {
    EXPECT_EQ(v, 0.0);
  }
}

TEST(QConditional, BranchesAndClampMatchOracle) {
  Rng rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> r(1 + rng.below(10));
    for (double& v : r) v = 2.0 * rng.uniform() - 1.0;
    const double rs = 2.0 * rng.uniform() - 1.0, gamma = rng.uniform();
    const bool clamp = rng.uniform() < 0.5;
    std::vector<double> rc = r;
    if (clamp) {
      for (double& v : rc) v = std::min(1.0, std::max(0.0, v));
    }
    std::vector<double> flipped = rc;
    for (double& v : flipped) v = 1.0 - v;
    const auto q = q_conditional(r, rs, config(RewardMode::kBoth, gamma, clamp));
    for (std::size_t t = 1; t <= r.size(); ++t) {
      const double want =
          rs > 0 ? rs * cum_oracle(rc, gamma, t) : rs * cum_oracle(flipped, gamma, t);
      EXPECT_NEAR(q[t - 1], want, 1e-12);
    }
  }
}

TEST(QConditional, Modes) {
  const std::vector<double> r{0.4, 1.3, -0.2};
  const auto fin = q_conditional(r, -0.3, config(RewardMode::kFinalOnly, 0.9));
  const auto feat = q_conditional(r, -0.3, config(RewardMode::kFeatureOnly, 0.9));
  const std::vector<double> rc{0.4, 1.0, 0.0};
  for (std::size_t t = 1; t <= 3; ++t) {
    EXPECT_EQ(fin[t - 1], -0.3);
    EXPECT_NEAR(feat[t - 1], cum_oracle(rc, 0.9, t), 1e-12);
  }
}

TEST(PolicyGradient, SurrogateValueAndGradient) {
  const std::vector<double> lp{-0.5, -1.2, -0.1};
  const std::vector<double> q{0.3, -0.4, 1.0};
  EXPECT_NEAR(policy_gradient_loss(lp, q),
              -(0.3 * -0.5 + -0.4 * -1.2 + 1.0 * -0.1) / 3.0, 1e-15);
  Parameter x("x", Tensor::Vector({0.2, -0.7, 1.1}));
  auto fn = [&](Tape& t) {
    Var ls = t.log_softmax(t.param(x));
    std::vector<Var> picks{t.pick(ls, 0), t.pick(ls, 2), t.pick(ls, 0)};
    return policy_gradient_loss(t, picks, q);
  };
  EXPECT_LT(grad_check(fn, {&x}).max_rel_error, 1e-5);
  Tape tape;
  Var ls = tape.log_softmax(tape.param(x));
  std::vector<Var> picks{tape.pick(ls, 0), tape.pick(ls, 2), tape.pick(ls, 0)};
  const std::vector<double> vals{tape.scalar(picks[0]), tape.scalar(picks[1]),
                                 tape.scalar(picks[2])};
  EXPECT_NEAR(tape.scalar(policy_gradient_loss(tape, picks, q)),
              policy_gradient_loss(vals, q), 1e-15);
}

TEST(PolicyGradient, ZeroQGivesZeroGradient) {
  Parameter x("x", Tensor::Vector({0.2, -0.7, 1.1}));
  x.zero_grad();
  Tape tape;
  Var ls = tape.log_softmax(tape.param(x));
  const std::vector<Var> picks{tape.pick(ls, 1), tape.pick(ls, 2)};
  const std::vector<double> q{0.0, 0.0};
  tape.backward(policy_gradient_loss(tape, picks, q));
  for (double g : x.grad.data) EXPECT_EQ(g, 0.0);
}

TEST(SelfCritical, Subtraction) {
  EXPECT_DOUBLE_EQ(self_critical_reward(0.4, 0.1), 0.4 - 0.1);
  EXPECT_EQ(self_critical_reward(0.37, 0.37), 0.0);
}

TEST(RewardConfig, Validation) {
  RewardConfig c;
  c.validate();
  c.lookahead = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.lookahead = 4;
  c.gamma = 1.2;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(parse_reward_mode("final-only"), RewardMode::kFinalOnly);
  EXPECT_EQ(parse_reward_mode("feature"), RewardMode::kFeatureOnly);
  EXPECT_EQ(parse_reward_mode("both"), RewardMode::kBoth);
  EXPECT_THROW(parse_reward_mode("everything"), ConfigError);
  for (RewardMode m : {RewardMode::kFinalOnly, RewardMode::kFeatureOnly,
                       RewardMode::kBoth}) {
    EXPECT_EQ(parse_reward_mode(to_string(m)), m);
  }
}

TEST(RewardTrace, Csv) {
  RewardTrace trace;
  trace.rg = {0.0, 0.5};
  trace.q = {0.25, 0.125};
  std::ostringstream out;
  trace.write_csv(out);
  EXPECT_EQ(out.str(), "step,r_g,q\n1,0,0.25\n2,0.5,0.125\n");
}

}  // namespace
}  // namespace gsg
