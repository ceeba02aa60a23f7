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
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <gtest/gtest.h>

#include "gsg/grammar.h"
#include "gsg/model.h"
#include "gsg/trainer.h"
#include "test_util.h"

namespace gsg {
namespace {

using testing::snapshot;
using testing::unchanged;

const char* const kTinyConfig =
    "seed = 5\nmodel.d_emb = 8\nmodel.filters = 4\nmodel.hidden = 12\n"
    "model.guider_hidden = 10\nmodel.max_len = 13\ndisc.d_emb = 6\n"
    "disc.filters = 3\ntrain.batch_size = 16\ntrain.disc_pretrain_steps = 2\n"
    "rl.batch_size = 4\nrl.steps = 4\n";

struct Unconditional {
  Vocab vocab;
  TrainConfig config;
  Corpus corpus;

  explicit Unconditional(const std::string& extra = "") {
    const Grammar g = Grammar::load_file(GSG_DATA_DIR "/desk.grammar", 2);
    const std::vector<std::string> lines = sample_grammar(g, 80, 12);
    vocab = Vocab::build(lines);
    config = TrainConfig::parse(std::string(kTinyConfig) + extra);
    corpus = make_corpus(lines, vocab, config.model.max_len);
  }
};

struct Conditional {
  Vocab vocab;
  TrainConfig config;
  PairedCorpus pairs;

  explicit Conditional(const std::string& extra = "") {
    const Grammar g = Grammar::load_file(GSG_DATA_DIR "/copy.grammar", 4);
    const std::vector<std::string> lines = sample_grammar(g, 40, 8);
    std::vector<std::pair<std::string, std::string>> p;
    for (const std::string& l : lines) p.emplace_back(l, l);
    vocab = Vocab::build(lines);
    config = TrainConfig::parse(std::string(kTinyConfig) + extra);
    pairs = make_paired_corpus(p, vocab, config.model.max_len);
  }
};

std::string checkpoint_bytes(const Session& s, const std::string& name) {
  const auto path = (std::filesystem::temp_directory_path() / name).string();
  save_checkpoint(s, path);
  std::ifstream in(path, std::ios::binary);
  std::string bytes{std::istreambuf_iterator<char>(in),
                    std::istreambuf_iterator<char>()};
  std::filesystem::remove(path);
  return bytes;
}

TEST(Schedule, LinearInterpolation) {
  EXPECT_EQ(mixed_loss_schedule(0, 10, 0.5, 0.0), 0.5);
  EXPECT_EQ(mixed_loss_schedule(10, 10, 0.5, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(mixed_loss_schedule(5, 10, 0.8, 0.2), 0.5);
  EXPECT_EQ(mixed_loss_schedule(0, 0, 0.3, 0.1), 0.3);
  EXPECT_THROW(mixed_loss_schedule(11, 10, 0.5, 0.0), ConfigError);
}

TEST(TrainLog, CsvHeaderAndEmptyFields) {
  TrainLog log;
  TrainRecord r;
  r.step = 3;
  r.mle_loss = 1.5;
  r.d_loss = 0.25;
  log.records.push_back(r);
  EXPECT_EQ(log.csv(),
            "step,mle_loss,mean_rg,mean_q,d_loss,bleu2,self_bleu2\n"
            "3,1.5,,,0.25,,\n");
}

TEST(ParallelFor, ResultsIndependentOfThreadCount) {
  Unconditional u;
  auto s = make_session(u.vocab, u.config);
  auto run = [&](const char* threads) {
    setenv("GSG_THREADS", threads, 1);
    Rng seeds(17);
    std::vector<std::vector<int>> out;
    for (const SampleOutput& x : sample_from_noise(s->model.policy(), 9, seeds, 1.0)) {
      out.push_back(x.ids);
    }
    return out;
  };
  const auto one = run("1");
  const auto four = run("4");
  unsetenv("GSG_THREADS");
  EXPECT_EQ(one, four);
}

TEST(ParallelFor, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(8,
                            [](std::size_t i) {
                              if (i == 5) throw ConfigError("boom");
                            }),
               ConfigError);
}

TEST(Pretrain, ZeroEpochsChangeNothing) {
  Unconditional u;
  auto s = make_session(u.vocab, u.config);
  const ParameterList all = s->model.all_params();
  const auto before = snapshot(all);
  const TrainLog log = pretrain(*s, u.corpus, 0);
  EXPECT_TRUE(log.records.empty());
  EXPECT_TRUE(unchanged(all, before));
}

TEST(Pretrain, BeatsUniformAndLogsEachEpoch) {
  Unconditional u("train.batch_size = 8\n");
  auto s = make_session(u.vocab, u.config);
  const TrainLog log = pretrain(*s, u.corpus, 3);
  ASSERT_EQ(log.records.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(log.records[i].step, static_cast<std::int64_t>(i + 1));
    ASSERT_TRUE(log.records[i].mle_loss.has_value());
  }
  EXPECT_TRUE(log.records.back().d_loss.has_value());
  EXPECT_FALSE(log.records.front().d_loss.has_value());
  EXPECT_LT(*log.records.back().mle_loss, std::log(double(u.vocab.size())));
  Rng rng(1);
  EXPECT_LT(perplexity(s->model.policy(), u.corpus.sentences, InitMode::kNoise, rng),
            static_cast<double>(u.vocab.size()));
}

TEST(Pretrain, MleUpdatesEncoder) {
  Unconditional u("train.noise_init_prob = 0\n");
  auto s = make_session(u.vocab, u.config);
  const ParameterList enc = s->model.encoder_params();
  const auto before = snapshot(enc);
  mle_epoch(*s, std::span(u.corpus.sentences).first(8), {});
  EXPECT_GT(testing::change_norm(enc, before), 0.0);
}

TEST(Pretrain, OverfitsSingleSentence) {
  Unconditional u("train.batch_size = 1\ntrain.lr_generator = 1e-2\n"
                  "train.lr_encoder = 1e-2\n");
  auto s = make_session(u.vocab, u.config);
  const std::vector<Sentence> one{u.corpus.sentences[0]};
  bool learned = false;
  Rng rng(3);
  const Tensor noise = noise_state(s->model.encoder.feature_dim(), rng);
  for (int step = 1; step <= 2000 && !learned; ++step) {
    mle_epoch(*s, one, {});
    if (step % 25 == 0) {
      const Policy p = s->model.policy();
      learned = greedy_decode(p, noise).ids == one[0] &&
                greedy_decode(p, s->model.encoder.encode_prefix(one[0])).ids == one[0];
    }
  }
  EXPECT_TRUE(learned);
}

TEST(Gmgan, NoStepsChangeNothing) {
  Unconditional u("rl.g_steps = 0\nrl.d_steps = 0\n");
  auto s = make_session(u.vocab, u.config);
  pretrain(*s, u.corpus, 1);
  const ParameterList all = s->model.all_params();
  const auto before = snapshot(all);
  const TrainLog log = train_gmgan(*s, u.corpus, 3);
  EXPECT_EQ(log.records.size(), 3u);
  EXPECT_TRUE(unchanged(all, before));
}

TEST(Gmgan, EncoderFrozenAndGeneratorMoves) {
  Unconditional u;
  auto s = make_session(u.vocab, u.config);
  pretrain(*s, u.corpus, 1);
  const ParameterList enc = s->model.encoder_params();
  const ParameterList gen = s->model.generator_params();
  const auto enc_before = snapshot(enc), gen_before = snapshot(gen);
  const TrainLog log = train_gmgan(*s, u.corpus, 2);
  EXPECT_TRUE(unchanged(enc, enc_before));
  EXPECT_GT(testing::change_norm(gen, gen_before), 0.0);
  ASSERT_EQ(log.records.size(), 2u);
  EXPECT_EQ(log.records[0].step, 1);
  EXPECT_EQ(log.records[1].step, 2);
  EXPECT_TRUE(log.records[0].mean_q.has_value());
  EXPECT_TRUE(log.records[0].d_loss.has_value());
}

TEST(Gmgan, RewardModesGiveDifferentUpdates) {
  Unconditional u;
  auto base = make_session(u.vocab, u.config);
  pretrain(*base, u.corpus, 1);
  const auto path =
      (std::filesystem::temp_directory_path() / "gsg_modes.bin").string();
  save_checkpoint(*base, path);
  std::vector<std::vector<Tensor>> after;
  for (RewardMode mode : {RewardMode::kFeatureOnly, RewardMode::kBoth,
                          RewardMode::kFinalOnly}) {
    auto s = load_checkpoint(path);
    s->config.reward.mode = mode;
    train_gmgan(*s, u.corpus, 1);
    after.push_back(snapshot(s->model.generator_params()));
  }
  std::filesystem::remove(path);
  EXPECT_NE(after[0], after[1]);
  EXPECT_NE(after[1], after[2]);
  EXPECT_NE(after[0], after[2]);
}

TEST(Gmgan, DivergenceGuardFires) {
  Unconditional u("rl.divergence_limit = 1e-12\nreward.mode = final\n");
  auto s = make_session(u.vocab, u.config);
  EXPECT_THROW(train_gmgan(*s, u.corpus, 1), TrainingDiverged);
}

TEST(Gmgan, Deterministic) {
  Unconditional u("eval.every = 1\neval.num_samples = 6\n");
  auto run = [&] {
    auto s = make_session(u.vocab, u.config);
    TrainLog log = pretrain(*s, u.corpus, 1);
    log.append(train_gmgan(*s, u.corpus, 2));
    return std::make_pair(log.csv(), checkpoint_bytes(*s, "gsg_det.bin"));
  };
  const auto a = run();
  const auto b = run();
  EXPECT_EQ(a.first, b.first);
  EXPECT_TRUE(a.second == b.second);
}

TEST(Gmst, GreedySamplesGiveExactlyZeroUpdate) {
  Conditional c("rl.temperature = 0\nrl.lambda_start = 0\nrl.lambda_end = 0\n");
  auto s = make_session(c.vocab, c.config);
  pretrain_conditional(*s, c.pairs, 1);
  const ParameterList all = s->model.all_params();
  const auto before = snapshot(all);
  std::size_t seen = 0;
  const TrainLog log = train_gmst(*s, c.pairs, 2, [&](const GmstSample& o) {
    ++seen;
    EXPECT_EQ(o.sample, o.greedy);
    EXPECT_EQ(o.advantage, 0.0);
  });
  EXPECT_EQ(seen, 2 * c.config.rl_batch_size);
  EXPECT_TRUE(unchanged(all, before));
  EXPECT_EQ(*log.records.back().mean_q, 0.0);
}

TEST(Gmst, LoggedAdvantageMatchesRecomputedBleu) {
  Conditional c;
  auto s = make_session(c.vocab, c.config);
  pretrain_conditional(*s, c.pairs, 1);
  std::vector<GmstSample> logged;
  train_gmst(*s, c.pairs, 2, [&](const GmstSample& o) { logged.push_back(o); });
  ASSERT_EQ(logged.size(), 2 * c.config.rl_batch_size);
  const BleuOptions metric{c.config.reward_max_n, c.config.reward_smoothing};
  bool nonzero = false;
  for (const GmstSample& o : logged) {
    std::vector<Tokens> refs;
    for (std::size_t i = 0; i < c.pairs.size(); ++i) {
      if (c.pairs.sources[i] == c.pairs.sources[o.pair]) {
        refs.push_back(strip_eos(c.pairs.targets[i]));
      }
    }
    const double rs = o.sample.empty() ? 0.0 : sentence_bleu(o.sample, refs, metric);
    const double rg = o.greedy.empty() ? 0.0 : sentence_bleu(o.greedy, refs, metric);
    EXPECT_EQ(o.sample_reward, rs);
    EXPECT_EQ(o.greedy_reward, rg);
    EXPECT_EQ(o.advantage, rs - rg);
    nonzero = nonzero || o.advantage != 0.0;
  }
  EXPECT_TRUE(nonzero);
}

TEST(Gmst, EncoderFrozen) {
  Conditional c;
  auto s = make_session(c.vocab, c.config);
  pretrain_conditional(*s, c.pairs, 1);
  const ParameterList enc = s->model.encoder_params();
  const auto before = snapshot(enc);
  train_gmst(*s, c.pairs, 2);
  EXPECT_TRUE(unchanged(enc, before));
}

TEST(Gmst, EmptyReferenceThrows) {
  Conditional c;
  auto s = make_session(c.vocab, c.config);
  PairedCorpus bad = c.pairs;
  bad.targets[0] = {kEos};
  EXPECT_THROW(train_gmst(*s, bad, 1), ConfigError);
}

TEST(Gmst, GreedyBleuInUnitInterval) {
  Conditional c;
  auto s = make_session(c.vocab, c.config);
  const double b = greedy_bleu(s->model.policy(), c.pairs, 4);
  EXPECT_GE(b, 0.0);
  EXPECT_LE(b, 1.0);
}

}  // namespace
}  // namespace gsg
