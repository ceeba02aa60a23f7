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

#include <cstring>
#include <set>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <gtest/gtest.h>

#include "gsg/grammar.h"
#include "gsg/model.h"
#include "gsg/trainer.h"

namespace gsg {
namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream(path, std::ios::binary) << bytes;
}

struct Tiny {
  std::vector<std::string> lines;
  Vocab vocab;
  TrainConfig config;
  Corpus corpus;

  Tiny() {
    const Grammar g = Grammar::load_file(GSG_DATA_DIR "/desk.grammar", 2);
    lines = sample_grammar(g, 60, 12);
    vocab = Vocab::build(lines);
    config = TrainConfig::parse(
        "seed = 5\nmodel.d_emb = 8\nmodel.filters = 4\nmodel.hidden = 12\n"
        "model.guider_hidden = 10\nmodel.max_len = 13\ndisc.d_emb = 6\n"
        "disc.filters = 3\ntrain.batch_size = 16\n"
        "train.disc_pretrain_steps = 2\nrl.batch_size = 4\n");
    corpus = make_corpus(lines, vocab, config.model.max_len);
  }
};

TEST(Checkpoint, RoundTripPreservesEverything) {
  Tiny t;
  auto s = make_session(t.vocab, t.config);
  pretrain(*s, t.corpus, 1);
  const std::string path = temp_path("gsg_ckpt_roundtrip.bin");
  save_checkpoint(*s, path);
  auto back = load_checkpoint(path);
  EXPECT_EQ(back->model.vocab, s->model.vocab);
  EXPECT_EQ(back->config.to_text(), s->config.to_text());
  EXPECT_EQ(back->rng, s->rng);
  EXPECT_EQ(back->pretrain_epochs_done, 1);
  EXPECT_EQ(back->rl_step, 0);
  const ParameterList a = s->model.all_params(), b = back->model.all_params();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i]->name, b[i]->name);
    EXPECT_EQ(a[i]->value, b[i]->value) << a[i]->name;
  }
  EXPECT_EQ(back->generator_opt.steps(), s->generator_opt.steps());
  EXPECT_EQ(back->generator_opt.first_moments(), s->generator_opt.first_moments());
  EXPECT_EQ(back->guider_opt.second_moments(), s->guider_opt.second_moments());
  const std::string again = temp_path("gsg_ckpt_roundtrip2.bin");
  save_checkpoint(*back, again);
  EXPECT_EQ(read_bytes(path), read_bytes(again));
  std::filesystem::remove(path);
  std::filesystem::remove(again);
}

TEST(Checkpoint, ResumedTrainingMatchesUninterrupted) {
  Tiny t;
  auto first = make_session(t.vocab, t.config);
  pretrain(*first, t.corpus, 1);
  // pretrain() runs the discriminator steps after its last epoch, so the
  // reference run is one epoch, then one more.
  auto reference = make_session(t.vocab, t.config);
  pretrain(*reference, t.corpus, 1);
  pretrain(*reference, t.corpus, 1);
  const std::string path = temp_path("gsg_ckpt_resume.bin");
  save_checkpoint(*first, path);
  auto resumed = load_checkpoint(path);
  pretrain(*resumed, t.corpus, 1);
  const std::string a = temp_path("gsg_ckpt_resume_a.bin");
  const std::string b = temp_path("gsg_ckpt_resume_b.bin");
  save_checkpoint(*reference, a);
  save_checkpoint(*resumed, b);
  EXPECT_EQ(read_bytes(a), read_bytes(b));
  for (const auto& p : {path, a, b}) std::filesystem::remove(p);
}

TEST(Checkpoint, RejectsCorruptFiles) {
  Tiny t;
  auto s = make_session(t.vocab, t.config);
  const std::string path = temp_path("gsg_ckpt_corrupt.bin");
  save_checkpoint(*s, path);
  const std::string good = read_bytes(path);

  std::string bad = good;
  bad[0] = 'X';
  write_bytes(path, bad);
  EXPECT_THROW(load_checkpoint(path), FormatError);

  bad = good;
  const std::uint32_t version = kCheckpointVersion + 1;
  std::memcpy(bad.data() + 4, &version, sizeof(version));
  write_bytes(path, bad);
  EXPECT_THROW(load_checkpoint(path), FormatError);

  write_bytes(path, good.substr(0, good.size() / 2));
  EXPECT_THROW(load_checkpoint(path), FormatError);

  std::filesystem::remove(path);
  EXPECT_THROW(load_checkpoint(path), ConfigError);
}

TEST(Checkpoint, FreshSessionsAreSeedDeterministic) {
  Tiny t;
  auto a = make_session(t.vocab, t.config);
  auto b = make_session(t.vocab, t.config);
  const ParameterList pa = a->model.all_params(), pb = b->model.all_params();
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i]->value, pb[i]->value);
  TrainConfig other = t.config;
  other.seed = 6;
  auto c = make_session(t.vocab, other);
  EXPECT_NE(c->model.all_params()[0]->value, pa[0]->value);
}

TEST(Checkpoint, ParameterNamesAreUnique) {
  Tiny t;
  auto s = make_session(t.vocab, t.config);
  std::set<std::string> names;
  for (const Parameter* p : s->model.all_params()) {
    EXPECT_TRUE(names.insert(p->name).second) << p->name;
  }
}

}  // namespace
}  // namespace gsg
