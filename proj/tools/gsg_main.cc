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

// gsg: pretrain, fine-tune, sample, score and inspect guided generators.
// Exit codes: 0 ok, 1 runtime error, 2 usage error or unreadable input.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gsg/corpus.h"
#include "gsg/eval.h"
#include "gsg/grammar.h"
#include "gsg/model.h"
#include "gsg/rewards.h"
#include "gsg/trainer.h"

namespace {

using namespace gsg;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_file(const std::string& path, const char* what) {
  if (!std::filesystem::is_regular_file(path)) {
    throw UsageError(std::string(what) + " not found: " + path);
  }
}

std::string default_log(const std::string& out) { return out + ".csv"; }

void write_log(const TrainLog& log, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw ConfigError("cannot write log: " + path);
  log.write_csv(f);
}

TrainConfig load_config(const std::string& path) {
  if (path.empty()) return TrainConfig{};
  require_file(path, "config file");
  return TrainConfig::load_file(path);
}

// --- pretrain -------------------------------------------------------------

struct PretrainArgs {
  std::string corpus, pairs, config, out, log;
  std::optional<std::size_t> epochs;
};

int run_pretrain(const PretrainArgs& a) {
  if (a.corpus.empty() == a.pairs.empty()) {
    throw UsageError("pretrain needs exactly one of --corpus or --pairs");
  }
  TrainConfig cfg = load_config(a.config);
  if (a.epochs) cfg.pretrain_epochs = *a.epochs;
  TrainLog log;
  std::unique_ptr<Session> s;
  if (!a.corpus.empty()) {
    require_file(a.corpus, "corpus file");
    const std::vector<std::string> lines = read_lines(a.corpus);
    if (lines.empty()) throw ConfigError("corpus file is empty: " + a.corpus);
    const Vocab vocab = Vocab::build(lines, cfg.min_count);
    const Corpus corpus = make_corpus(lines, vocab, cfg.model.max_len);
    s = make_session(vocab, cfg);
    log = pretrain(*s, corpus, cfg.pretrain_epochs);
  } else {
    require_file(a.pairs, "pairs file");
    const auto pairs = read_pairs(a.pairs);
    std::vector<std::string> lines;
    for (const auto& [src, tgt] : pairs) {
      lines.push_back(src);
      lines.push_back(tgt);
    }
    const Vocab vocab = Vocab::build(lines, cfg.min_count);
    const PairedCorpus pc = make_paired_corpus(pairs, vocab, cfg.model.max_len);
    s = make_session(vocab, cfg);
    log = pretrain_conditional(*s, pc, cfg.pretrain_epochs);
  }
  save_checkpoint(*s, a.out);
  write_log(log, a.log.empty() ? default_log(a.out) : a.log);
  std::cerr << "wrote " << a.out << " (vocab " << s->model.vocab.size()
            << ", " << cfg.pretrain_epochs << " epochs)\n";
  return 0;
}

// --- train-gmgan / train-gmst -----------------------------------------------

struct FinetuneArgs {
  std::string ckpt, data, config, reward_mode, out, log;
  std::optional<std::size_t> steps;
  std::size_t save_every = 0;
};

std::unique_ptr<Session> open_checkpoint(const std::string& path) {
  require_file(path, "checkpoint");
  return load_checkpoint(path);
}

// Config file and --reward-mode override the checkpoint's training keys.
// Model shape must stay the same.
void override_config(Session& s, const FinetuneArgs& a) {
  TrainConfig cfg = s.config;
  if (!a.config.empty()) {
    require_file(a.config, "config file");
    std::ifstream in(a.config);
    std::ostringstream text;
    text << in.rdbuf();
    cfg.apply(text.str());
  }
  if (!a.reward_mode.empty()) cfg.reward.mode = parse_reward_mode(a.reward_mode);
  TrainConfig probe = cfg;
  probe.model = s.config.model;
  probe.reward.lookahead = s.config.reward.lookahead;
  if (probe.to_text() != cfg.to_text()) {
    throw ConfigError("config changes the model shape or lookahead of " +
                      a.ckpt);
  }
  cfg.validate();
  s.config = cfg;
}

template <typename Run>
int finetune(const FinetuneArgs& a, Run run) {
  std::unique_ptr<Session> s = open_checkpoint(a.ckpt);
  override_config(*s, a);
  const std::size_t steps = a.steps ? *a.steps : s->config.rl_steps;
  const std::size_t chunk = a.save_every > 0 ? a.save_every : steps;
  TrainLog log;
  std::size_t done = 0;
  do {
    const std::size_t n = std::min(chunk, steps - done);
    log.append(run(*s, n));
    done += n;
    save_checkpoint(*s, a.out);
  } while (done < steps);
  write_log(log, a.log.empty() ? default_log(a.out) : a.log);
  std::cerr << "wrote " << a.out << " (" << steps << " steps, reward mode "
            << to_string(s->config.reward.mode) << ")\n";
  return 0;
}

int run_gmgan(const FinetuneArgs& a) {
  require_file(a.data, "corpus file");
  std::unique_ptr<Session> probe = open_checkpoint(a.ckpt);
  const Corpus corpus =
      load_corpus(a.data, probe->model.vocab, probe->config.model.max_len);
  probe.reset();
  return finetune(a, [&](Session& s, std::size_t n) {
    return train_gmgan(s, corpus, n);
  });
}

int run_gmst(const FinetuneArgs& a) {
  require_file(a.data, "pairs file");
  std::unique_ptr<Session> probe = open_checkpoint(a.ckpt);
  const PairedCorpus pairs = make_paired_corpus(
      read_pairs(a.data), probe->model.vocab, probe->config.model.max_len);
  probe.reset();
  return finetune(a, [&](Session& s, std::size_t n) {
    return train_gmst(s, pairs, n);
  });
}

// --- generate ---------------------------------------------------------------

struct GenerateArgs {
  std::string ckpt, condition;
  std::size_t num = 1;
  std::uint64_t seed = 0;
  bool greedy = false;
  double temperature = 1.0;
};

int run_generate(const GenerateArgs& a) {
  std::unique_ptr<Session> s = open_checkpoint(a.ckpt);
  const Model& m = s->model;
  const Policy policy = m.policy();
  Rng seeds(mix_seed(a.seed));
  auto emit = [&](const Tensor& z) {
    Rng rng(seeds.next());
    const SampleOutput out = a.greedy ? greedy_decode(policy, z)
                                      : sample_sequence(policy, z, rng,
                                                        a.temperature);
    std::cout << decode(out.ids, m.vocab) << '\n';
  };
  if (a.condition.empty()) {
    for (std::size_t i = 0; i < a.num; ++i) {
      Rng zr(seeds.next());
      emit(noise_state(m.encoder.feature_dim(), zr));
    }
    return 0;
  }
  require_file(a.condition, "condition file");
  for (const std::string& line : read_lines(a.condition)) {
    const Tensor z =
        m.encoder.encode_prefix(encode(line, m.vocab, s->config.model.max_len));
    for (std::size_t i = 0; i < a.num; ++i) emit(z);
  }
  return 0;
}

// --- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
  std::string hyps, refs;
  std::size_t max_n = 4;
  bool self = false, aligned = false, smooth = false, csv = false;
};

int run_evaluate(const EvaluateArgs& a) {
  require_file(a.hyps, "hypotheses file");
  TokenInterner intern;
  std::vector<Tokens> hyps;
  for (const std::string& l : read_lines(a.hyps)) hyps.push_back(intern(l));
  if (hyps.empty()) throw ConfigError("hypotheses file is empty: " + a.hyps);
  const BleuOptions opt{a.max_n, a.smooth};
  BleuReport report;
  if (a.self) {
    if (hyps.size() < 2) {
      throw ConfigError("self-BLEU needs at least 2 hypotheses");
    }
    report = self_bleu(hyps, opt);
  } else {
    if (a.refs.empty()) throw UsageError("--refs is required without --self");
    require_file(a.refs, "references file");
    std::vector<Tokens> refs;
    for (const std::string& l : read_lines(a.refs)) refs.push_back(intern(l));
    if (refs.empty()) throw ConfigError("references file is empty: " + a.refs);
    if (a.aligned) {
      if (refs.size() != hyps.size()) {
        throw ConfigError("--aligned needs as many references as hypotheses");
      }
      std::vector<std::vector<Tokens>> per(refs.size());
      for (std::size_t i = 0; i < refs.size(); ++i) per[i] = {refs[i]};
      report = bleu(hyps, per, opt);
    } else {
      report = bleu_shared(hyps, refs, opt);
    }
  }
  if (a.csv) {
    report.write_csv(std::cout);
  } else {
    report.write_table(std::cout);
  }
  return 0;
}

// --- reward-trace -----------------------------------------------------------

struct TraceArgs {
  std::string ckpt, sentence;
  std::uint64_t seed = 0;
};

int run_reward_trace(const TraceArgs& a) {
  std::unique_ptr<Session> s = open_checkpoint(a.ckpt);
  const Model& m = s->model;
  if (split_tokens(a.sentence).empty()) throw ConfigError("empty sentence");
  const Sentence ids = encode(a.sentence, m.vocab, s->config.model.max_len);
  Rng rng(mix_seed(a.seed));
  const Tensor z = noise_state(m.encoder.feature_dim(), rng);
  const std::vector<Tensor> f = m.encoder.prefix_features(ids);
  const std::vector<Tensor> p =
      m.guider.predictions(z, std::span<const Tensor>(f).first(ids.size()));
  const std::vector<double> rg = feature_matching_rewards(f, p, m.lookahead);
  std::cout << "position,token,r_g\n";
  std::cout.precision(17);
  for (std::size_t t = 1; t <= ids.size(); ++t) {
    std::cout << t << ',' << m.vocab.token(ids[t - 1]) << ',' << rg[t - 1]
              << '\n';
  }
  return 0;
}

// --- grammar ----------------------------------------------------------------

struct GrammarArgs {
  std::string grammar;
  std::size_t num = 100, max_len = 15;
  std::uint64_t seed = 0;
};

int run_grammar(const GrammarArgs& a) {
  require_file(a.grammar, "grammar file");
  const Grammar g = Grammar::load_file(a.grammar, a.seed);
  if (a.num == 0) return 0;
  for (const std::string& line : sample_grammar(g, a.num, a.max_len)) {
    std::cout << line << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"guided sequence generation"};
  app.require_subcommand(1);

  PretrainArgs pa;
  auto* pre = app.add_subcommand("pretrain", "MLE pretraining");
  pre->add_option("--corpus", pa.corpus, "one sentence per line");
  pre->add_option("--pairs", pa.pairs, "source<TAB>target per line");
  pre->add_option("--config", pa.config, "key = value config file");
  pre->add_option("--out", pa.out, "output checkpoint")->required();
  pre->add_option("--epochs", pa.epochs, "overrides train.pretrain_epochs");
  pre->add_option("--log", pa.log, "TrainLog CSV (default OUT.csv)");

  FinetuneArgs ga, sa;
  auto add_finetune = [&](const char* name, const char* help,
                          const char* data_flag, FinetuneArgs& a) {
    auto* c = app.add_subcommand(name, help);
    c->add_option("--ckpt", a.ckpt, "pretrained checkpoint")->required();
    c->add_option(data_flag, a.data)->required();
    c->add_option("--config", a.config, "overrides for training keys");
    c->add_option("--reward-mode", a.reward_mode, "final | feature | both")
        ->check(CLI::IsMember({"final", "feature", "both"}));
    c->add_option("--steps", a.steps, "overrides rl.steps");
    c->add_option("--save-every", a.save_every,
                  "write OUT every N steps so runs can resume");
    c->add_option("--out", a.out, "output checkpoint")->required();
    c->add_option("--log", a.log, "TrainLog CSV (default OUT.csv)");
    return c;
  };
  auto* gm = add_finetune("train-gmgan", "adversarial fine-tuning",
                          "--corpus", ga);
  auto* gs = add_finetune("train-gmst", "self-critical fine-tuning", "--pairs",
                          sa);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "sample sentences");
  g->add_option("--ckpt", gen.ckpt)->required();
  g->add_option("--num", gen.num, "sentences (per source with --condition)");
  g->add_option("--seed", gen.seed);
  g->add_option("--condition", gen.condition, "source sentences, one per line");
  g->add_flag("--greedy", gen.greedy, "argmax decoding");
  g->add_option("--temperature", gen.temperature)
      ->check(CLI::PositiveNumber);

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "BLEU and self-BLEU");
  e->add_option("--hyps", ev.hyps)->required();
  e->add_option("--refs", ev.refs, "shared reference set");
  e->add_option("--max-n", ev.max_n)->check(CLI::Range(1, 10));
  e->add_flag("--self", ev.self, "self-BLEU of the hypotheses");
  e->add_flag("--aligned", ev.aligned, "line i of refs is the only reference "
                                       "for line i of hyps");
  e->add_flag("--smooth", ev.smooth, "smooth zero n-gram matches");
  e->add_flag("--csv", ev.csv, "n,bleu,precision rows");

  TraceArgs tr;
  auto* t = app.add_subcommand("reward-trace", "per-token guider rewards");
  t->add_option("--ckpt", tr.ckpt)->required();
  t->add_option("--sentence", tr.sentence)->required();
  t->add_option("--seed", tr.seed, "noise initial state");

  GrammarArgs gr;
  auto* gg = app.add_subcommand("grammar", "sample a PCFG corpus");
  gg->add_option("--grammar", gr.grammar)->required();
  gg->add_option("--num", gr.num);
  gg->add_option("--seed", gr.seed);
  gg->add_option("--max-len", gr.max_len);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return kExitUsage;
  }

  try {
    if (*pre) return run_pretrain(pa);
    if (*gm) return run_gmgan(ga);
    if (*gs) return run_gmst(sa);
    if (*g) return run_generate(gen);
    if (*e) return run_evaluate(ev);
    if (*t) return run_reward_trace(tr);
    if (*gg) return run_grammar(gr);
  } catch (const UsageError& err) {
    std::cerr << "gsg: " << err.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& err) {
    std::cerr << "gsg: " << err.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& err) {
    std::cerr << "gsg: " << err.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
