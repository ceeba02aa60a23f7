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

#include "gsg/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace gsg {
namespace {

void write_opt(std::ostream& out, const std::optional<double>& v) {
  out << ',';
  if (v) out << *v;
}

std::size_t total_tokens(std::span<const Sentence> s) {
  std::size_t n = 0;
  for (const Sentence& x : s) n += x.size();
  return n;
}

// Adds the gradient of weight * (mean per-token NLL) over targets to the
// generator (and, when train_encoder, the encoder). Without sources each
// sentence starts from noise with probability noise_prob, else from its own
// encoding. Returns the summed NLL.
double accumulate_mle(Session& s, std::span<const Sentence> targets,
                      std::span<const Sentence> sources, double weight,
                      bool train_encoder) {
  const Model& m = s.model;
  const Policy policy = m.policy();
  const double tokens = static_cast<double>(total_tokens(targets));
  if (tokens == 0.0) return 0.0;
  double nll = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    Tape tape;
    Var z;
    const Sentence* input = nullptr;
    if (!sources.empty()) {
      input = &sources[i];
    } else if (s.rng.uniform() < s.config.noise_init_prob) {
      z = tape.constant(noise_state(m.encoder.feature_dim(), s.rng));
    } else {
      input = &targets[i];
    }
    if (input) {
      z = train_encoder ? m.encoder.encode(tape, *input)
                        : tape.constant(m.encoder.encode_prefix(*input));
    }
    std::vector<Var> lps = token_log_probs(tape, policy, z, targets[i]);
    Var total = tape.add_n(lps);
    nll -= tape.scalar(total);
    tape.backward(total, -weight / tokens);
  }
  return nll;
}

ParameterList concat(ParameterList a, const ParameterList& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<Sentence> pick_rows(std::span<const Sentence> from,
                                std::span<const std::size_t> idx) {
  std::vector<Sentence> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(from[i]);
  return out;
}

std::vector<std::size_t> random_indices(std::size_t n, std::size_t count,
                                        Rng& rng) {
  std::vector<std::size_t> idx(count);
  for (std::size_t& i : idx) i = rng.below(n);
  return idx;
}

void check_q(std::span<const double> q_sum_abs, double tokens, double limit) {
  double total = 0.0;
  for (double v : q_sum_abs) total += v;
  const double mean = tokens > 0.0 ? total / tokens : 0.0;
  if (mean > limit) {
    std::ostringstream msg;
    msg << "mean |Q| = " << mean << " exceeds the divergence limit " << limit;
    throw TrainingDiverged(msg.str());
  }
}

double train_disc_step(Session& s, std::span<const Sentence> real) {
  const Policy policy = s.model.policy();
  const std::size_t b = s.config.rl_batch_size;
  std::vector<Sentence> reals =
      pick_rows(real, random_indices(real.size(), b, s.rng));
  std::vector<SampleOutput> fakes = sample_from_noise(policy, b, s.rng, 1.0);
  std::vector<Sentence> fake_ids;
  for (auto& f : fakes) fake_ids.push_back(std::move(f.ids));
  return train_discriminator(s.model.discriminator, reals, fake_ids,
                             s.disc_opt, s.config.clip_norm);
}

void maybe_evaluate(const Session& s, std::span<const Sentence> refs,
                    TrainRecord& rec) {
  const TrainConfig& c = s.config;
  if (c.eval_every == 0 || rec.step % static_cast<std::int64_t>(c.eval_every) != 0) {
    return;
  }
  std::vector<Tokens> r;
  for (const Sentence& x : refs) r.push_back(strip_eos(x));
  const EvalScores e =
      evaluate_samples(s.model.policy(), r, c.eval_samples, c.eval_max_n,
                       mix_seed(c.seed ^ (static_cast<std::uint64_t>(rec.step) << 20)));
  rec.bleu2 = e.bleu;
  rec.self_bleu2 = e.self_bleu;
}

GuiderTrainOptions guider_options(const TrainConfig& c) {
  GuiderTrainOptions o;
  o.lookahead = c.reward.lookahead;
  o.batch_size = c.batch_size;
  o.epochs = 1;
  o.noise_init_prob = c.noise_init_prob;
  o.clip_norm = c.clip_norm;
  return o;
}

}  // namespace

void TrainLog::append(const TrainLog& other) {
  records.insert(records.end(), other.records.begin(), other.records.end());
}

void TrainLog::write_csv(std::ostream& out) const {
  const auto prec = out.precision(17);
  out << "step,mle_loss,mean_rg,mean_q,d_loss,bleu2,self_bleu2\n";
  for (const TrainRecord& r : records) {
    out << r.step;
    write_opt(out, r.mle_loss);
    write_opt(out, r.mean_rg);
    write_opt(out, r.mean_q);
    write_opt(out, r.d_loss);
    write_opt(out, r.bleu2);
    write_opt(out, r.self_bleu2);
    out << '\n';
  }
  out.precision(prec);
}

std::string TrainLog::csv() const {
  std::ostringstream out;
  write_csv(out);
  return out.str();
}

double mixed_loss_schedule(std::size_t step, std::size_t total, double start,
                           double end) {
  if (step > total) throw ConfigError("schedule step beyond total");
  if (total == 0) return start;
  return start + (end - start) * static_cast<double>(step) /
                     static_cast<double>(total);
}

std::size_t worker_threads() {
  if (const char* env = std::getenv("GSG_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<std::size_t>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(worker_threads(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<SampleOutput> sample_from_noise(const Policy& policy,
                                            std::size_t n, Rng& seeds,
                                            double temperature) {
  std::vector<std::uint64_t> seed(n);
  for (auto& x : seed) x = seeds.next();
  std::vector<SampleOutput> out(n);
  parallel_for(n, [&](std::size_t i) {
    Rng rng(seed[i]);
    const Tensor z = noise_state(policy.encoder.feature_dim(), rng);
    out[i] = sample_sequence(policy, z, rng, temperature);
  });
  return out;
}

EvalScores evaluate_samples(const Policy& policy,
                            std::span<const Tokens> references, std::size_t n,
                            std::size_t max_n, std::uint64_t seed) {
  Rng seeds(seed);
  std::vector<Tokens> hyps;
  for (const SampleOutput& s : sample_from_noise(policy, n, seeds, 1.0)) {
    hyps.push_back(strip_eos(s.ids));
  }
  const BleuOptions opts{max_n, false};
  EvalScores e;
  e.bleu = bleu_shared(hyps, references, opts).bleu(max_n);
  if (hyps.size() >= 2) e.self_bleu = self_bleu(hyps, opts).bleu(max_n);
  return e;
}

double mle_epoch(Session& s, std::span<const Sentence> targets,
                 std::span<const Sentence> sources) {
  Corpus c;
  c.sentences.assign(targets.begin(), targets.end());
  const ParameterList params =
      concat(s.model.generator_params(), s.model.encoder_params());
  double nll = 0.0;
  for (const Batch& b :
       make_batches(c, s.config.batch_size, s.config.model.max_len, &s.rng)) {
    std::vector<Sentence> rows = pick_rows(targets, b.indices);
    std::vector<Sentence> srcs;
    if (!sources.empty()) srcs = pick_rows(sources, b.indices);
    zero_grads(params);
    nll += accumulate_mle(s, rows, srcs, 1.0, true);
    clip_grad_norm(params, s.config.clip_norm);
    s.generator_opt.step();
    s.encoder_opt.step();
  }
  return nll / static_cast<double>(total_tokens(targets));
}

TrainLog pretrain(Session& s, const Corpus& corpus, std::size_t epochs) {
  if (corpus.size() == 0) throw ConfigError("pretraining corpus is empty");
  TrainLog log;
  for (std::size_t e = 0; e < epochs; ++e) {
    TrainRecord rec;
    rec.mle_loss = mle_epoch(s, corpus.sentences, {});
    train_guider(s.model.guider, corpus.sentences, s.model.encoder,
                 s.guider_opt, guider_options(s.config), s.rng);
    rec.step = ++s.pretrain_epochs_done;
    if (e + 1 == epochs) {
      double d_loss = 0.0;
      for (std::size_t k = 0; k < s.config.disc_pretrain_steps; ++k) {
        d_loss = train_disc_step(s, corpus.sentences);
      }
      if (s.config.disc_pretrain_steps > 0) rec.d_loss = d_loss;
    }
    maybe_evaluate(s, corpus.sentences, rec);
    log.records.push_back(rec);
  }
  return log;
}

TrainLog pretrain_conditional(Session& s, const PairedCorpus& pairs,
                              std::size_t epochs) {
  if (pairs.size() == 0) throw ConfigError("paired corpus is empty");
  TrainLog log;
  for (std::size_t e = 0; e < epochs; ++e) {
    TrainRecord rec;
    rec.mle_loss = mle_epoch(s, pairs.targets, pairs.sources);
    train_guider(s.model.guider, pairs.targets, s.model.encoder, s.guider_opt,
                 guider_options(s.config), s.rng, pairs.sources);
    rec.step = ++s.pretrain_epochs_done;
    log.records.push_back(rec);
  }
  return log;
}

TrainLog train_gmgan(Session& s, const Corpus& corpus, std::size_t steps) {
  if (corpus.size() == 0) throw ConfigError("training corpus is empty");
  const TrainConfig& c = s.config;
  Model& m = s.model;
  const ParameterList gen = m.generator_params();
  const std::size_t total = c.total_rl_steps();
  s.rl_opt.set_lr(c.rl_lr_generator);
  TrainLog log;
  for (std::size_t round = 0; round < steps; ++round) {
    TrainRecord rec;
    const double lambda = mixed_loss_schedule(
        std::min<std::size_t>(static_cast<std::size_t>(s.rl_step), total),
        total, c.lambda_start, c.lambda_end);
    double rg_sum = 0.0, q_sum = 0.0, n_tokens = 0.0, mle_sum = 0.0,
           mle_tokens = 0.0;
    for (std::size_t g = 0; g < c.g_steps; ++g) {
      const Policy policy = m.policy();
      const std::size_t b = c.rl_batch_size;
      std::vector<SampleOutput> samples =
          sample_from_noise(policy, b, s.rng, c.temperature);
      std::vector<std::vector<double>> rg(b), q(b);
      std::vector<double> abs_q(b, 0.0);
      parallel_for(b, [&](std::size_t i) {
        const SampleOutput& x = samples[i];
        const double rf = m.discriminator.score(x.ids);
        rg[i] = feature_matching_rewards(x.features, x.predictions,
                                         c.reward.lookahead);
        q[i] = q_unconditional(rg[i], rf, c.reward);
        for (double v : q[i]) abs_q[i] += std::abs(v);
      });
      double batch_tokens = 0.0;
      for (std::size_t i = 0; i < b; ++i) {
        for (double v : rg[i]) rg_sum += v;
        for (double v : q[i]) q_sum += v;
        batch_tokens += static_cast<double>(q[i].size());
      }
      n_tokens += batch_tokens;
      check_q(abs_q, batch_tokens, c.divergence_limit);

      zero_grads(gen);
      if (lambda < 1.0) {
        for (std::size_t i = 0; i < b; ++i) {
          Tape tape;
          std::vector<Var> lps = token_log_probs(
              tape, policy, tape.constant(samples[i].init), samples[i].ids);
          Var loss = policy_gradient_loss(tape, lps, q[i]);
          tape.backward(loss, (1.0 - lambda) / static_cast<double>(b));
        }
      }
      if (lambda > 0.0) {
        std::vector<Sentence> real = pick_rows(
            corpus.sentences, random_indices(corpus.size(), b, s.rng));
        mle_sum += accumulate_mle(s, real, {}, lambda, false);
        mle_tokens += static_cast<double>(total_tokens(real));
      }
      // The encoder is frozen here; drop anything that reached it.
      zero_grads(m.encoder_params());
      clip_grad_norm(gen, c.clip_norm);
      s.rl_opt.step();
    }
    double d_loss = 0.0;
    for (std::size_t d = 0; d < c.d_steps; ++d) {
      d_loss = train_disc_step(s, corpus.sentences);
    }
    if (c.guider_refresh && (c.g_steps > 0 || c.d_steps > 0)) {
      std::vector<Sentence> real = pick_rows(
          corpus.sentences,
          random_indices(corpus.size(), c.rl_batch_size, s.rng));
      std::erase_if(real, [&](const Sentence& x) {
        return x.size() <= c.reward.lookahead;
      });
      if (!real.empty()) {
        GuiderTrainOptions o = guider_options(c);
        o.batch_size = real.size();
        train_guider(m.guider, real, m.encoder, s.guider_opt, o, s.rng);
      }
    }
    rec.step = ++s.rl_step;
    if (n_tokens > 0.0) {
      rec.mean_rg = rg_sum / n_tokens;
      rec.mean_q = q_sum / n_tokens;
    }
    if (mle_tokens > 0.0) rec.mle_loss = mle_sum / mle_tokens;
    if (c.d_steps > 0) rec.d_loss = d_loss;
    maybe_evaluate(s, corpus.sentences, rec);
    log.records.push_back(rec);
  }
  return log;
}

namespace {

std::map<Sentence, std::vector<Tokens>> references_by_source(
    const PairedCorpus& pairs) {
  std::map<Sentence, std::vector<Tokens>> refs;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    refs[pairs.sources[i]].push_back(strip_eos(pairs.targets[i]));
  }
  return refs;
}

}  // namespace

double greedy_bleu(const Policy& policy, const PairedCorpus& pairs,
                   std::size_t max_n) {
  const auto refs = references_by_source(pairs);
  std::vector<const Sentence*> sources;
  for (const auto& [src, r] : refs) sources.push_back(&src);
  std::vector<Tokens> hyps(sources.size());
  std::vector<std::vector<Tokens>> ref_sets(sources.size());
  parallel_for(sources.size(), [&](std::size_t i) {
    const Tensor z = policy.encoder.encode_prefix(*sources[i]);
    hyps[i] = strip_eos(greedy_decode(policy, z).ids);
  });
  for (std::size_t i = 0; i < sources.size(); ++i) {
    ref_sets[i] = refs.at(*sources[i]);
  }
  return bleu(hyps, ref_sets, {max_n, false}).bleu(max_n);
}

TrainLog train_gmst(Session& s, const PairedCorpus& pairs, std::size_t steps,
                    const GmstObserver& observer) {
  if (pairs.size() == 0) throw ConfigError("paired corpus is empty");
  const auto refs = references_by_source(pairs);
  for (const auto& [src, r] : refs) {
    for (const Tokens& t : r) {
      if (t.empty()) throw ConfigError("paired corpus has an empty reference");
    }
  }
  const TrainConfig& c = s.config;
  Model& m = s.model;
  const ParameterList gen = m.generator_params();
  const std::size_t total = c.total_rl_steps();
  const BleuOptions metric{c.reward_max_n, c.reward_smoothing};
  s.rl_opt.set_lr(c.rl_lr_generator);
  TrainLog log;
  for (std::size_t step = 0; step < steps; ++step) {
    TrainRecord rec;
    const double lambda = mixed_loss_schedule(
        std::min<std::size_t>(static_cast<std::size_t>(s.rl_step), total),
        total, c.lambda_start, c.lambda_end);
    const Policy policy = m.policy();
    const std::size_t b = c.rl_batch_size;
    const std::vector<std::size_t> idx = random_indices(pairs.size(), b, s.rng);
    std::vector<std::uint64_t> seeds(b);
    for (auto& x : seeds) x = s.rng.next();

    std::vector<Tensor> z(b);
    std::vector<SampleOutput> samples(b);
    std::vector<GmstSample> obs(b);
    std::vector<std::vector<double>> rg(b), q(b);
    std::vector<double> abs_q(b, 0.0);
    parallel_for(b, [&](std::size_t i) {
      const Sentence& src = pairs.sources[idx[i]];
      z[i] = m.encoder.encode_prefix(src);
      Rng rng(seeds[i]);
      samples[i] = sample_sequence(policy, z[i], rng, c.temperature);
      const SampleOutput greedy = greedy_decode(policy, z[i]);
      const std::vector<Tokens>& r = refs.at(src);
      GmstSample& o = obs[i];
      o.pair = idx[i];
      o.sample = strip_eos(samples[i].ids);
      o.greedy = strip_eos(greedy.ids);
      o.sample_reward = o.sample.empty() ? 0.0 : sentence_bleu(o.sample, r, metric);
      o.greedy_reward = o.greedy.empty() ? 0.0 : sentence_bleu(o.greedy, r, metric);
      o.advantage = self_critical_reward(o.sample_reward, o.greedy_reward);
      rg[i] = feature_matching_rewards(samples[i].features,
                                       samples[i].predictions,
                                       c.reward.lookahead);
      q[i] = q_conditional(rg[i], o.advantage, c.reward);
      for (double v : q[i]) abs_q[i] += std::abs(v);
    });
    double rg_sum = 0.0, q_sum = 0.0, n_tokens = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
      obs[i].step = s.rl_step + 1;
      if (observer) observer(obs[i]);
      for (double v : rg[i]) rg_sum += v;
      for (double v : q[i]) q_sum += v;
      n_tokens += static_cast<double>(q[i].size());
    }
    check_q(abs_q, n_tokens, c.divergence_limit);

    zero_grads(gen);
    if (lambda < 1.0) {
      for (std::size_t i = 0; i < b; ++i) {
        Tape tape;
        std::vector<Var> lps =
            token_log_probs(tape, policy, tape.constant(z[i]), samples[i].ids);
        Var loss = policy_gradient_loss(tape, lps, q[i]);
        tape.backward(loss, (1.0 - lambda) / static_cast<double>(b));
      }
    }
    double mle_sum = 0.0, mle_tokens = 0.0;
    if (lambda > 0.0) {
      const std::vector<std::size_t> mi = random_indices(pairs.size(), b, s.rng);
      std::vector<Sentence> tgt = pick_rows(pairs.targets, mi);
      std::vector<Sentence> src = pick_rows(pairs.sources, mi);
      mle_sum = accumulate_mle(s, tgt, src, lambda, false);
      mle_tokens = static_cast<double>(total_tokens(tgt));
    }
    zero_grads(m.encoder_params());
    clip_grad_norm(gen, c.clip_norm);
    s.rl_opt.step();

    rec.step = ++s.rl_step;
    rec.mean_rg = rg_sum / n_tokens;
    rec.mean_q = q_sum / n_tokens;
    if (mle_tokens > 0.0) rec.mle_loss = mle_sum / mle_tokens;
    if (c.eval_every > 0 && rec.step % static_cast<std::int64_t>(c.eval_every) == 0) {
      rec.bleu2 = greedy_bleu(m.policy(), pairs, c.eval_max_n);
    }
    log.records.push_back(rec);
  }
  return log;
}

}  // namespace gsg
