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

#include "gsg/generator.h"

#include <cmath>

namespace gsg {

GeneratorNet::GeneratorNet(std::size_t vocab, std::size_t d_emb,
                           std::size_t hidden, std::size_t feature_dim,
                           Rng& rng)
    : embedding("generator.embedding",
                uniform_tensor({vocab, d_emb}, 0.25, rng)),
      bridge("generator.bridge", feature_dim, hidden, rng),
      cell("generator.cell", d_emb, hidden, rng),
      output("generator.output", hidden, vocab, rng),
      fusion("generator.fusion", feature_dim, vocab, rng) {
  // Start near w = 1 so the fused logits begin as the plain decoder logits.
  for (double& v : fusion.weight.value.data) v *= 0.1;
  fusion.bias.value.fill(1.0);
}

LstmState GeneratorNet::initial_state(Tape& tape, Var z) const {
  return {tape.tanh(bridge(tape, z)),
          tape.constant(Tensor({hidden_dim()}, 0.0))};
}

Var GeneratorNet::plan_weights(Tape& tape, Var prediction) const {
  return fusion(tape, prediction);
}

Var GeneratorNet::fused_logits(Tape& tape, Var h, Var weights) const {
  return tape.mul(output(tape, h), weights);
}

LstmState GeneratorNet::advance(Tape& tape, const LstmState& state,
                                int token) const {
  return cell.step(tape, tape.row(tape.param(embedding), token), state);
}

void GeneratorNet::collect(ParameterList& out) {
  out.push_back(&embedding);
  bridge.collect(out);
  cell.collect(out);
  output.collect(out);
  fusion.collect(out);
}

DecodeState initial_decode_state(const Policy& policy, const Tensor& z) {
  Tape tape(false);
  Var zv = tape.constant(z);
  LstmState g = policy.generator.initial_state(tape, zv);
  LstmState s = policy.guider.initial_state(tape, zv);
  return {tape.value(g.h), tape.value(g.c), tape.value(s.h), tape.value(s.c),
          {}};
}

StepDistribution step_distribution(const Policy& policy, DecodeState& state,
                                   const Tensor& feature) {
  Tape tape(false);
  GuiderNet::Step st = policy.guider.step(
      tape, {tape.constant(state.guide_h), tape.constant(state.guide_c)},
      tape.constant(feature));
  state.guide_h = tape.value(st.state.h);
  state.guide_c = tape.value(st.state.c);
  Var w = policy.generator.plan_weights(tape, st.prediction);
  Var fused =
      policy.generator.fused_logits(tape, tape.constant(state.gen_h), w);
  StepDistribution out;
  out.log_probs = tape.value(tape.log_softmax(fused));
  out.probs = tape.value(tape.softmax(fused));
  out.prediction = tape.value(st.prediction);
  return out;
}

void advance(const Policy& policy, DecodeState& state, int token) {
  Tape tape(false);
  LstmState next = policy.generator.advance(
      tape, {tape.constant(state.gen_h), tape.constant(state.gen_c)}, token);
  state.gen_h = tape.value(next.h);
  state.gen_c = tape.value(next.c);
  state.prefix.push_back(token);
}

std::size_t argmax_lowest(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::size_t draw_categorical(std::span<const double> probs, Rng& rng) {
  double u = rng.uniform();
  std::size_t last = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last = i;
    u -= probs[i];
    if (u < 0.0) return i;
  }
  return last;
}

SampleOutput sample_sequence(const Policy& policy, const Tensor& z, Rng& rng,
                             double temperature) {
  if (policy.max_len == 0) throw ConfigError("max length must be >= 1");
  if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
  SampleOutput out;
  out.init = z;
  DecodeState state = initial_decode_state(policy, z);
  PrefixEncoder prefix(policy.encoder);
  out.features.push_back(prefix.current());
  std::vector<double> scaled;
  for (std::size_t t = 0; t < policy.max_len; ++t) {
    StepDistribution d = step_distribution(policy, state, prefix.current());
    std::size_t token;
    if (temperature == 0.0) {
      token = argmax_lowest(d.log_probs.span());
    } else if (temperature == 1.0) {
      token = draw_categorical(d.probs.span(), rng);
    } else {
      // Tempered logits: log p / T differs from fused / T by a constant.
      scaled.assign(d.log_probs.data.begin(), d.log_probs.data.end());
      for (double& v : scaled) v /= temperature;
      std::vector<double> p(scaled.size());
      kernels::softmax(scaled, p);
      token = draw_categorical(p, rng);
    }
    const int id = static_cast<int>(token);
    out.ids.push_back(id);
    out.log_probs.push_back(d.log_probs[token]);
    out.predictions.push_back(std::move(d.prediction));
    out.features.push_back(prefix.push(id));
    if (id == kEos) {
      out.terminated = true;
      break;
    }
    advance(policy, state, id);
  }
  return out;
}

SampleOutput greedy_decode(const Policy& policy, const Tensor& z) {
  Rng unused(0);
  return sample_sequence(policy, z, unused, 0.0);
}

std::vector<Var> token_log_probs(Tape& tape, const Policy& policy, Var z,
                                 std::span<const int> tokens) {
  const std::vector<Tensor> features =
      policy.encoder.prefix_features(tokens.first(tokens.empty() ? 0 : tokens.size() - 1));
  const std::vector<Tensor> preds =
      policy.guider.predictions(tape.value(z), features);
  LstmState s = policy.generator.initial_state(tape, z);
  std::vector<Var> out;
  out.reserve(tokens.size());
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    Var w = policy.generator.plan_weights(tape, tape.constant(preds[t]));
    Var lp = tape.log_softmax(policy.generator.fused_logits(tape, s.h, w));
    out.push_back(tape.pick(lp, static_cast<std::size_t>(tokens[t])));
    if (t + 1 < tokens.size()) s = policy.generator.advance(tape, s, tokens[t]);
  }
  return out;
}

Var mle_loss(Tape& tape, const Policy& policy, std::span<const Var> inits,
             const Batch& batch) {
  if (inits.size() != batch.rows) {
    throw DimensionError("mle_loss: one initial input per row required");
  }
  std::vector<Var> terms;
  for (std::size_t r = 0; r < batch.rows; ++r) {
    for (Var lp : token_log_probs(tape, policy, inits[r], batch.row(r))) {
      terms.push_back(lp);
    }
  }
  if (terms.empty()) throw ConfigError("mle_loss: batch has no tokens");
  return tape.scale(tape.add_n(terms), -1.0 / static_cast<double>(terms.size()));
}

double sequence_nll(const Policy& policy, const Tensor& z,
                    std::span<const int> tokens) {
  Tape tape(false);
  double nll = 0.0;
  for (Var lp : token_log_probs(tape, policy, tape.constant(z), tokens)) {
    nll -= tape.scalar(lp);
  }
  return nll;
}

}  // namespace gsg
