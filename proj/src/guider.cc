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

#include "gsg/guider.h"

#include <algorithm>
#include <string>

#include "gsg/tensor.h"

namespace gsg {

GuiderNet::GuiderNet(std::size_t feature_dim, std::size_t hidden,
                     std::size_t label, Rng& rng)
    : bridge("guider.bridge", feature_dim, hidden, rng),
      cell("guider.cell", feature_dim + label, hidden, rng),
      head("guider.head", hidden, feature_dim, rng),
      label_dim(label) {}

LstmState GuiderNet::initial_state(Tape& tape, Var z) const {
  return {tape.tanh(bridge(tape, z)),
          tape.constant(Tensor({hidden_dim()}, 0.0))};
}

GuiderNet::Step GuiderNet::step(Tape& tape, const LstmState& state,
                                Var feature) const {
  if (label_dim > 0) {
    return step_labeled(tape, state, feature,
                        tape.constant(Tensor({label_dim}, 0.0)));
  }
  if (tape.value(feature).size() != feature_dim()) {
    throw DimensionError("guider step: feature has " +
                         std::to_string(tape.value(feature).size()) +
                         " entries, expected " + std::to_string(feature_dim()));
  }
  LstmState next = cell.step(tape, feature, state);
  return {head(tape, next.h), next};
}

GuiderNet::Step GuiderNet::step_labeled(Tape& tape, const LstmState& state,
                                        Var feature, Var label) const {
  if (tape.value(label).size() != label_dim) {
    throw DimensionError("guider step: label has " +
                         std::to_string(tape.value(label).size()) +
                         " entries, expected " + std::to_string(label_dim));
  }
  if (tape.value(feature).size() != feature_dim()) {
    throw DimensionError("guider step: feature dimension mismatch");
  }
  LstmState next = cell.step(tape, tape.concat(feature, label), state);
  return {head(tape, next.h), next};
}

std::vector<Tensor> GuiderNet::predictions(
    const Tensor& z, std::span<const Tensor> features) const {
  Tape tape(false);
  LstmState s = initial_state(tape, tape.constant(z));
  std::vector<Tensor> out;
  out.reserve(features.size());
  for (const Tensor& f : features) {
    Step st = step(tape, s, tape.constant(f));
    out.push_back(tape.value(st.prediction));
    s = st.state;
  }
  return out;
}

void GuiderNet::collect(ParameterList& out) {
  bridge.collect(out);
  cell.collect(out);
  head.collect(out);
}

double guider_objective(std::span<const double> f_next,
                        std::span<const double> f_now,
                        std::span<const double> prediction) {
  if (f_next.size() != f_now.size() || f_next.size() != prediction.size()) {
    throw DimensionError("guider_objective: length mismatch");
  }
  std::vector<double> dt(f_next.size()), dp(f_next.size());
  for (std::size_t i = 0; i < f_next.size(); ++i) {
    dt[i] = f_next[i] - f_now[i];
    dp[i] = prediction[i] - f_now[i];
  }
  return kernels::cosine(f_next, prediction) + kernels::cosine(dt, dp);
}

Var guider_objective(Tape& tape, Var f_next, Var f_now, Var prediction) {
  Var a = tape.cosine(f_next, prediction);
  Var b = tape.cosine(tape.sub(f_next, f_now), tape.sub(prediction, f_now));
  const Var both[2] = {a, b};
  return tape.add_n(both);
}

Var sequence_guider_objective(Tape& tape, const GuiderNet& net,
                              const Tensor& z,
                              std::span<const Tensor> features,
                              std::size_t lookahead) {
  if (lookahead == 0) throw ConfigError("look-ahead must be at least 1");
  if (features.size() < lookahead + 2) {
    throw ConfigError("sentence too short for look-ahead " +
                      std::to_string(lookahead));
  }
  const std::size_t len = features.size() - 1;
  LstmState s = net.initial_state(tape, tape.constant(z));
  std::vector<Var> terms;
  for (std::size_t j = 0; j + lookahead <= len; ++j) {
    Var f_now = tape.constant(features[j]);
    GuiderNet::Step st = net.step(tape, s, f_now);
    s = st.state;
    if (j == 0) continue;
    terms.push_back(guider_objective(
        tape, tape.constant(features[j + lookahead]), f_now, st.prediction));
  }
  return tape.scale(tape.add_n(terms), 1.0 / static_cast<double>(terms.size()));
}

namespace {

std::vector<std::size_t> usable(std::span<const std::vector<int>> sentences,
                                std::size_t lookahead) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (sentences[i].size() > lookahead) idx.push_back(i);
  }
  if (idx.empty()) {
    throw ConfigError("no sentence is longer than the look-ahead of " +
                      std::to_string(lookahead));
  }
  return idx;
}

}  // namespace

GuiderLog train_guider(GuiderNet& net,
                       std::span<const std::vector<int>> sentences,
                       const CnnEncoder& encoder, Adam& optimizer,
                       const GuiderTrainOptions& options, Rng& rng,
                       std::span<const std::vector<int>> sources) {
  if (options.batch_size == 0) throw ConfigError("batch size must be >= 1");
  if (!sources.empty() && sources.size() != sentences.size()) {
    throw ConfigError("train_guider: one source per sentence required");
  }
  std::vector<std::size_t> idx = usable(sentences, options.lookahead);
  ParameterList params;
  net.collect(params);
  zero_grads(params);
  GuiderLog log;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(idx);
    for (std::size_t start = 0; start < idx.size();
         start += options.batch_size) {
      const std::size_t n = std::min(options.batch_size, idx.size() - start);
      double total = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        const std::size_t i = idx[start + r];
        const std::vector<int>& s = sentences[i];
        Tensor z;
        if (!sources.empty()) {
          z = encoder.encode_prefix(sources[i]);
        } else if (rng.uniform() < options.noise_init_prob) {
          z = noise_state(encoder.feature_dim(), rng);
        } else {
          z = encoder.encode_prefix(s);
        }
        const std::vector<Tensor> f = encoder.prefix_features(s);
        Tape tape;
        Var obj = sequence_guider_objective(tape, net, z, f, options.lookahead);
        total += tape.scalar(obj);
        // Ascent: minimise the negated objective.
        tape.backward(obj, -1.0 / static_cast<double>(n));
      }
      clip_grad_norm(params, options.clip_norm);
      optimizer.step();
      log.mean_objective.push_back(total / static_cast<double>(n));
    }
  }
  return log;
}

double mean_guider_objective(const GuiderNet& net,
                             std::span<const std::vector<int>> sentences,
                             const CnnEncoder& encoder, std::size_t lookahead,
                             Rng& rng) {
  const std::vector<std::size_t> idx = usable(sentences, lookahead);
  double total = 0.0;
  for (std::size_t i : idx) {
    const Tensor z = noise_state(encoder.feature_dim(), rng);
    const std::vector<Tensor> f = encoder.prefix_features(sentences[i]);
    Tape tape(false);
    total += tape.scalar(
        sequence_guider_objective(tape, net, z, f, lookahead));
  }
  return total / static_cast<double>(idx.size());
}

}  // namespace gsg
