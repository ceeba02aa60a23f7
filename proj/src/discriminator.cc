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

#include "gsg/discriminator.h"

#include <algorithm>
#include <string>

#include "gsg/corpus.h"

namespace gsg {

Discriminator::Discriminator(std::size_t vocab, std::size_t d_emb,
                             std::size_t k, std::vector<std::size_t> windows,
                             std::size_t len, Rng& rng)
    : conv("disc", vocab, d_emb, k, std::move(windows), rng),
      head("disc.head", conv.output_dim(), 1, rng),
      max_len(len) {}

Var Discriminator::logit(Tape& tape, std::span<const int> sentence) const {
  if (sentence.empty()) throw ConfigError("cannot score an empty sentence");
  std::vector<int> ids(sentence.begin(), sentence.end());
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= conv.vocab_size()) {
      throw DimensionError("token id " + std::to_string(id) +
                           " outside vocabulary");
    }
  }
  ids.resize(std::max({ids.size(), max_len, conv.max_window()}), kPad);
  return tape.pick(head(tape, conv.features(tape, ids)), 0);
}

double Discriminator::score(std::span<const int> sentence) const {
  Tape tape(false);
  return kernels::sigmoid(tape.scalar(logit(tape, sentence)));
}

void Discriminator::collect(ParameterList& out) {
  conv.collect(out);
  head.collect(out);
}

Var discriminator_loss(Tape& tape, const Discriminator& d,
                       std::span<const std::vector<int>> real,
                       std::span<const std::vector<int>> fake) {
  if (real.empty() || fake.empty()) {
    throw ConfigError("discriminator needs real and fake sentences");
  }
  std::vector<Var> terms;
  for (const auto& s : real) terms.push_back(tape.bce_with_logits(d.logit(tape, s), 1.0));
  for (const auto& s : fake) terms.push_back(tape.bce_with_logits(d.logit(tape, s), 0.0));
  return tape.scale(tape.add_n(terms), 1.0 / static_cast<double>(terms.size()));
}

double train_discriminator(Discriminator& d,
                           std::span<const std::vector<int>> real,
                           std::span<const std::vector<int>> fake,
                           Adam& optimizer, double clip_norm) {
  ParameterList params;
  d.collect(params);
  zero_grads(params);
  Tape tape;
  Var loss = discriminator_loss(tape, d, real, fake);
  tape.backward(loss);
  clip_grad_norm(params, clip_norm);
  optimizer.step();
  return tape.scalar(loss);
}

}  // namespace gsg
