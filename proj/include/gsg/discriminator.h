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

// Sentence CNN classifier that scores complete sentences as real or
// generated.

#ifndef GSG_DISCRIMINATOR_H_
#define GSG_DISCRIMINATOR_H_

#include <span>
#include <vector>

#include "gsg/layers.h"

namespace gsg {

class Discriminator {
 public:
  Discriminator() = default;
  Discriminator(std::size_t vocab, std::size_t d_emb, std::size_t k,
                std::vector<std::size_t> windows, std::size_t max_len,
                Rng& rng);

  // Sentences are PAD-padded to max_len (and at least the widest window).
  Var logit(Tape& tape, std::span<const int> sentence) const;
  // sigmoid(logit), in (0, 1).
  double score(std::span<const int> sentence) const;

  void collect(ParameterList& out);

  ConvBank conv;
  Affine head;
  std::size_t max_len = 0;
};

// Mean binary cross-entropy with real = 1, fake = 0. Gradients accumulate
// into the discriminator parameters when the tape records them.
Var discriminator_loss(Tape& tape, const Discriminator& d,
                       std::span<const std::vector<int>> real,
                       std::span<const std::vector<int>> fake);

// One optimizer step on the loss above; returns the loss before the step.
double train_discriminator(Discriminator& d,
                           std::span<const std::vector<int>> real,
                           std::span<const std::vector<int>> fake,
                           Adam& optimizer, double clip_norm = 5.0);

}  // namespace gsg

#endif  // GSG_DISCRIMINATOR_H_
