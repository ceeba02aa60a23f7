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

// Sentence CNN that maps a (partial) token sequence to a feature vector.

#ifndef GSG_ENCODER_H_
#define GSG_ENCODER_H_

#include <span>
#include <vector>

#include "gsg/layers.h"

namespace gsg {

class CnnEncoder {
 public:
  CnnEncoder() = default;
  CnnEncoder(std::size_t vocab, std::size_t d_emb, std::size_t k,
             std::vector<std::size_t> windows, Rng& rng);

  std::size_t feature_dim() const { return conv.output_dim(); }
  std::size_t vocab_size() const { return conv.vocab_size(); }

  // Empty prefix becomes [BOS]; anything shorter than the widest window is
  // right-padded with PAD. Ids outside the vocabulary throw DimensionError.
  std::vector<int> padded(std::span<const int> prefix) const;

  Var encode(Tape& tape, std::span<const int> prefix) const;
  Tensor encode_prefix(std::span<const int> prefix) const;

  // f_0 .. f_n where f_t encodes ids[0, t). Bitwise equal to calling
  // encode_prefix on every prefix.
  std::vector<Tensor> prefix_features(std::span<const int> ids) const;

  void collect(ParameterList& out) { conv.collect(out); }

  ConvBank conv;
};

// Features of a growing prefix, one token at a time. Keeps the running
// per-filter maxima so each push costs one new convolution position.
class PrefixEncoder {
 public:
  explicit PrefixEncoder(const CnnEncoder& encoder);

  // Feature of the prefix so far (f_0 before any push).
  const Tensor& current() const { return feature_; }
  const Tensor& push(int id);
  std::size_t length() const { return ids_.size(); }

 private:
  void refresh_from_scratch();
  void activation(std::size_t window, std::size_t position,
                  std::span<double> out) const;

  const CnnEncoder* encoder_;
  std::vector<int> ids_;
  std::vector<std::vector<double>> maxima_;  // pre-ReLU, per window
  Tensor feature_;
};

// Value-identical copy of a feature that carries no gradient.
inline Tensor detach_for_guider(const Tensor& f) { return f; }
inline Var detach_for_guider(Tape& tape, Var f) { return tape.detach(f); }

// Seeded N(0, 1) vector used as the initial state when no input sequence
// is available.
Tensor noise_state(std::size_t dim, Rng& rng);

}  // namespace gsg

#endif  // GSG_ENCODER_H_
