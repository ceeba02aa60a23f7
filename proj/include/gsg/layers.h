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

#ifndef GSG_LAYERS_H_
#define GSG_LAYERS_H_

#include <span>
#include <string>
#include <vector>

#include "gsg/numerics.h"
#include "gsg/rng.h"

namespace gsg {

// Uniform(-scale, scale) initialization.
Tensor uniform_tensor(Shape shape, double scale, Rng& rng);

// y = x W + b.
struct Affine {
  Parameter weight;  // [in, out]
  Parameter bias;    // [out]

  Affine() = default;
  Affine(const std::string& name, std::size_t in, std::size_t out, Rng& rng);

  std::size_t in_dim() const { return weight.value.dim(0); }
  std::size_t out_dim() const { return weight.value.dim(1); }
  Var operator()(Tape& tape, Var x) const;
  void collect(ParameterList& out) { out.push_back(&weight); out.push_back(&bias); }
};

struct LstmState {
  Var h;
  Var c;
};

// Single LSTM cell. Gate blocks in the fused weight are ordered
// input, forget, output, candidate.
struct LstmCell {
  Parameter weight;  // [input + hidden, 4 * hidden]
  Parameter bias;    // [4 * hidden]
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;

  LstmCell() = default;
  LstmCell(const std::string& name, std::size_t input, std::size_t hidden,
           Rng& rng);

  LstmState step(Tape& tape, Var x, const LstmState& prev) const;
  LstmState zero_state(Tape& tape) const;
  void collect(ParameterList& out) { out.push_back(&weight); out.push_back(&bias); }
};

// Sentence CNN: token embedding, one convolution per window width with
// max-over-time pooling and ReLU, outputs concatenated in window order.
struct ConvBank {
  Parameter embedding;  // [vocab, d_emb]
  std::vector<Parameter> filters;  // [width * d_emb, k] per window
  std::vector<Parameter> biases;   // [k] per window
  std::vector<std::size_t> windows;

  ConvBank() = default;
  ConvBank(const std::string& name, std::size_t vocab, std::size_t d_emb,
           std::size_t k, std::vector<std::size_t> widths, Rng& rng);

  std::size_t vocab_size() const { return embedding.value.dim(0); }
  std::size_t embed_dim() const { return embedding.value.dim(1); }
  std::size_t filters_per_window() const { return biases.front().size(); }
  std::size_t output_dim() const { return windows.size() * filters_per_window(); }
  std::size_t max_window() const;

  // ids.size() must be at least max_window().
  Var features(Tape& tape, std::span<const int> ids) const;
  void collect(ParameterList& out);
};

}  // namespace gsg

#endif  // GSG_LAYERS_H_
