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

#include "gsg/layers.h"

#include <algorithm>
#include <cmath>

namespace gsg {

Tensor uniform_tensor(Shape shape, double scale, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.data) v = (2.0 * rng.uniform() - 1.0) * scale;
  return t;
}

Affine::Affine(const std::string& name, std::size_t in, std::size_t out,
               Rng& rng)
    : weight(name + ".weight",
             uniform_tensor({in, out}, 1.0 / std::sqrt(double(in)), rng)),
      bias(name + ".bias", Tensor({out}, 0.0)) {}

Var Affine::operator()(Tape& tape, Var x) const {
  return tape.affine(x, tape.param(weight), tape.param(bias));
}

LstmCell::LstmCell(const std::string& name, std::size_t input,
                   std::size_t hidden, Rng& rng)
    : weight(name + ".weight",
             uniform_tensor({input + hidden, 4 * hidden},
                            1.0 / std::sqrt(double(input + hidden)), rng)),
      bias(name + ".bias", Tensor({4 * hidden}, 0.0)),
      input_dim(input),
      hidden_dim(hidden) {
  // Forget gate starts open.
  for (std::size_t i = hidden; i < 2 * hidden; ++i) bias.value[i] = 1.0;
}

LstmState LstmCell::step(Tape& tape, Var x, const LstmState& prev) const {
  if (tape.value(x).size() != input_dim ||
      tape.value(prev.h).size() != hidden_dim ||
      tape.value(prev.c).size() != hidden_dim) {
    throw DimensionError(
        "lstm_cell: expected input " + std::to_string(input_dim) +
        " and state " + std::to_string(hidden_dim) + ", got " +
        shape_string(tape.value(x).shape) + " / " +
        shape_string(tape.value(prev.h).shape) + " / " +
        shape_string(tape.value(prev.c).shape));
  }
  const std::size_t n = hidden_dim;
  Var z = tape.affine(tape.concat(x, prev.h), tape.param(weight),
                      tape.param(bias));
  Var in_gate = tape.sigmoid(tape.slice(z, 0, n));
  Var forget = tape.sigmoid(tape.slice(z, n, n));
  Var out_gate = tape.sigmoid(tape.slice(z, 2 * n, n));
  Var cand = tape.tanh(tape.slice(z, 3 * n, n));
  Var c = tape.add(tape.mul(forget, prev.c), tape.mul(in_gate, cand));
  Var h = tape.mul(out_gate, tape.tanh(c));
  return {h, c};
}

LstmState LstmCell::zero_state(Tape& tape) const {
  return {tape.constant(Tensor({hidden_dim}, 0.0)),
          tape.constant(Tensor({hidden_dim}, 0.0))};
}

ConvBank::ConvBank(const std::string& name, std::size_t vocab,
                   std::size_t d_emb, std::size_t k,
                   std::vector<std::size_t> widths, Rng& rng)
    : embedding(name + ".embedding",
                uniform_tensor({vocab, d_emb}, 0.25, rng)),
      windows(std::move(widths)) {
  if (windows.empty()) throw ConfigError("ConvBank needs at least one window");
  for (std::size_t w : windows) {
    const std::string tag = name + ".conv" + std::to_string(w);
    filters.emplace_back(
        tag + ".weight",
        uniform_tensor({w * d_emb, k}, 1.0 / std::sqrt(double(w * d_emb)),
                       rng));
    biases.emplace_back(tag + ".bias", Tensor({k}, 0.0));
  }
}

std::size_t ConvBank::max_window() const {
  return *std::max_element(windows.begin(), windows.end());
}

Var ConvBank::features(Tape& tape, std::span<const int> ids) const {
  Var x = tape.rows(tape.param(embedding), ids);
  Var out;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    Var pooled = tape.relu(tape.conv1d_maxpool(x, tape.param(filters[i]),
                                               tape.param(biases[i])));
    out = out.valid() ? tape.concat(out, pooled) : pooled;
  }
  return out;
}

void ConvBank::collect(ParameterList& out) {
  out.push_back(&embedding);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    out.push_back(&filters[i]);
    out.push_back(&biases[i]);
  }
}

}  // namespace gsg
