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

// LSTM policy whose output logits are modulated elementwise by a weight
// vector computed from the guider's prediction.

#ifndef GSG_GENERATOR_H_
#define GSG_GENERATOR_H_

#include <span>
#include <vector>

#include "gsg/corpus.h"
#include "gsg/encoder.h"
#include "gsg/guider.h"
#include "gsg/layers.h"

namespace gsg {

class GeneratorNet {
 public:
  GeneratorNet() = default;
  GeneratorNet(std::size_t vocab, std::size_t d_emb, std::size_t hidden,
               std::size_t feature_dim, Rng& rng);

  std::size_t vocab_size() const { return output.out_dim(); }
  std::size_t hidden_dim() const { return cell.hidden_dim; }

  // h = tanh(bridge(z)), c = 0.
  LstmState initial_state(Tape& tape, Var z) const;
  // w = varphi(prediction).
  Var plan_weights(Tape& tape, Var prediction) const;
  // g(h) * w, elementwise.
  Var fused_logits(Tape& tape, Var h, Var weights) const;
  LstmState advance(Tape& tape, const LstmState& state, int token) const;

  void collect(ParameterList& out);

  Parameter embedding;  // [vocab, d_emb]
  Affine bridge;        // feature -> hidden
  LstmCell cell;
  Affine output;        // hidden -> vocab
  Affine fusion;        // feature -> vocab
};

// The networks that together define the sampling policy.
struct Policy {
  const CnnEncoder& encoder;
  const GuiderNet& guider;
  const GeneratorNet& generator;
  std::size_t max_len;
};

// Recurrent state between decoding steps, stored as plain values.
struct DecodeState {
  Tensor gen_h, gen_c;
  Tensor guide_h, guide_c;
  std::vector<int> prefix;
};

DecodeState initial_decode_state(const Policy& policy, const Tensor& z);

struct StepDistribution {
  Tensor log_probs;   // log softmax of the fused logits
  Tensor probs;
  Tensor prediction;  // guider output that produced the weights
};

// Consumes the feature of the current prefix: advances the guider, forms
// the weights, and returns the next-token distribution from the current
// generator state.
StepDistribution step_distribution(const Policy& policy, DecodeState& state,
                                   const Tensor& feature);
// Feeds the chosen token to the generator.
void advance(const Policy& policy, DecodeState& state, int token);

struct SampleOutput {
  std::vector<int> ids;
  std::vector<double> log_probs;    // ln p(ids[t]) at the step it was drawn
  std::vector<Tensor> features;     // f_0 .. f_n
  std::vector<Tensor> predictions;  // p_0 .. p_{n-1}
  bool terminated = false;          // ended with EOS
  Tensor init;
};

// temperature 0 is greedy (lowest id wins ties); otherwise tokens are drawn
// from softmax(fused / temperature). Recorded log-probs always come from the
// untempered distribution.
SampleOutput sample_sequence(const Policy& policy, const Tensor& z, Rng& rng,
                             double temperature = 1.0);
SampleOutput greedy_decode(const Policy& policy, const Tensor& z);

std::size_t argmax_lowest(std::span<const double> values);
// Inverse-CDF draw; falls back to the last positive entry on round-off.
std::size_t draw_categorical(std::span<const double> probs, Rng& rng);

// Teacher-forced log-probabilities of tokens given the initial input z.
// The guider runs as a constant: no gradient reaches it.
std::vector<Var> token_log_probs(Tape& tape, const Policy& policy, Var z,
                                 std::span<const int> tokens);

// Mean per-token NLL over the active length of every batch row; the PAD
// tail of a row is never read. One initial input per row.
Var mle_loss(Tape& tape, const Policy& policy, std::span<const Var> inits,
             const Batch& batch);

// Sum of -log p over tokens, no gradient.
double sequence_nll(const Policy& policy, const Tensor& z,
                    std::span<const int> tokens);

}  // namespace gsg

#endif  // GSG_GENERATOR_H_
