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

// Guider: an LSTM over prefix features that predicts the feature c steps
// ahead, plus its cosine objective.

#ifndef GSG_GUIDER_H_
#define GSG_GUIDER_H_

#include <span>
#include <vector>

#include "gsg/encoder.h"
#include "gsg/layers.h"

namespace gsg {

class GuiderNet {
 public:
  struct Step {
    Var prediction;
    LstmState state;
  };

  GuiderNet() = default;
  // label_dim > 0 builds the label-conditioned variant whose input is
  // [f, label].
  GuiderNet(std::size_t feature_dim, std::size_t hidden, std::size_t label_dim,
            Rng& rng);

  std::size_t feature_dim() const { return head.out_dim(); }
  std::size_t hidden_dim() const { return cell.hidden_dim; }

  // h = tanh(bridge(z)), c = 0.
  LstmState initial_state(Tape& tape, Var z) const;
  Step step(Tape& tape, const LstmState& state, Var feature) const;
  Step step_labeled(Tape& tape, const LstmState& state, Var feature,
                    Var label) const;

  // p_0 .. p_{n-1}, one per feature, starting from initial_state(z).
  std::vector<Tensor> predictions(const Tensor& z,
                                  std::span<const Tensor> features) const;

  void collect(ParameterList& out);

  Affine bridge;
  LstmCell cell;
  Affine head;
  std::size_t label_dim = 0;
};

// cos(f_next, p) + cos(f_next - f_now, p - f_now), in [-2, 2].
double guider_objective(std::span<const double> f_next,
                        std::span<const double> f_now,
                        std::span<const double> prediction);
Var guider_objective(Tape& tape, Var f_next, Var f_now, Var prediction);

// Mean objective over positions j in [1, L - c] of one sentence, where
// features holds f_0 .. f_L and the prediction made after f_j targets
// f_{j+c}. Needs L > c.
Var sequence_guider_objective(Tape& tape, const GuiderNet& net,
                              const Tensor& z,
                              std::span<const Tensor> features,
                              std::size_t lookahead);

struct GuiderTrainOptions {
  std::size_t lookahead = 4;
  std::size_t batch_size = 32;
  std::size_t epochs = 1;
  // Chance of starting a sentence from noise instead of its own encoding.
  double noise_init_prob = 0.5;
  double clip_norm = 5.0;
};

struct GuiderLog {
  std::vector<double> mean_objective;  // one entry per optimizer step
};

// Gradient ascent on the sequence objective over all sentences longer than
// the look-ahead. The encoder is only read. With sources (one per
// sentence) every sentence starts from the encoding of its source instead.
GuiderLog train_guider(GuiderNet& net, std::span<const std::vector<int>> sentences,
                       const CnnEncoder& encoder, Adam& optimizer,
                       const GuiderTrainOptions& options, Rng& rng,
                       std::span<const std::vector<int>> sources = {});

// Mean sequence objective over sentences longer than the look-ahead,
// starting each from noise drawn from rng.
double mean_guider_objective(const GuiderNet& net,
                             std::span<const std::vector<int>> sentences,
                             const CnnEncoder& encoder, std::size_t lookahead,
                             Rng& rng);

}  // namespace gsg

#endif  // GSG_GUIDER_H_
