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

// All networks of one run, plus the optimizer and RNG state that training
// carries between steps.

#ifndef GSG_MODEL_H_
#define GSG_MODEL_H_

#include <cstdint>
#include <memory>
#include <string>

#include "gsg/config.h"
#include "gsg/corpus.h"
#include "gsg/discriminator.h"
#include "gsg/encoder.h"
#include "gsg/generator.h"
#include "gsg/guider.h"

namespace gsg {

struct Model {
  Model(const Vocab& vocab, const TrainConfig& config);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  Policy policy() const;

  ParameterList encoder_params();
  ParameterList generator_params();
  ParameterList guider_params();
  ParameterList discriminator_params();
  // Every parameter, in a fixed order. Names are unique.
  ParameterList all_params();

  Vocab vocab;
  ModelConfig config;
  std::size_t lookahead;
  CnnEncoder encoder;
  GuiderNet guider;
  GeneratorNet generator;
  Discriminator discriminator;
};

// Optimizers hold pointers into the model, so a session never moves.
struct Session {
  Session(const Vocab& vocab, const TrainConfig& config);
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  TrainConfig config;
  Model model;
  Adam encoder_opt;
  Adam generator_opt;
  Adam guider_opt;
  Adam disc_opt;
  // Separate state for policy-gradient fine-tuning.
  Adam rl_opt;
  Rng rng;
  std::int64_t pretrain_epochs_done = 0;
  std::int64_t rl_step = 0;
};

std::unique_ptr<Session> make_session(const Vocab& vocab,
                                      const TrainConfig& config);

// Binary checkpoint: "GSG1", u32 version, named tensors (u32 name length,
// name, u32 rank, u64 dims, little-endian f64 data), then named text blobs
// (config, rng, vocab, meta).
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const Session& session, const std::string& path);
std::unique_ptr<Session> load_checkpoint(const std::string& path);

}  // namespace gsg

#endif  // GSG_MODEL_H_
