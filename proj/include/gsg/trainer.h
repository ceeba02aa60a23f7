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

// Training loops: MLE pretraining, adversarial fine-tuning with
// feature-matching rewards, and self-critical conditional fine-tuning.

#ifndef GSG_TRAINER_H_
#define GSG_TRAINER_H_

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "gsg/eval.h"
#include "gsg/model.h"

namespace gsg {

struct TrainRecord {
  std::int64_t step = 0;
  std::optional<double> mle_loss;
  std::optional<double> mean_rg;
  std::optional<double> mean_q;
  std::optional<double> d_loss;
  std::optional<double> bleu2;
  std::optional<double> self_bleu2;
};

struct TrainLog {
  std::vector<TrainRecord> records;

  void append(const TrainLog& other);
  // "step,mle_loss,mean_rg,mean_q,d_loss,bleu2,self_bleu2"; missing values
  // are empty fields.
  void write_csv(std::ostream& out) const;
  std::string csv() const;
};

// Raised when the mean |Q| of a batch exceeds the configured limit.
class TrainingDiverged : public NumericError {
 public:
  using NumericError::NumericError;
};

// Linear interpolation from start (step 0) to end (step total).
double mixed_loss_schedule(std::size_t step, std::size_t total, double start,
                           double end);

// Worker count for pure parallel sections: GSG_THREADS if set, otherwise
// the hardware concurrency.
std::size_t worker_threads();
// Runs fn(i) for i in [0, n) on up to worker_threads() threads. fn must
// only write to its own slot of any shared output.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// n samples from noise initial states; sample i uses an Rng seeded from
// the i-th draw of seeds.
std::vector<SampleOutput> sample_from_noise(const Policy& policy,
                                            std::size_t n, Rng& seeds,
                                            double temperature);

struct EvalScores {
  double bleu = 0.0;       // test BLEU-n against the references
  double self_bleu = 0.0;  // self-BLEU-n of the samples
};

// Scores n noise-initialized samples drawn with the given seed.
EvalScores evaluate_samples(const Policy& policy,
                            std::span<const Tokens> references, std::size_t n,
                            std::size_t max_n, std::uint64_t seed);

// Unconditional pretraining: per epoch one MLE pass over the generator and
// encoder and one guider pass, then discriminator pretraining on real vs
// generated sentences. epochs = 0 leaves every parameter unchanged.
TrainLog pretrain(Session& session, const Corpus& corpus, std::size_t epochs);
// Conditional pretraining: initial states are encodings of the sources.
TrainLog pretrain_conditional(Session& session, const PairedCorpus& pairs,
                              std::size_t epochs);

// One MLE pass; returns the mean per-token NLL.
double mle_epoch(Session& session, std::span<const Sentence> targets,
                 std::span<const Sentence> sources);

// Adversarial fine-tuning rounds: g-steps of policy gradient with Q from the
// feature-matching rewards and the discriminator score (plus the mixed MLE
// term), d-steps, and an optional guider refresh on real data.
TrainLog train_gmgan(Session& session, const Corpus& corpus,
                     std::size_t steps);

struct GmstSample {
  std::int64_t step = 0;
  std::size_t pair = 0;
  std::vector<int> sample;
  std::vector<int> greedy;
  double sample_reward = 0.0;
  double greedy_reward = 0.0;
  double advantage = 0.0;
};
using GmstObserver = std::function<void(const GmstSample&)>;

// Self-critical conditional fine-tuning with sentence BLEU against all
// targets that share the source as the final reward.
TrainLog train_gmst(Session& session, const PairedCorpus& pairs,
                    std::size_t steps, const GmstObserver& observer = {});

// Greedy decodes of the distinct sources, scored by corpus BLEU-max_n
// against all targets of each source.
double greedy_bleu(const Policy& policy, const PairedCorpus& pairs,
                   std::size_t max_n);

}  // namespace gsg

#endif  // GSG_TRAINER_H_
