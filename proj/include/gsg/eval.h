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

// BLEU, self-BLEU and perplexity.

#ifndef GSG_EVAL_H_
#define GSG_EVAL_H_

#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "gsg/generator.h"

namespace gsg {

using Tokens = std::vector<int>;

struct BleuOptions {
  std::size_t max_n = 4;
  // Zero match counts become 1 / (candidate n-grams + 1).
  bool smoothing = false;
};

struct BleuReport {
  // scores[n - 1] is BLEU-n for n = 1 .. max_n.
  std::vector<double> scores;
  std::vector<double> precisions;
  double brevity_penalty = 0.0;
  std::size_t hypotheses = 0;
  std::size_t references = 0;
  bool smoothing = false;

  double bleu(std::size_t n) const { return scores.at(n - 1); }
  // Aligned "BLEU-n  value" rows.
  void write_table(std::ostream& out) const;
  // "n,bleu" rows.
  void write_csv(std::ostream& out) const;
};

// Corpus BLEU: clipped n-gram counts and lengths summed over all
// hypotheses, geometric mean of precisions 1..n, brevity penalty against
// the closest reference length (shorter wins ties).
BleuReport bleu(std::span<const Tokens> hypotheses,
                std::span<const std::vector<Tokens>> references,
                const BleuOptions& options);
// Every hypothesis is scored against the same reference set.
BleuReport bleu_shared(std::span<const Tokens> hypotheses,
                       std::span<const Tokens> references,
                       const BleuOptions& options);
// BLEU-max_n of one hypothesis.
double sentence_bleu(const Tokens& hypothesis,
                     std::span<const Tokens> references,
                     const BleuOptions& options);

// Mean over hypotheses of the BLEU of each against all the others.
BleuReport self_bleu(std::span<const Tokens> hypotheses,
                     const BleuOptions& options);

// Maps whitespace tokens to dense ids so text files can be scored.
class TokenInterner {
 public:
  Tokens operator()(const std::string& line);

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> ids_;
};

enum class InitMode { kNoise, kEncode };

// exp of the mean per-token NLL over the corpus. kNoise starts every
// sentence from noise drawn from rng; kEncode from its own encoding.
double perplexity(const Policy& policy, std::span<const std::vector<int>> corpus,
                  InitMode mode, Rng& rng);

}  // namespace gsg

#endif  // GSG_EVAL_H_
