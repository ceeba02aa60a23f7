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

// Probabilistic context-free grammars used as synthetic corpora.
//
// File format, one production per line:
//
//   S  -> NP VP @ 1.0
//   NP -> the N @ 0.6     # trailing comments are allowed
//
// Every symbol that appears on a left-hand side is a nonterminal; all other
// symbols are terminals. The first left-hand side is the start symbol.
// Production probabilities for each nonterminal must sum to one.

#ifndef GSG_GRAMMAR_H_
#define GSG_GRAMMAR_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gsg/rng.h"

namespace gsg {

struct Production {
  std::string lhs;
  std::vector<std::string> rhs;
  double prob = 0.0;
};

class Grammar {
 public:
  static Grammar parse(std::istream& in, std::uint64_t seed = 0);
  static Grammar parse_string(const std::string& text, std::uint64_t seed = 0);
  static Grammar load_file(const std::string& path, std::uint64_t seed = 0);

  const std::string& start() const { return start_; }
  const std::vector<Production>& productions() const { return productions_; }
  bool is_nonterminal(const std::string& symbol) const {
    return by_lhs_.contains(symbol);
  }
  std::vector<std::string> terminals() const;
  std::uint64_t seed() const { return seed_; }
  void set_seed(std::uint64_t seed) { seed_ = seed; }

  // One top-down derivation. Returns nullopt once the yield would exceed
  // max_len tokens. When rule_counts is given, counts[i] is incremented for
  // every use of productions()[i].
  std::optional<std::vector<std::string>> derive(
      Rng& rng, std::size_t max_len,
      std::vector<std::size_t>* rule_counts = nullptr) const;

  // True iff the start symbol derives exactly this token sequence.
  bool recognizes(const std::vector<std::string>& tokens) const;

 private:
  bool expand(const std::string& symbol, Rng& rng, std::size_t max_len,
              std::vector<std::string>& out,
              std::vector<std::size_t>* counts, int depth) const;

  std::string start_;
  std::vector<Production> productions_;
  std::map<std::string, std::vector<std::size_t>> by_lhs_;
  std::uint64_t seed_ = 0;
};

// n sentences, space-joined, deterministic in grammar.seed(). Derivations
// longer than max_len tokens are rejected and resampled; ConfigError after
// max_retries consecutive rejections.
std::vector<std::string> sample_grammar(const Grammar& grammar, std::size_t n,
                                        std::size_t max_len,
                                        std::size_t max_retries = 1000);

}  // namespace gsg

#endif  // GSG_GRAMMAR_H_
