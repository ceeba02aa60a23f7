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

// Vocabulary, id-encoded corpora and padded batches.

#ifndef GSG_CORPUS_H_
#define GSG_CORPUS_H_

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gsg/rng.h"

namespace gsg {

inline constexpr int kPad = 0;
inline constexpr int kBos = 1;
inline constexpr int kEos = 2;
inline constexpr int kUnk = 3;
inline constexpr int kNumSpecials = 4;

class Vocab {
 public:
  // Specials only.
  Vocab();

  // Tokens ordered by frequency (desc) then lexicographically; tokens seen
  // fewer than min_count times are left out and encode to UNK.
  static Vocab build(std::span<const std::string> lines,
                     std::size_t min_count = 1);
  // Non-special tokens in id order (first gets id 4).
  static Vocab from_tokens(std::span<const std::string> tokens);

  // Vocab file: one token per line, the first four being the specials.
  static Vocab load(std::istream& in);
  static Vocab load_file(const std::string& path);
  void save(std::ostream& out) const;

  int id(std::string_view token) const;
  const std::string& token(int id) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  friend bool operator==(const Vocab& a, const Vocab& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  void add(const std::string& token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// Token ids; ends with EOS unless truncated at the maximum length.
using Sentence = std::vector<int>;

std::vector<std::string> split_tokens(std::string_view text);
// max_len 0 means unbounded. Sentences of max_len or more tokens are cut to
// max_len ids without EOS.
Sentence encode(std::string_view text, const Vocab& vocab,
                std::size_t max_len = 0);
// Stops at the first EOS; PAD and BOS are skipped.
std::string decode(std::span<const int> ids, const Vocab& vocab);
// Ids up to (excluding) the first EOS or PAD.
std::vector<int> strip_eos(std::span<const int> ids);

enum class Split { kTrain, kValid, kTest };

struct Corpus {
  std::vector<Sentence> sentences;
  Split split = Split::kTrain;

  std::size_t size() const { return sentences.size(); }
};

// Source/target pairs for conditional generation.
struct PairedCorpus {
  std::vector<Sentence> sources;
  std::vector<Sentence> targets;

  std::size_t size() const { return targets.size(); }
};

// Reads non-empty lines; ConfigError naming the path if it cannot be opened.
std::vector<std::string> read_lines(const std::string& path);
Corpus make_corpus(std::span<const std::string> lines, const Vocab& vocab,
                   std::size_t max_len, Split split = Split::kTrain);
Corpus load_corpus(const std::string& path, const Vocab& vocab,
                   std::size_t max_len, Split split = Split::kTrain);

// Lines of the form "source<TAB>target".
std::vector<std::pair<std::string, std::string>> read_pairs(
    const std::string& path);
PairedCorpus make_paired_corpus(
    std::span<const std::pair<std::string, std::string>> pairs,
    const Vocab& vocab, std::size_t max_len);

// Rows right-padded with PAD to a common width.
struct Batch {
  std::size_t rows = 0;
  std::size_t width = 0;
  std::vector<int> ids;              // rows * width
  std::vector<std::size_t> lengths;  // active length per row
  std::vector<std::size_t> indices;  // corpus index per row

  std::span<const int> row(std::size_t r) const {
    return std::span<const int>(ids).subspan(r * width, lengths[r]);
  }
};

// Partitions the corpus into batches of batch_size (the last may be
// smaller). With an rng the order is shuffled by it; without, corpus order.
std::vector<Batch> make_batches(const Corpus& corpus, std::size_t batch_size,
                                std::size_t width, Rng* rng);

}  // namespace gsg

#endif  // GSG_CORPUS_H_
