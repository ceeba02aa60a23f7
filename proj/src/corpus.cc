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

#include "gsg/corpus.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>

#include "gsg/tensor.h"

namespace gsg {
namespace {

const char* const kSpecialTokens[kNumSpecials] = {"<pad>", "<bos>", "<eos>",
                                                   "<unk>"};

}  // namespace

Vocab::Vocab() {
  for (const char* s : kSpecialTokens) add(s);
}

void Vocab::add(const std::string& token) {
  if (index_.contains(token)) {
    throw ConfigError("duplicate vocabulary token '" + token + "'");
  }
  index_.emplace(token, static_cast<int>(tokens_.size()));
  tokens_.push_back(token);
}

Vocab Vocab::build(std::span<const std::string> lines, std::size_t min_count) {
  if (lines.empty()) throw ConfigError("cannot build a vocabulary from no lines");
  std::map<std::string, std::size_t> counts;
  for (const std::string& line : lines) {
    for (std::string& tok : split_tokens(line)) ++counts[std::move(tok)];
  }
  std::vector<std::pair<std::string, std::size_t>> ordered;
  for (auto& [tok, n] : counts) {
    bool special = false;
    for (const char* s : kSpecialTokens) special = special || tok == s;
    if (!special && n >= min_count) ordered.emplace_back(tok, n);
  }
  // std::map iteration is lexicographic, so a stable sort on count keeps
  // lexicographic order among ties.
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ordered.empty()) {
    throw ConfigError("vocabulary would contain only special tokens");
  }
  Vocab v;
  for (auto& [tok, n] : ordered) v.add(tok);
  return v;
}

Vocab Vocab::from_tokens(std::span<const std::string> tokens) {
  Vocab v;
  for (const std::string& t : tokens) v.add(t);
  return v;
}

Vocab Vocab::load(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  if (lines.size() < kNumSpecials) throw FormatError("vocab file too short");
  for (int i = 0; i < kNumSpecials; ++i) {
    if (lines[i] != kSpecialTokens[i]) {
      throw FormatError("vocab line " + std::to_string(i + 1) + " must be " +
                        kSpecialTokens[i]);
    }
  }
  Vocab v;
  for (std::size_t i = kNumSpecials; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    v.add(lines[i]);
  }
  return v;
}

Vocab Vocab::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open vocab file: " + path);
  return load(in);
}

void Vocab::save(std::ostream& out) const {
  for (const std::string& t : tokens_) out << t << '\n';
}

int Vocab::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw DimensionError("token id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

Sentence encode(std::string_view text, const Vocab& vocab,
                std::size_t max_len) {
  Sentence s;
  for (const std::string& tok : split_tokens(text)) s.push_back(vocab.id(tok));
  if (max_len > 0 && s.size() >= max_len) {
    s.resize(max_len);
  } else {
    s.push_back(kEos);
  }
  return s;
}

std::string decode(std::span<const int> ids, const Vocab& vocab) {
  std::string out;
  for (int id : ids) {
    if (id == kEos) break;
    if (id == kPad || id == kBos) continue;
    if (!out.empty()) out += ' ';
    out += vocab.token(id);
  }
  return out;
}

std::vector<int> strip_eos(std::span<const int> ids) {
  std::vector<int> out;
  for (int id : ids) {
    if (id == kEos || id == kPad) break;
    out.push_back(id);
  }
  return out;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (split_tokens(line).empty()) continue;
    lines.push_back(line);
  }
  return lines;
}

Corpus make_corpus(std::span<const std::string> lines, const Vocab& vocab,
                   std::size_t max_len, Split split) {
  if (lines.empty()) throw ConfigError("corpus is empty");
  Corpus c;
  c.split = split;
  c.sentences.reserve(lines.size());
  for (const std::string& line : lines) {
    c.sentences.push_back(encode(line, vocab, max_len));
  }
  return c;
}

Corpus load_corpus(const std::string& path, const Vocab& vocab,
                   std::size_t max_len, Split split) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw ConfigError("corpus file is empty: " + path);
  return make_corpus(lines, vocab, max_len, split);
}

std::vector<std::pair<std::string, std::string>> read_pairs(
    const std::string& path) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t n = 0;
  for (const std::string& line : read_lines(path)) {
    ++n;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ConfigError(path + ": line " + std::to_string(n) +
                        " has no tab separating source and target");
    }
    out.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  if (out.empty()) throw ConfigError("paired corpus file is empty: " + path);
  return out;
}

PairedCorpus make_paired_corpus(
    std::span<const std::pair<std::string, std::string>> pairs,
    const Vocab& vocab, std::size_t max_len) {
  if (pairs.empty()) throw ConfigError("paired corpus is empty");
  PairedCorpus c;
  for (const auto& [src, tgt] : pairs) {
    c.sources.push_back(encode(src, vocab, max_len));
    c.targets.push_back(encode(tgt, vocab, max_len));
  }
  return c;
}

std::vector<Batch> make_batches(const Corpus& corpus, std::size_t batch_size,
                                std::size_t width, Rng* rng) {
  if (batch_size == 0) throw ConfigError("batch size must be at least 1");
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (rng) rng->shuffle(order);
  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    Batch b;
    b.rows = std::min(batch_size, order.size() - start);
    b.width = width;
    b.ids.assign(b.rows * width, kPad);
    for (std::size_t r = 0; r < b.rows; ++r) {
      const Sentence& s = corpus.sentences[order[start + r]];
      if (s.size() > width) {
        throw ConfigError("sentence of length " + std::to_string(s.size()) +
                          " exceeds batch width " + std::to_string(width));
      }
      std::copy(s.begin(), s.end(), b.ids.begin() + r * width);
      b.lengths.push_back(s.size());
      b.indices.push_back(order[start + r]);
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

}  // namespace gsg
