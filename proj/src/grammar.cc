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

#include "gsg/grammar.h"

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "gsg/corpus.h"
#include "gsg/tensor.h"

namespace gsg {
namespace {

constexpr int kMaxDepth = 200;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Grammar Grammar::parse(std::istream& in, std::uint64_t seed) {
  Grammar g;
  g.seed_ = seed;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const std::string where = "grammar line " + std::to_string(lineno);
    const auto arrow = line.find("->");
    const auto at = line.rfind('@');
    if (arrow == std::string::npos || at == std::string::npos || at < arrow) {
      throw FormatError(where + ": expected 'LHS -> RHS... @ prob'");
    }
    Production p;
    p.lhs = trim(line.substr(0, arrow));
    if (p.lhs.empty() || split_tokens(p.lhs).size() != 1) {
      throw FormatError(where + ": left-hand side must be one symbol");
    }
    p.rhs = split_tokens(line.substr(arrow + 2, at - arrow - 2));
    if (p.rhs.empty()) throw FormatError(where + ": empty right-hand side");
    try {
      std::size_t used = 0;
      const std::string num = trim(line.substr(at + 1));
      p.prob = std::stod(num, &used);
      if (used != num.size()) throw std::invalid_argument(num);
    } catch (const std::exception&) {
      throw FormatError(where + ": bad probability");
    }
    if (!(p.prob > 0.0) || p.prob > 1.0) {
      throw FormatError(where + ": probability must be in (0, 1]");
    }
    if (g.start_.empty()) g.start_ = p.lhs;
    g.by_lhs_[p.lhs].push_back(g.productions_.size());
    g.productions_.push_back(std::move(p));
  }
  if (g.productions_.empty()) throw FormatError("grammar has no productions");
  for (const auto& [lhs, idx] : g.by_lhs_) {
    double total = 0.0;
    for (std::size_t i : idx) total += g.productions_[i].prob;
    if (std::abs(total - 1.0) > 1e-9) {
      throw FormatError("probabilities for " + lhs + " sum to " +
                        std::to_string(total));
    }
  }
  return g;
}

Grammar Grammar::parse_string(const std::string& text, std::uint64_t seed) {
  std::istringstream in(text);
  return parse(in, seed);
}

Grammar Grammar::load_file(const std::string& path, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open grammar file: " + path);
  return parse(in, seed);
}

std::vector<std::string> Grammar::terminals() const {
  std::set<std::string> out;
  for (const Production& p : productions_) {
    for (const std::string& s : p.rhs) {
      if (!is_nonterminal(s)) out.insert(s);
    }
  }
  return {out.begin(), out.end()};
}

bool Grammar::expand(const std::string& symbol, Rng& rng, std::size_t max_len,
                     std::vector<std::string>& out,
                     std::vector<std::size_t>* counts, int depth) const {
  auto it = by_lhs_.find(symbol);
  if (it == by_lhs_.end()) {
    out.push_back(symbol);
    return out.size() <= max_len;
  }
  if (depth > kMaxDepth) return false;
  const std::vector<std::size_t>& options = it->second;
  double u = rng.uniform();
  std::size_t chosen = options.back();
  for (std::size_t i : options) {
    u -= productions_[i].prob;
    if (u < 0.0) {
      chosen = i;
      break;
    }
  }
  if (counts) ++(*counts)[chosen];
  for (const std::string& s : productions_[chosen].rhs) {
    if (!expand(s, rng, max_len, out, counts, depth + 1)) return false;
  }
  return true;
}

std::optional<std::vector<std::string>> Grammar::derive(
    Rng& rng, std::size_t max_len, std::vector<std::size_t>* rule_counts) const {
  std::vector<std::string> out;
  std::vector<std::size_t> local;
  if (rule_counts) local.assign(productions_.size(), 0);
  if (!expand(start_, rng, max_len, out, rule_counts ? &local : nullptr, 0)) {
    return std::nullopt;
  }
  if (rule_counts) {
    rule_counts->resize(productions_.size(), 0);
    for (std::size_t i = 0; i < local.size(); ++i) (*rule_counts)[i] += local[i];
  }
  return out;
}

bool Grammar::recognizes(const std::vector<std::string>& tokens) const {
  const std::size_t n = tokens.size();
  if (n == 0) return false;
  // memo[(symbol, i, j)]: 0 unknown, 1 no (or in progress), 2 yes.
  std::map<std::tuple<std::string, std::size_t, std::size_t>, int> memo;

  std::function<bool(const std::string&, std::size_t, std::size_t)> derives;
  std::function<bool(const std::vector<std::string>&, std::size_t, std::size_t,
                     std::size_t)>
      sequence;

  sequence = [&](const std::vector<std::string>& rhs, std::size_t k,
                 std::size_t i, std::size_t j) -> bool {
    const std::size_t remaining = rhs.size() - k;
    if (remaining == 0) return i == j;
    if (j - i < remaining) return false;  // every symbol covers >= 1 token
    if (remaining == 1) return derives(rhs[k], i, j);
    for (std::size_t m = i + 1; m + (remaining - 1) <= j; ++m) {
      if (derives(rhs[k], i, m) && sequence(rhs, k + 1, m, j)) return true;
    }
    return false;
  };

  derives = [&](const std::string& sym, std::size_t i, std::size_t j) -> bool {
    auto it = by_lhs_.find(sym);
    if (it == by_lhs_.end()) return j == i + 1 && tokens[i] == sym;
    auto key = std::make_tuple(sym, i, j);
    if (auto m = memo.find(key); m != memo.end()) return m->second == 2;
    memo[key] = 1;
    for (std::size_t pi : it->second) {
      if (sequence(productions_[pi].rhs, 0, i, j)) {
        memo[key] = 2;
        return true;
      }
    }
    return false;
  };

  return derives(start_, 0, n);
}

std::vector<std::string> sample_grammar(const Grammar& grammar, std::size_t n,
                                        std::size_t max_len,
                                        std::size_t max_retries) {
  if (n == 0) throw ConfigError("sample_grammar needs n >= 1");
  Rng rng(grammar.seed());
  std::vector<std::string> out;
  out.reserve(n);
  while (out.size() < n) {
    std::optional<std::vector<std::string>> tokens;
    for (std::size_t attempt = 0; attempt < max_retries && !tokens; ++attempt) {
      tokens = grammar.derive(rng, max_len);
    }
    if (!tokens) {
      throw ConfigError("grammar derivations keep exceeding max length " +
                        std::to_string(max_len));
    }
    std::string line;
    for (const std::string& t : *tokens) {
      if (!line.empty()) line += ' ';
      line += t;
    }
    out.push_back(std::move(line));
  }
  return out;
}

}  // namespace gsg
