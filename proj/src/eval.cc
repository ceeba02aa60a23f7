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

#include "gsg/eval.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>

#include "gsg/corpus.h"

namespace gsg {
namespace {

using NgramCounts = std::map<Tokens, int>;

NgramCounts count_ngrams(const Tokens& s, std::size_t max_n) {
  NgramCounts out;
  for (std::size_t n = 1; n <= max_n; ++n) {
    for (std::size_t i = 0; i + n <= s.size(); ++i) {
      ++out[Tokens(s.begin() + static_cast<std::ptrdiff_t>(i),
                   s.begin() + static_cast<std::ptrdiff_t>(i + n))];
    }
  }
  return out;
}

void merge_max(NgramCounts& into, const NgramCounts& from) {
  for (const auto& [g, c] : from) {
    int& slot = into[g];
    slot = std::max(slot, c);
  }
}

// Closest length to hyp_len; the shorter one on ties.
std::size_t closest_length(std::size_t hyp_len,
                           const std::map<std::size_t, int>& lengths) {
  std::size_t best = 0;
  std::size_t best_diff = static_cast<std::size_t>(-1);
  for (const auto& [len, count] : lengths) {
    if (count <= 0) continue;
    const std::size_t diff = len > hyp_len ? len - hyp_len : hyp_len - len;
    if (diff < best_diff) {
      best = len;
      best_diff = diff;
    }
  }
  return best;
}

struct Stats {
  std::vector<double> matches;
  std::vector<double> totals;
  double hyp_len = 0.0;
  double ref_len = 0.0;

  explicit Stats(std::size_t max_n) : matches(max_n, 0.0), totals(max_n, 0.0) {}

  template <typename MaxRef>
  void add(const Tokens& hyp, std::size_t ref_closest, MaxRef max_ref) {
    const std::size_t max_n = matches.size();
    for (const auto& [g, c] : count_ngrams(hyp, max_n)) {
      matches[g.size() - 1] += std::min(c, max_ref(g));
    }
    for (std::size_t n = 1; n <= max_n; ++n) {
      if (hyp.size() >= n) totals[n - 1] += static_cast<double>(hyp.size() - n + 1);
    }
    hyp_len += static_cast<double>(hyp.size());
    ref_len += static_cast<double>(ref_closest);
  }
};

BleuReport finish(const Stats& s, const BleuOptions& options) {
  BleuReport r;
  r.smoothing = options.smoothing;
  const std::size_t max_n = options.max_n;
  r.scores.assign(max_n, 0.0);
  r.precisions.assign(max_n, 0.0);
  for (std::size_t k = 0; k < max_n; ++k) {
    if (s.matches[k] > 0.0) {
      r.precisions[k] = s.matches[k] / s.totals[k];
    } else if (options.smoothing) {
      r.precisions[k] = 1.0 / (s.totals[k] + 1.0);
    }
  }
  if (s.hyp_len <= 0.0) return r;
  r.brevity_penalty =
      s.hyp_len > s.ref_len ? 1.0 : std::exp(1.0 - s.ref_len / s.hyp_len);
  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t n = 1; n <= max_n; ++n) {
    if (r.precisions[n - 1] <= 0.0) zero = true;
    if (zero) break;
    log_sum += std::log(r.precisions[n - 1]);
    r.scores[n - 1] =
        r.brevity_penalty * std::exp(log_sum / static_cast<double>(n));
  }
  return r;
}

void check_options(const BleuOptions& options) {
  if (options.max_n < 1) throw ConfigError("BLEU needs max_n >= 1");
}

}  // namespace

BleuReport bleu(std::span<const Tokens> hypotheses,
                std::span<const std::vector<Tokens>> references,
                const BleuOptions& options) {
  check_options(options);
  if (hypotheses.empty()) throw ConfigError("BLEU needs hypotheses");
  if (references.size() != hypotheses.size()) {
    throw ConfigError("BLEU needs one reference set per hypothesis");
  }
  Stats stats(options.max_n);
  std::size_t nrefs = 0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    if (references[i].empty()) throw ConfigError("empty reference set");
    NgramCounts max_ref;
    std::map<std::size_t, int> lengths;
    for (const Tokens& ref : references[i]) {
      merge_max(max_ref, count_ngrams(ref, options.max_n));
      ++lengths[ref.size()];
    }
    nrefs += references[i].size();
    stats.add(hypotheses[i], closest_length(hypotheses[i].size(), lengths),
              [&](const Tokens& g) {
                auto it = max_ref.find(g);
                return it == max_ref.end() ? 0 : it->second;
              });
  }
  BleuReport r = finish(stats, options);
  r.hypotheses = hypotheses.size();
  r.references = nrefs;
  return r;
}

BleuReport bleu_shared(std::span<const Tokens> hypotheses,
                       std::span<const Tokens> references,
                       const BleuOptions& options) {
  check_options(options);
  if (hypotheses.empty()) throw ConfigError("BLEU needs hypotheses");
  if (references.empty()) throw ConfigError("BLEU needs references");
  NgramCounts max_ref;
  std::map<std::size_t, int> lengths;
  for (const Tokens& ref : references) {
    merge_max(max_ref, count_ngrams(ref, options.max_n));
    ++lengths[ref.size()];
  }
  Stats stats(options.max_n);
  for (const Tokens& h : hypotheses) {
    stats.add(h, closest_length(h.size(), lengths), [&](const Tokens& g) {
      auto it = max_ref.find(g);
      return it == max_ref.end() ? 0 : it->second;
    });
  }
  BleuReport r = finish(stats, options);
  r.hypotheses = hypotheses.size();
  r.references = references.size();
  return r;
}

double sentence_bleu(const Tokens& hypothesis,
                     std::span<const Tokens> references,
                     const BleuOptions& options) {
  return bleu_shared(std::span<const Tokens>(&hypothesis, 1), references,
                     options)
      .bleu(options.max_n);
}

BleuReport self_bleu(std::span<const Tokens> hypotheses,
                     const BleuOptions& options) {
  check_options(options);
  if (hypotheses.size() < 2) {
    throw ConfigError("self-BLEU needs at least 2 hypotheses");
  }
  // For every n-gram the two largest per-sentence counts and the index of
  // one sentence holding the largest; the best count among "all others" is
  // then top1 unless this sentence is that holder.
  struct Top {
    int first = 0;
    int second = 0;
    std::size_t holder = 0;
  };
  std::vector<NgramCounts> counts;
  counts.reserve(hypotheses.size());
  std::map<Tokens, Top> top;
  std::map<std::size_t, int> lengths;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    counts.push_back(count_ngrams(hypotheses[i], options.max_n));
    ++lengths[hypotheses[i].size()];
    for (const auto& [g, c] : counts.back()) {
      Top& t = top[g];
      if (c > t.first) {
        t.second = t.first;
        t.first = c;
        t.holder = i;
      } else if (c > t.second) {
        t.second = c;
      }
    }
  }
  BleuReport mean;
  mean.scores.assign(options.max_n, 0.0);
  mean.precisions.assign(options.max_n, 0.0);
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    Stats stats(options.max_n);
    --lengths[hypotheses[i].size()];
    stats.add(hypotheses[i], closest_length(hypotheses[i].size(), lengths),
              [&](const Tokens& g) {
                const Top& t = top.at(g);
                return t.holder == i ? t.second : t.first;
              });
    ++lengths[hypotheses[i].size()];
    const BleuReport r = finish(stats, options);
    for (std::size_t n = 0; n < options.max_n; ++n) {
      mean.scores[n] += r.scores[n];
      mean.precisions[n] += r.precisions[n];
    }
    mean.brevity_penalty += r.brevity_penalty;
  }
  const double k = static_cast<double>(hypotheses.size());
  for (double& v : mean.scores) v /= k;
  for (double& v : mean.precisions) v /= k;
  mean.brevity_penalty /= k;
  mean.hypotheses = hypotheses.size();
  mean.references = hypotheses.size() - 1;
  mean.smoothing = options.smoothing;
  return mean;
}

void BleuReport::write_table(std::ostream& out) const {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::fixed << std::setprecision(6);
  for (std::size_t n = 1; n <= scores.size(); ++n) {
    out << "BLEU-" << n << "  " << std::setw(10) << scores[n - 1] << '\n';
  }
  out << "BP      " << std::setw(10) << brevity_penalty << '\n';
  out << "hyps " << hypotheses << "  refs " << references
      << (smoothing ? "  smoothed" : "") << '\n';
  out.flags(flags);
  out.precision(prec);
}

void BleuReport::write_csv(std::ostream& out) const {
  const auto prec = out.precision(17);
  out << "n,bleu\n";
  for (std::size_t n = 1; n <= scores.size(); ++n) {
    out << n << ',' << scores[n - 1] << '\n';
  }
  out.precision(prec);
}

Tokens TokenInterner::operator()(const std::string& line) {
  Tokens out;
  for (const std::string& tok : split_tokens(line)) {
    auto [it, fresh] = ids_.emplace(tok, static_cast<int>(names_.size()));
    if (fresh) names_.push_back(tok);
    out.push_back(it->second);
  }
  return out;
}

double perplexity(const Policy& policy,
                  std::span<const std::vector<int>> corpus, InitMode mode,
                  Rng& rng) {
  if (corpus.empty()) throw ConfigError("perplexity needs a non-empty corpus");
  double nll = 0.0;
  double tokens = 0.0;
  for (const std::vector<int>& s : corpus) {
    const Tensor z = mode == InitMode::kNoise
                         ? noise_state(policy.encoder.feature_dim(), rng)
                         : policy.encoder.encode_prefix(s);
    nll += sequence_nll(policy, z, s);
    tokens += static_cast<double>(s.size());
  }
  return std::exp(nll / tokens);
}

}  // namespace gsg
