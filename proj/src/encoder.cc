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

#include "gsg/encoder.h"

#include <algorithm>
#include <string>

#include "gsg/corpus.h"

namespace gsg {

CnnEncoder::CnnEncoder(std::size_t vocab, std::size_t d_emb, std::size_t k,
                       std::vector<std::size_t> windows, Rng& rng)
    : conv("encoder", vocab, d_emb, k, std::move(windows), rng) {}

std::vector<int> CnnEncoder::padded(std::span<const int> prefix) const {
  std::vector<int> ids(prefix.begin(), prefix.end());
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_size()) {
      throw DimensionError("token id " + std::to_string(id) +
                           " outside vocabulary of " +
                           std::to_string(vocab_size()));
    }
  }
  if (ids.empty()) ids.push_back(kBos);
  if (ids.size() < conv.max_window()) ids.resize(conv.max_window(), kPad);
  return ids;
}

Var CnnEncoder::encode(Tape& tape, std::span<const int> prefix) const {
  return conv.features(tape, padded(prefix));
}

Tensor CnnEncoder::encode_prefix(std::span<const int> prefix) const {
  Tape tape(false);
  return tape.value(encode(tape, prefix));
}

std::vector<Tensor> CnnEncoder::prefix_features(
    std::span<const int> ids) const {
  std::vector<Tensor> out;
  out.reserve(ids.size() + 1);
  PrefixEncoder inc(*this);
  out.push_back(inc.current());
  for (int id : ids) out.push_back(inc.push(id));
  return out;
}

PrefixEncoder::PrefixEncoder(const CnnEncoder& encoder)
    : encoder_(&encoder), feature_(encoder.encode_prefix({})) {}

void PrefixEncoder::activation(std::size_t window, std::size_t position,
                               std::span<double> out) const {
  const ConvBank& conv = encoder_->conv;
  const std::size_t w = conv.windows[window];
  const std::size_t d = conv.embed_dim();
  std::vector<double> x(w * d);
  for (std::size_t r = 0; r < w; ++r) {
    const int id = ids_[position + r];
    std::copy_n(conv.embedding.value.data.begin() +
                    static_cast<std::ptrdiff_t>(id * d),
                d, x.begin() + static_cast<std::ptrdiff_t>(r * d));
  }
  kernels::affine(x, conv.filters[window].value, conv.biases[window].value.span(),
                  out);
}

void PrefixEncoder::refresh_from_scratch() {
  const ConvBank& conv = encoder_->conv;
  const std::size_t k = conv.filters_per_window();
  maxima_.assign(conv.windows.size(), std::vector<double>(k));
  std::vector<double> act(k);
  for (std::size_t wi = 0; wi < conv.windows.size(); ++wi) {
    const std::size_t positions = ids_.size() - conv.windows[wi] + 1;
    for (std::size_t p = 0; p < positions; ++p) {
      activation(wi, p, act);
      for (std::size_t j = 0; j < k; ++j) {
        if (p == 0 || act[j] > maxima_[wi][j]) maxima_[wi][j] = act[j];
      }
    }
  }
}

const Tensor& PrefixEncoder::push(int id) {
  ids_.push_back(id);
  const ConvBank& conv = encoder_->conv;
  const std::size_t widest = conv.max_window();
  if (ids_.size() < widest) {
    feature_ = encoder_->encode_prefix(ids_);
    return feature_;
  }
  if (id < 0 || static_cast<std::size_t>(id) >= encoder_->vocab_size()) {
    throw DimensionError("token id " + std::to_string(id) +
                         " outside vocabulary");
  }
  const std::size_t k = conv.filters_per_window();
  if (ids_.size() == widest) {
    refresh_from_scratch();
  } else {
    std::vector<double> act(k);
    for (std::size_t wi = 0; wi < conv.windows.size(); ++wi) {
      activation(wi, ids_.size() - conv.windows[wi], act);
      for (std::size_t j = 0; j < k; ++j) {
        if (act[j] > maxima_[wi][j]) maxima_[wi][j] = act[j];
      }
    }
  }
  feature_ = Tensor({conv.windows.size() * k});
  for (std::size_t wi = 0; wi < conv.windows.size(); ++wi) {
    for (std::size_t j = 0; j < k; ++j) {
      const double v = maxima_[wi][j];
      feature_[wi * k + j] = v > 0.0 ? v : 0.0;
    }
  }
  if (!feature_.all_finite()) throw NumericError("non-finite prefix feature");
  return feature_;
}

Tensor noise_state(std::size_t dim, Rng& rng) {
  Tensor z({dim});
  for (double& v : z.data) v = rng.normal();
  return z;
}

}  // namespace gsg
