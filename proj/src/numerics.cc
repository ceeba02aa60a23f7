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

#include "gsg/numerics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "gsg/rng.h"

namespace gsg {
namespace kernels {

void affine(std::span<const double> x, const Tensor& w,
            std::span<const double> b, std::span<double> out) {
  const std::size_t in = w.dim(0);
  const std::size_t n = w.dim(1);
  std::copy(b.begin(), b.end(), out.begin());
  const double* wd = w.data.data();
  double* o = out.data();
  for (std::size_t i = 0; i < in; ++i) {
    const double xi = x[i];
    const double* row = wd + i * n;
    for (std::size_t j = 0; j < n; ++j) o[j] += xi * row[j];
  }
}

double log_sum_exp(std::span<const double> x) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) m = std::max(m, v);
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

void softmax(std::span<const double> logits, std::span<double> out) {
  if (logits.empty()) throw DimensionError("softmax of empty vector");
  double m = logits[0];
  for (double v : logits) {
    if (!std::isfinite(v)) throw NumericError("softmax: non-finite logit");
    m = std::max(m, v);
  }
  double s = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    s += out[i];
  }
  for (double& v : out) v /= s;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("cosine: length mismatch " + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()));
  }
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na < kCosineEps || nb < kCosineEps) return 0.0;
  const double c = dot(a, b) / (na * nb);
  return std::clamp(c, -1.0, 1.0);
}

}  // namespace kernels

Tensor softmax(const Tensor& logits) {
  Tensor out(logits.shape);
  kernels::softmax(logits.span(), out.span());
  return out;
}

double cosine_similarity(std::span<const double> a,
                         std::span<const double> b) {
  return kernels::cosine(a, b);
}

// ---------------------------------------------------------------------------
// Tape

void Tape::clear() {
  nodes_.clear();
  param_leaf_.clear();
  frozen_.clear();
}

Var Tape::push(Tensor value, bool requires_grad, BackwardFn fn) {
  if (!value.all_finite()) throw NumericError("non-finite value on tape");
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad && grad_enabled_;
  if (n.requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Tape::constant(Tensor value) { return push(std::move(value), false, {}); }

Var Tape::param(const Parameter& p) {
  if (auto it = param_leaf_.find(&p); it != param_leaf_.end()) {
    return Var{it->second};
  }
  Node n;
  n.external = &p.value;
  n.requires_grad = grad_enabled_ && !frozen_.contains(&p);
  if (n.requires_grad) {
    if (p.grad.shape != p.value.shape) p.grad = Tensor(p.value.shape, 0.0);
    n.param = &p;
  }
  nodes_.push_back(std::move(n));
  param_leaf_[&p] = nodes_.size() - 1;
  return Var{nodes_.size() - 1};
}

void Tape::freeze(const Parameter& p) {
  if (param_leaf_.contains(&p)) {
    throw std::logic_error("freeze() after parameter " + p.name + " was used");
  }
  frozen_.insert(&p);
}

Var Tape::detach(Var v) { return constant(value(v)); }

const Tensor& Tape::value(Var v) const { return val(v.id); }

const Tensor& Tape::grad(Var v) const {
  const Node& n = nodes_.at(v.id);
  return n.param ? n.param->grad : n.grad;
}

Tensor& Tape::gacc(std::size_t id) {
  Node& n = nodes_[id];
  if (n.param) return n.param->grad;
  if (n.grad.data.empty()) n.grad = Tensor(val(id).shape, 0.0);
  return n.grad;
}

void Tape::check_same_size(Var a, Var b, const char* op) const {
  if (val(a.id).size() != val(b.id).size()) {
    throw DimensionError(std::string(op) + ": size mismatch " +
                         shape_string(val(a.id).shape) + " vs " +
                         shape_string(val(b.id).shape));
  }
}

void Tape::backward(Var loss, double seed) {
  if (value(loss).size() != 1) {
    throw DimensionError("backward() needs a scalar loss");
  }
  if (!nodes_[loss.id].requires_grad) return;
  for (std::size_t i = 0; i <= loss.id; ++i) {
    if (!nodes_[i].param) nodes_[i].grad = Tensor();
  }
  gacc(loss.id)[0] += seed;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.backward || n.grad.data.empty()) continue;
    n.backward(*this, i);
  }
}

Var Tape::affine(Var x, Var w, Var b) {
  const Tensor& W = val(w.id);
  if (W.rank() != 2) throw DimensionError("affine: weight must be rank 2");
  if (val(x.id).size() != W.dim(0) || val(b.id).size() != W.dim(1)) {
    throw DimensionError("affine: x" + shape_string(val(x.id).shape) + " W" +
                         shape_string(W.shape) + " b" +
                         shape_string(val(b.id).shape));
  }
  Tensor out({W.dim(1)});
  kernels::affine(val(x.id).span(), W, val(b.id).span(), out.span());
  return push(std::move(out), any_grad(x, w) || any_grad(b),
              [x, w, b](Tape& t, std::size_t self) {
                const Tensor& gy = t.g(self);
                const Tensor& Wv = t.val(w.id);
                const std::size_t in = Wv.dim(0), n = Wv.dim(1);
                if (t.any_grad(x)) {
                  Tensor& gx = t.gacc(x.id);
                  for (std::size_t i = 0; i < in; ++i) {
                    const double* row = Wv.data.data() + i * n;
                    double s = 0.0;
                    for (std::size_t j = 0; j < n; ++j) s += gy[j] * row[j];
                    gx[i] += s;
                  }
                }
                if (t.any_grad(w)) {
                  const Tensor& xv = t.val(x.id);
                  Tensor& gw = t.gacc(w.id);
                  for (std::size_t i = 0; i < in; ++i) {
                    const double xi = xv[i];
                    double* row = gw.data.data() + i * n;
                    for (std::size_t j = 0; j < n; ++j) row[j] += xi * gy[j];
                  }
                }
                if (t.any_grad(b)) {
                  Tensor& gb = t.gacc(b.id);
                  for (std::size_t j = 0; j < n; ++j) gb[j] += gy[j];
                }
              });
}

Var Tape::add(Var a, Var b) {
  check_same_size(a, b, "add");
  Tensor out = val(a.id);
  const Tensor& bv = val(b.id);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return push(std::move(out), any_grad(a, b), [a, b](Tape& t, std::size_t s) {
    const Tensor& gy = t.g(s);
    for (Var v : {a, b}) {
      if (!t.any_grad(v)) continue;
      Tensor& gv = t.gacc(v.id);
      for (std::size_t i = 0; i < gy.size(); ++i) gv[i] += gy[i];
    }
  });
}

Var Tape::sub(Var a, Var b) {
  check_same_size(a, b, "sub");
  Tensor out = val(a.id);
  const Tensor& bv = val(b.id);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return push(std::move(out), any_grad(a, b), [a, b](Tape& t, std::size_t s) {
    const Tensor& gy = t.g(s);
    if (t.any_grad(a)) {
      Tensor& ga = t.gacc(a.id);
      for (std::size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i];
    }
    if (t.any_grad(b)) {
      Tensor& gb = t.gacc(b.id);
      for (std::size_t i = 0; i < gy.size(); ++i) gb[i] -= gy[i];
    }
  });
}

Var Tape::mul(Var a, Var b) {
  check_same_size(a, b, "mul");
  Tensor out = val(a.id);
  const Tensor& bv = val(b.id);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return push(std::move(out), any_grad(a, b), [a, b](Tape& t, std::size_t s) {
    const Tensor& gy = t.g(s);
    const Tensor& av = t.val(a.id);
    const Tensor& bv = t.val(b.id);
    if (t.any_grad(a)) {
      Tensor& ga = t.gacc(a.id);
      for (std::size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i] * bv[i];
    }
    if (t.any_grad(b)) {
      Tensor& gb = t.gacc(b.id);
      for (std::size_t i = 0; i < gy.size(); ++i) gb[i] += gy[i] * av[i];
    }
  });
}

Var Tape::scale(Var a, double k) {
  Tensor out = val(a.id);
  for (double& v : out.data) v *= k;
  return push(std::move(out), any_grad(a), [a, k](Tape& t, std::size_t s) {
    const Tensor& gy = t.g(s);
    Tensor& ga = t.gacc(a.id);
    for (std::size_t i = 0; i < gy.size(); ++i) ga[i] += k * gy[i];
  });
}

Var Tape::sigmoid(Var a) {
  Tensor out = val(a.id);
  for (double& v : out.data) v = kernels::sigmoid(v);
  return push(std::move(out), any_grad(a), [a](Tape& t, std::size_t s) {
    const Tensor& gy = t.g(s);
    const Tensor& y = t.val(s);
    Tensor& ga = t.gacc(a.id);
    for (std::size_t i = 0; i < gy.size(); ++i) {
      ga[i] += gy[i] * y[i] * (1.0 - y[i]);
    }
  });
}

Var Tape::tanh(Var a) {
  Tensor out = val(a.id);
  for (double& v : out.data) v = std::tanh(v);
  return push(std::move(out), any_grad(a), [a](Tape& t, std::size_t s) {
    const Tensor& gy = t.g(s);
    const Tensor& y = t.val(s);
    Tensor& ga = t.gacc(a.id);
    for (std::size_t i = 0; i < gy.size(); ++i) {
      ga[i] += gy[i] * (1.0 - y[i] * y[i]);
    }
  });
}

Var Tape::relu(Var a) {
  Tensor out = val(a.id);
  for (double& v : out.data) v = v > 0.0 ? v : 0.0;
  return push(std::move(out), any_grad(a), [a](Tape& t, std::size_t s) {
    const Tensor& gy = t.g(s);
    const Tensor& x = t.val(a.id);
    Tensor& ga = t.gacc(a.id);
    for (std::size_t i = 0; i < gy.size(); ++i) {
      if (x[i] > 0.0) ga[i] += gy[i];
    }
  });
}

Var Tape::concat(Var a, Var b) {
  const Tensor& av = val(a.id);
  const Tensor& bv = val(b.id);
  Tensor out({av.size() + bv.size()});
  std::copy(av.data.begin(), av.data.end(), out.data.begin());
  std::copy(bv.data.begin(), bv.data.end(), out.data.begin() + av.size());
  const std::size_t na = av.size();
  return push(std::move(out), any_grad(a, b),
              [a, b, na](Tape& t, std::size_t s) {
                const Tensor& gy = t.g(s);
                if (t.any_grad(a)) {
                  Tensor& ga = t.gacc(a.id);
                  for (std::size_t i = 0; i < na; ++i) ga[i] += gy[i];
                }
                if (t.any_grad(b)) {
                  Tensor& gb = t.gacc(b.id);
                  for (std::size_t i = 0; i + na < gy.size(); ++i) {
                    gb[i] += gy[na + i];
                  }
                }
              });
}

Var Tape::slice(Var a, std::size_t offset, std::size_t length) {
  const Tensor& av = val(a.id);
  if (offset + length > av.size()) {
    throw DimensionError("slice out of range");
  }
  Tensor out({length});
  std::copy_n(av.data.begin() + static_cast<std::ptrdiff_t>(offset), length,
              out.data.begin());
  return push(std::move(out), any_grad(a),
              [a, offset](Tape& t, std::size_t s) {
                const Tensor& gy = t.g(s);
                Tensor& ga = t.gacc(a.id);
                for (std::size_t i = 0; i < gy.size(); ++i) {
                  ga[offset + i] += gy[i];
                }
              });
}

Var Tape::rows(Var table, std::span<const int> ids) {
  const Tensor& tv = val(table.id);
  if (tv.rank() != 2) throw DimensionError("rows: table must be rank 2");
  const std::size_t d = tv.dim(1);
  Tensor out({ids.size(), d});
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || static_cast<std::size_t>(ids[r]) >= tv.dim(0)) {
      throw DimensionError("token id " + std::to_string(ids[r]) +
                           " outside table of " + std::to_string(tv.dim(0)));
    }
    std::copy_n(tv.data.begin() + static_cast<std::ptrdiff_t>(ids[r] * d), d,
                out.data.begin() + static_cast<std::ptrdiff_t>(r * d));
  }
  std::vector<int> idv(ids.begin(), ids.end());
  return push(std::move(out), any_grad(table),
              [table, idv = std::move(idv), d](Tape& t, std::size_t s) {
                const Tensor& gy = t.g(s);
                Tensor& gt = t.gacc(table.id);
                for (std::size_t r = 0; r < idv.size(); ++r) {
                  double* dst = gt.data.data() + idv[r] * d;
                  const double* src = gy.data.data() + r * d;
                  for (std::size_t e = 0; e < d; ++e) dst[e] += src[e];
                }
              });
}

Var Tape::row(Var table, int id) {
  const int ids[1] = {id};
  Var r = rows(table, ids);
  // [1, d] -> [d]; reshape in place, same storage layout.
  Node& n = nodes_[r.id];
  n.value.shape = {n.value.size()};
  return r;
}

Var Tape::conv1d_maxpool(Var x, Var w, Var b) {
  const Tensor& xv = val(x.id);
  const Tensor& W = val(w.id);
  if (xv.rank() != 2 || W.rank() != 2) {
    throw DimensionError("conv1d_maxpool: x and w must be rank 2");
  }
  const std::size_t len = xv.dim(0), d = xv.dim(1), k = W.dim(1);
  if (len == 0) throw ConfigError("conv1d_maxpool: empty sequence");
  if (d == 0 || W.dim(0) % d != 0) {
    throw DimensionError("conv1d_maxpool: filter rows " +
                         std::to_string(W.dim(0)) + " not a multiple of " +
                         std::to_string(d));
  }
  const std::size_t width = W.dim(0) / d;
  if (len < width) {
    throw ConfigError("conv1d_maxpool: sequence length " + std::to_string(len) +
                      " shorter than window " + std::to_string(width));
  }
  if (val(b.id).size() != k) throw DimensionError("conv1d_maxpool: bias");
  const std::size_t positions = len - width + 1;
  Tensor out({k});
  std::vector<std::size_t> arg(k, 0);
  std::vector<double> act(k);
  for (std::size_t p = 0; p < positions; ++p) {
    kernels::affine(std::span<const double>(xv.data).subspan(p * d, width * d),
                    W, val(b.id).span(), act);
    for (std::size_t j = 0; j < k; ++j) {
      if (p == 0 || act[j] > out[j]) {
        out[j] = act[j];
        arg[j] = p;
      }
    }
  }
  return push(
      std::move(out), any_grad(x, w) || any_grad(b),
      [x, w, b, arg = std::move(arg), d, width](Tape& t, std::size_t s) {
        const Tensor& gy = t.g(s);
        const Tensor& Wv = t.val(w.id);
        const Tensor& xv = t.val(x.id);
        const std::size_t k = Wv.dim(1);
        const std::size_t span = width * d;
        for (std::size_t j = 0; j < k; ++j) {
          const double gj = gy[j];
          if (gj == 0.0) continue;
          const std::size_t base = arg[j] * d;
          if (t.any_grad(w)) {
            Tensor& gw = t.gacc(w.id);
            for (std::size_t r = 0; r < span; ++r) {
              gw[r * k + j] += gj * xv[base + r];
            }
          }
          if (t.any_grad(x)) {
            Tensor& gx = t.gacc(x.id);
            for (std::size_t r = 0; r < span; ++r) {
              gx[base + r] += gj * Wv[r * k + j];
            }
          }
          if (t.any_grad(b)) t.gacc(b.id)[j] += gj;
        }
      });
}

Var Tape::softmax(Var a) {
  const Tensor& av = val(a.id);
  Tensor out(av.shape);
  kernels::softmax(av.span(), out.span());
  return push(std::move(out), any_grad(a), [a](Tape& t, std::size_t s) {
    const Tensor& gy = t.g(s);
    const Tensor& y = t.val(s);
    const double inner = kernels::dot(gy.span(), y.span());
    Tensor& ga = t.gacc(a.id);
    for (std::size_t i = 0; i < gy.size(); ++i) {
      ga[i] += y[i] * (gy[i] - inner);
    }
  });
}

Var Tape::log_softmax(Var a) {
  const Tensor& av = val(a.id);
  for (double v : av.data) {
    if (!std::isfinite(v)) throw NumericError("log_softmax: non-finite logit");
  }
  const double lse = kernels::log_sum_exp(av.span());
  Tensor out = av;
  for (double& v : out.data) v -= lse;
  return push(std::move(out), any_grad(a), [a](Tape& t, std::size_t s) {
    const Tensor& gy = t.g(s);
    const Tensor& y = t.val(s);
    double total = 0.0;
    for (double v : gy.data) total += v;
    Tensor& ga = t.gacc(a.id);
    for (std::size_t i = 0; i < gy.size(); ++i) {
      ga[i] += gy[i] - std::exp(y[i]) * total;
    }
  });
}

Var Tape::pick(Var a, std::size_t index) {
  const Tensor& av = val(a.id);
  if (index >= av.size()) throw DimensionError("pick: index out of range");
  return push(Tensor::Scalar(av[index]), any_grad(a),
              [a, index](Tape& t, std::size_t s) {
                t.gacc(a.id)[index] += t.g(s)[0];
              });
}

Var Tape::sum(Var a) {
  double total = 0.0;
  for (double v : val(a.id).data) total += v;
  return push(Tensor::Scalar(total), any_grad(a), [a](Tape& t, std::size_t s) {
    const double gy = t.g(s)[0];
    for (double& v : t.gacc(a.id).data) v += gy;
  });
}

Var Tape::dot(Var a, Var b) {
  check_same_size(a, b, "dot");
  const double v = kernels::dot(val(a.id).span(), val(b.id).span());
  return push(Tensor::Scalar(v), any_grad(a, b),
              [a, b](Tape& t, std::size_t s) {
                const double gy = t.g(s)[0];
                const Tensor& av = t.val(a.id);
                const Tensor& bv = t.val(b.id);
                if (t.any_grad(a)) {
                  Tensor& ga = t.gacc(a.id);
                  for (std::size_t i = 0; i < av.size(); ++i) {
                    ga[i] += gy * bv[i];
                  }
                }
                if (t.any_grad(b)) {
                  Tensor& gb = t.gacc(b.id);
                  for (std::size_t i = 0; i < av.size(); ++i) {
                    gb[i] += gy * av[i];
                  }
                }
              });
}

Var Tape::cosine(Var a, Var b) {
  check_same_size(a, b, "cosine");
  const Tensor& av = val(a.id);
  const Tensor& bv = val(b.id);
  const double na = std::sqrt(kernels::dot(av.span(), av.span()));
  const double nb = std::sqrt(kernels::dot(bv.span(), bv.span()));
  if (na < kCosineEps || nb < kCosineEps) {
    // Degenerate direction: constant zero, no gradient.
    return push(Tensor::Scalar(0.0), false, {});
  }
  const double c = kernels::dot(av.span(), bv.span()) / (na * nb);
  return push(Tensor::Scalar(c), any_grad(a, b),
              [a, b, na, nb, c](Tape& t, std::size_t s) {
                const double gy = t.g(s)[0];
                const Tensor& av = t.val(a.id);
                const Tensor& bv = t.val(b.id);
                const double inv = 1.0 / (na * nb);
                if (t.any_grad(a)) {
                  Tensor& ga = t.gacc(a.id);
                  for (std::size_t i = 0; i < av.size(); ++i) {
                    ga[i] += gy * (bv[i] * inv - c * av[i] / (na * na));
                  }
                }
                if (t.any_grad(b)) {
                  Tensor& gb = t.gacc(b.id);
                  for (std::size_t i = 0; i < bv.size(); ++i) {
                    gb[i] += gy * (av[i] * inv - c * bv[i] / (nb * nb));
                  }
                }
              });
}

Var Tape::add_n(std::span<const Var> scalars) {
  double total = 0.0;
  bool rg = false;
  for (Var v : scalars) {
    total += val(v.id).item();
    rg = rg || any_grad(v);
  }
  std::vector<Var> ins(scalars.begin(), scalars.end());
  return push(Tensor::Scalar(total), rg,
              [ins = std::move(ins)](Tape& t, std::size_t s) {
                const double gy = t.g(s)[0];
                for (Var v : ins) {
                  if (t.any_grad(v)) t.gacc(v.id)[0] += gy;
                }
              });
}

Var Tape::bce_with_logits(Var logit, double label) {
  const double l = val(logit.id).item();
  const double loss =
      std::max(l, 0.0) - l * label + std::log1p(std::exp(-std::abs(l)));
  return push(Tensor::Scalar(loss), any_grad(logit),
              [logit, label](Tape& t, std::size_t s) {
                const double l = t.val(logit.id)[0];
                t.gacc(logit.id)[0] +=
                    t.g(s)[0] * (kernels::sigmoid(l) - label);
              });
}

// ---------------------------------------------------------------------------

GradCheckResult grad_check(const std::function<Var(Tape&)>& fn,
                           const ParameterList& params,
                           const GradCheckOptions& options) {
  zero_grads(params);
  {
    Tape tape;
    Var loss = fn(tape);
    tape.backward(loss);
  }
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (Parameter* p : params) analytic.push_back(p->grad);
  zero_grads(params);

  auto evaluate = [&fn]() {
    Tape tape(false);
    return tape.scalar(fn(tape));
  };

  GradCheckResult result;
  Rng rng(options.seed);
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = *params[pi];
    std::vector<std::size_t> coords(p.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (options.max_coords_per_param > 0 &&
        coords.size() > options.max_coords_per_param) {
      rng.shuffle(coords);
      coords.resize(options.max_coords_per_param);
      std::sort(coords.begin(), coords.end());
    }
    for (std::size_t c : coords) {
      const double saved = p.value[c];
      p.value[c] = saved + options.h;
      const double fp = evaluate();
      p.value[c] = saved - options.h;
      const double fm = evaluate();
      p.value[c] = saved;
      const double numeric = (fp - fm) / (2.0 * options.h);
      const double a = analytic[pi][c];
      const double abs_err = std::abs(a - numeric);
      const double denom =
          std::max({std::abs(a), std::abs(numeric), options.floor});
      const double rel = abs_err / denom;
      result.max_abs_error = std::max(result.max_abs_error, abs_err);
      if (rel > result.max_rel_error || result.worst.empty()) {
        result.max_rel_error = rel;
        result.worst = p.name + "[" + std::to_string(c) + "]";
      }
      ++result.coords_checked;
    }
  }
  return result;
}

void zero_grads(const ParameterList& params) {
  for (const Parameter* p : params) {
    if (p->grad.shape != p->value.shape) p->grad = Tensor(p->value.shape, 0.0);
    p->zero_grad();
  }
}

double clip_grad_norm(const ParameterList& params, double max_norm) {
  double sq = 0.0;
  for (const Parameter* p : params) {
    for (double g : p->grad.data) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double k = max_norm / norm;
    for (Parameter* p : params) {
      for (double& g : p->grad.data) g *= k;
    }
  }
  return norm;
}

Adam::Adam(ParameterList params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
  for (Parameter* p : params_) {
    m_.emplace_back(p->value.shape, 0.0);
    v_.emplace_back(p->value.shape, 0.0);
  }
}

void Adam::step() {
  ++steps_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = *params_[i];
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double gk = p.grad[k];
      m[k] = b1 * m[k] + (1.0 - b1) * gk;
      v[k] = b2 * v[k] + (1.0 - b2) * gk * gk;
      const double mhat = m[k] / c1;
      const double vhat = v[k] / c2;
      p.value[k] -= options_.lr * mhat / (std::sqrt(vhat) + options_.eps);
    }
    p.zero_grad();
  }
}

}  // namespace gsg
