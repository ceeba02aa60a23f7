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

// Dense math and a small reverse-mode tape.
//
// Every differentiable op lives on Tape: it computes the forward value
// immediately and records a closure that propagates gradients when
// Tape::backward() runs. Parameter leaves accumulate straight into
// Parameter::grad. A tape built with grad disabled records nothing but values,
// so inference and training share one code path and produce bitwise-identical
// forward results.

#ifndef GSG_NUMERICS_H_
#define GSG_NUMERICS_H_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "gsg/tensor.h"

namespace gsg {

// Norms below this count as zero for cosine similarity.
inline constexpr double kCosineEps = 1e-12;

namespace kernels {

// out = x W + b, W is [in, out] row-major.
void affine(std::span<const double> x, const Tensor& w,
            std::span<const double> b, std::span<double> out);
// Max-subtracted softmax. Throws NumericError on non-finite input.
void softmax(std::span<const double> logits, std::span<double> out);
double log_sum_exp(std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);
// Zero when either norm is below kCosineEps.
double cosine(std::span<const double> a, std::span<const double> b);
inline double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                : std::exp(x) / (1.0 + std::exp(x));
}

}  // namespace kernels

Tensor softmax(const Tensor& logits);
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Handle to a node on a Tape.
struct Var {
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::size_t id = kNone;
  bool valid() const { return id != kNone; }
};

class Tape {
 public:
  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool grad_enabled() const { return grad_enabled_; }
  std::size_t size() const { return nodes_.size(); }
  void clear();

  // Leaves.
  Var constant(Tensor value);
  // One leaf per parameter per tape; reads the live parameter value and
  // accumulates into Parameter::grad unless frozen on this tape.
  Var param(const Parameter& p);
  // Excludes p from gradient accumulation for the lifetime of this tape.
  // Must be called before p is first used.
  void freeze(const Parameter& p);
  // Value-identical copy that blocks gradient flow.
  Var detach(Var v);

  const Tensor& value(Var v) const;
  double scalar(Var v) const { return value(v).item(); }
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
  // Gradient w.r.t. a non-parameter node after backward(); empty if none.
  const Tensor& grad(Var v) const;

  // Reverse sweep from a scalar; seed multiplies the output gradient.
  void backward(Var loss, double seed = 1.0);

  // Dense ops on vectors.
  Var affine(Var x, Var w, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double s);
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var relu(Var a);
  Var concat(Var a, Var b);
  Var slice(Var a, std::size_t offset, std::size_t length);

  // Embedding lookups from a [V, d] table.
  Var rows(Var table, std::span<const int> ids);  // -> [L, d]
  Var row(Var table, int id);                     // -> [d]

  // Valid 1-D convolution of x [L, d] with filters w [width*d, k] and bias
  // b [k], followed by max over time. Returns [k]. Requires L >= width.
  Var conv1d_maxpool(Var x, Var w, Var b);

  Var softmax(Var a);
  Var log_softmax(Var a);

  // Scalar-valued.
  Var pick(Var a, std::size_t index);
  Var sum(Var a);
  Var dot(Var a, Var b);
  Var cosine(Var a, Var b);
  Var add_n(std::span<const Var> scalars);
  // softplus(l) - y l, the binary cross-entropy of sigmoid(l) against y.
  Var bce_with_logits(Var logit, double label);

 private:
  using BackwardFn = std::function<void(Tape&, std::size_t)>;
  struct Node {
    Tensor value;
    const Tensor* external = nullptr;
    const Parameter* param = nullptr;
    Tensor grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Var push(Tensor value, bool requires_grad, BackwardFn fn);
  bool any_grad(Var a) const { return nodes_[a.id].requires_grad; }
  bool any_grad(Var a, Var b) const { return any_grad(a) || any_grad(b); }
  Tensor& gacc(std::size_t id);
  const Tensor& g(std::size_t id) const { return nodes_[id].grad; }
  const Tensor& val(std::size_t id) const {
    const Node& n = nodes_[id];
    return n.external ? *n.external : n.value;
  }
  void check_same_size(Var a, Var b, const char* op) const;

  bool grad_enabled_;
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_leaf_;
  std::unordered_set<const Parameter*> frozen_;
};

// Finite-difference check of every coordinate (or a seeded sample of them)
// of the given parameters against the tape gradient of fn.
struct GradCheckOptions {
  double h = 1e-6;
  // 0 checks every coordinate.
  std::size_t max_coords_per_param = 0;
  std::uint64_t seed = 0;
  // Relative errors are measured against max(|analytic|, |numeric|, floor).
  double floor = 1e-4;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t coords_checked = 0;
  std::string worst;
};

GradCheckResult grad_check(const std::function<Var(Tape&)>& fn,
                           const ParameterList& params,
                           const GradCheckOptions& options = {});

void zero_grads(const ParameterList& params);
// Rescales gradients in place so their joint L2 norm is at most max_norm.
// Returns the norm before clipping.
double clip_grad_norm(const ParameterList& params, double max_norm);

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. step() consumes and zeroes the gradients.
class Adam {
 public:
  Adam() = default;
  Adam(ParameterList params, AdamOptions options = {});

  void step();
  std::int64_t steps() const { return steps_; }
  const AdamOptions& options() const { return options_; }
  void set_lr(double lr) { options_.lr = lr; }
  const ParameterList& params() const { return params_; }

  std::vector<Tensor>& first_moments() { return m_; }
  std::vector<Tensor>& second_moments() { return v_; }
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }
  void set_steps(std::int64_t s) { steps_ = s; }

 private:
  ParameterList params_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::int64_t steps_ = 0;
  AdamOptions options_;
};

}  // namespace gsg

#endif  // GSG_NUMERICS_H_
