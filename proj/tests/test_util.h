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

// Shared helpers for the unit tests.

#ifndef GSG_TESTS_TEST_UTIL_H_
#define GSG_TESTS_TEST_UTIL_H_

#include <string>
#include <vector>

#include "gsg/numerics.h"
#include "gsg/rng.h"

namespace gsg::testing {

inline Tensor random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.data) v = scale * (2.0 * rng.uniform() - 1.0);
  return t;
}

inline Parameter random_param(const std::string& name, Shape shape, Rng& rng,
                              double scale = 1.0) {
  return Parameter(name, random_tensor(std::move(shape), rng, scale));
}

inline void zero_all(const ParameterList& params) {
  for (Parameter* p : params) p->value.fill(0.0);
}

inline std::vector<Tensor> snapshot(const ParameterList& params) {
  std::vector<Tensor> out;
  for (const Parameter* p : params) out.push_back(p->value);
  return out;
}

inline bool unchanged(const ParameterList& params,
                      const std::vector<Tensor>& before) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!(params[i]->value == before[i])) return false;
  }
  return true;
}

inline double change_norm(const ParameterList& params,
                          const std::vector<Tensor>& before) {
  double sq = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (std::size_t k = 0; k < before[i].size(); ++k) {
      const double d = params[i]->value[k] - before[i][k];
      sq += d * d;
    }
  }
  return sq;
}

}  // namespace gsg::testing

#endif  // GSG_TESTS_TEST_UTIL_H_
