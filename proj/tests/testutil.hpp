// Copyright 2026 The modpol Authors
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

#ifndef MODPOL_TESTS_TESTUTIL_HPP_
#define MODPOL_TESTS_TESTUTIL_HPP_

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "modpol/gradcore/tensor.hpp"
#include "modpol/rng.hpp"

namespace modpol::testutil {

/// Central-difference gradient check. `forward` must rebuild the scalar loss
/// graph from the current leaf values on every call. Returns the worst
/// relative error max |analytic - fd| / max(1, |fd|) over all leaf elements.
inline double gradcheck(const std::function<gradcore::Tensor()>& forward,
                        std::vector<gradcore::Tensor>& leaves,
                        double step = 1e-5) {
  namespace gc = gradcore;
  for (auto& leaf : leaves) leaf.zero_grad();
  gc::Tensor loss = forward();
  gc::backward(loss);
  std::vector<std::vector<double>> analytic;
  for (auto& leaf : leaves) {
    analytic.emplace_back(leaf.grad().begin(), leaf.grad().end());
  }
  double worst = 0.0;
  for (size_t li = 0; li < leaves.size(); ++li) {
    auto vals = leaves[li].values_mut();
    for (size_t i = 0; i < vals.size(); ++i) {
      const double saved = vals[i];
      vals[i] = saved + step;
      const double up = forward().item();
      vals[i] = saved - step;
      const double dn = forward().item();
      vals[i] = saved;
      const double fd = (up - dn) / (2.0 * step);
      const double a = analytic[li].empty() ? 0.0 : analytic[li][i];
      const double rel = std::abs(a - fd) / std::max(1.0, std::abs(fd));
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

inline gradcore::Tensor random_tensor(std::vector<int> shape, Rng& rng,
                                      double lo = -2.0, double hi = 2.0,
                                      bool requires_grad = true) {
  int64_t n = 1;
  for (int d : shape) n *= d;
  std::vector<double> data(static_cast<size_t>(n));
  for (auto& v : data) v = rng.uniform(lo, hi);
  return gradcore::Tensor::from(std::move(shape), std::move(data),
                                requires_grad);
}

}  // namespace modpol::testutil

#endif  // MODPOL_TESTS_TESTUTIL_HPP_
