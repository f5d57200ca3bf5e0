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

#include "modpol/diffusion/schedule.hpp"

#include <cmath>
#include <string>

#include "modpol/errors.hpp"

namespace modpol::diffusion {

using gradcore::Tensor;

NoiseSchedule linear_schedule(int steps, double beta_start, double beta_end) {
  if (steps < 2) {
    throw ConfigError("noise schedule needs at least 2 steps, got " +
                      std::to_string(steps));
  }
  if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0)) {
    throw ConfigError("beta range must satisfy 0 < start <= end < 1");
  }
  NoiseSchedule s;
  s.steps = steps;
  s.beta.resize(steps);
  s.alpha.resize(steps);
  s.alpha_bar.resize(steps);
  s.sigma.resize(steps);
  double prod = 1.0;
  for (int t = 0; t < steps; ++t) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(t) / (steps - 1);
    s.beta[t] = beta_start + (beta_end - beta_start) * frac;
    s.alpha[t] = 1.0 - s.beta[t];
    prod *= s.alpha[t];
    s.alpha_bar[t] = prod;
    s.sigma[t] = std::sqrt(s.beta[t]);
  }
  return s;
}

namespace {

void check_t(int t, const NoiseSchedule& sched) {
  if (t < 0 || t >= sched.steps) {
    throw ContractError("timestep " + std::to_string(t) +
                        " outside schedule of length " +
                        std::to_string(sched.steps));
  }
}

}  // namespace

Tensor forward_diffuse(const Tensor& x0, int t, const Tensor& eps,
                       const NoiseSchedule& sched) {
  check_t(t, sched);
  if (x0.shape() != eps.shape()) {
    throw ShapeError("forward_diffuse: x0 " + gradcore::shape_str(x0.shape()) +
                     " vs eps " + gradcore::shape_str(eps.shape()));
  }
  const double ab = sched.alpha_bar[t];
  return add(scale(x0, std::sqrt(ab)), scale(eps, std::sqrt(1.0 - ab)));
}

Tensor ddpm_reverse_step(const Tensor& x_t, const Tensor& eps_hat, int t,
                         const Tensor& z, const NoiseSchedule& sched,
                         double sigma_scale) {
  check_t(t, sched);
  if (x_t.shape() != eps_hat.shape() || x_t.shape() != z.shape()) {
    throw ShapeError("ddpm_reverse_step: shapes disagree");
  }
  const double alpha = sched.alpha[t];
  const double abar = sched.alpha_bar[t];
  const double coef =
      alpha == 1.0 ? 0.0 : (1.0 - alpha) / std::sqrt(1.0 - abar);
  const double sigma = t == 0 ? 0.0 : sched.sigma[t] * sigma_scale;
  Tensor mean = scale(sub(x_t, scale(eps_hat, coef)), 1.0 / std::sqrt(alpha));
  if (sigma == 0.0) return mean;
  return add(mean, scale(z, sigma));
}

}  // namespace modpol::diffusion
